#include "higen/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace higen {

namespace {

Tensor onehot(int index, int size) {
  Tensor t({size});
  t[index] = 1.0;
  return t;
}

Tensor binary_tag_vector(const Document& doc, int num_tags) {
  Tensor binary({num_tags});
  for (int id : doc.tag_ids) {
    if (id < 0 || id >= num_tags) {
      throw DataError("document '" + doc.id + "' has tag id " + std::to_string(id) +
                      " outside L = " + std::to_string(num_tags));
    }
    binary[id] = 1.0;
  }
  return binary;
}

}  // namespace

LossParts example_loss_graph(Tape& tape, const Document& doc, const ExampleInput& input,
                             const ModelVars& vars, const TrainConfig& cfg) {
  if (doc.sentences.empty()) {
    throw DomainError("document '" + doc.id + "' has no sentences");
  }
  if (static_cast<int>(doc.sentences.size()) > cfg.s_max) {
    throw DomainError("document '" + doc.id + "' has " + std::to_string(doc.sentences.size()) +
                      " sentences, s_max is " + std::to_string(cfg.s_max));
  }

  LossParts parts;
  Var features = features_graph(tape, input, vars, cfg);
  Var tag_probs = predict_tags_graph(features, vars.enc);

  if (doc.tag_ids.empty()) {
    parts.tag = tape.leaf(Tensor::scalar(0.0));
  } else {
    parts.tag = cross_entropy(tag_probs, tag_target(binary_tag_vector(doc, cfg.num_tags)));
  }

  parts.semantic_ids = semantic_tag_ids(tag_probs.value(), doc, cfg);
  Var embeddings = gather_tag_embeddings(vars.enc.tag_embedding, parts.semantic_ids);

  parts.forward = teacher_forced_pass(doc.sentences, features, embeddings, vars.coatt, vars.sent,
                                      vars.word, cfg.attention_mode);

  int s_count = static_cast<int>(doc.sentences.size());
  for (int s = 0; s < s_count; ++s) {
    int label = s + 1 == s_count ? kStopIndex : kContinueIndex;
    Var ce = cross_entropy(parts.forward.stop_dists[static_cast<std::size_t>(s)], onehot(label, 2));
    parts.sent = parts.sent ? add(parts.sent, ce) : ce;
  }

  for (int s = 0; s < s_count; ++s) {
    const std::vector<int>& words = doc.sentences[static_cast<std::size_t>(s)];
    const std::vector<Var>& dists = parts.forward.word_dists[static_cast<std::size_t>(s)];
    for (std::size_t t = 0; t < dists.size(); ++t) {
      int target = t < words.size() ? words[t] : Vocabulary::kEnd;
      if (target < 0 || target >= cfg.vocab_size) {
        throw DataError("document '" + doc.id + "' has word id " + std::to_string(target) +
                        " outside V = " + std::to_string(cfg.vocab_size));
      }
      Var ce = cross_entropy(dists[t], onehot(target, cfg.vocab_size));
      parts.word = parts.word ? add(parts.word, ce) : ce;
    }
  }

  parts.reg = attention_regularizer_graph(tape, parts.forward.alpha_cols, parts.forward.beta_cols,
                                          cfg.lambda_reg);

  parts.total = add(add(add(scale(parts.tag, cfg.lambda_tag), scale(parts.sent, cfg.lambda_sent)),
                        scale(parts.word, cfg.lambda_word)),
                    parts.reg);
  return parts;
}

LossComponents example_loss(const Document& doc, const ExampleInput& input,
                            const ParameterStore& store, const TrainConfig& cfg) {
  Tape tape;
  ModelVars vars = register_model(tape, store);
  LossParts parts = example_loss_graph(tape, doc, input, vars, cfg);
  LossComponents out;
  out.total = parts.total.value()[0];
  out.tag = parts.tag.value()[0];
  out.sent = parts.sent.value()[0];
  out.word = parts.word.value()[0];
  out.reg = parts.reg.value()[0];
  return out;
}

double learning_rate_for(const std::string& name, const TrainConfig& cfg) {
  return name.rfind("encoder.", 0) == 0 ? cfg.lr_cnn : cfg.lr_rnn;
}

void adam_step(ParameterStore& params, const GradientMap& grads, AdamState& state,
               const TrainConfig& cfg) {
  ++state.step;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  for (auto& [name, value] : params) {
    const Tensor& g = grads.at(name);
    if (!g.same_shape(value)) {
      throw DimensionError("gradient " + g.shape_str() + " does not match parameter " +
                           value.shape_str() + " for " + name);
    }
    Tensor& m = state.m.try_emplace(name, Tensor(value.shape())).first->second;
    Tensor& v = state.v.try_emplace(name, Tensor(value.shape())).first->second;
    double lr = learning_rate_for(name, cfg);
    for (int i = 0; i < value.numel(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      double m_hat = m[i] / bc1;
      double v_hat = v[i] / bc2;
      value[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

void write_epoch_log(const std::string& path, const std::vector<EpochRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "epoch,train_loss,val_loss,l_tag,l_sent,l_word,l_reg\n";
  out.precision(17);
  for (const EpochRow& r : rows) {
    out << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.tag << ',' << r.sent
        << ',' << r.word << ',' << r.reg << '\n';
  }
}

Tensor narrowed(const Tensor& t) {
  Tensor out = t;
  for (int i = 0; i < out.numel(); ++i) {
    out[i] = static_cast<double>(static_cast<float>(out[i]));
  }
  return out;
}

ParameterStore narrowed_copy(const ParameterStore& store) {
  ParameterStore out;
  for (const auto& [name, value] : store) out.add(name, narrowed(value));
  return out;
}

double mean_loss(const std::vector<Document>& docs, const std::vector<ExampleInput>& inputs,
                 const ParameterStore& store, const TrainConfig& cfg) {
  if (docs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    total += example_loss(docs[i], inputs[i], store, cfg).total;
  }
  return total / static_cast<double>(docs.size());
}

std::vector<Document> clip_documents(const std::vector<Document>& docs, const TrainConfig& cfg) {
  std::vector<Document> out;
  out.reserve(docs.size());
  for (const Document& doc : docs) {
    Document copy = doc;
    copy.sentences.clear();
    for (const std::vector<int>& sentence : doc.sentences) {
      if (sentence.empty()) continue;
      std::vector<int> words = sentence;
      if (static_cast<int>(words.size()) > cfg.t_max) {
        words.resize(static_cast<std::size_t>(cfg.t_max));
      }
      copy.sentences.push_back(std::move(words));
      if (static_cast<int>(copy.sentences.size()) == cfg.s_max) break;
    }
    if (copy.sentences.empty()) {
      throw DataError("document '" + doc.id + "' has no usable sentences");
    }
    out.push_back(std::move(copy));
  }
  return out;
}

Checkpoint train(const TrainConfig& cfg, const std::vector<Document>& train_docs,
                 const std::vector<Document>& val_docs, std::vector<EpochRow>* log,
                 std::ostream* progress) {
  if (train_docs.empty()) throw DomainError("train: empty training set");

  Rng rng(cfg.seed);
  ParameterStore params = init_model_params(cfg, rng);

  std::vector<Document> train_set = clip_documents(train_docs, cfg);
  std::vector<Document> val_set = clip_documents(val_docs, cfg);
  std::vector<ExampleInput> train_inputs, val_inputs;
  for (const Document& doc : train_set) train_inputs.push_back(load_example_input(doc));
  for (const Document& doc : val_set) val_inputs.push_back(load_example_input(doc));

  AdamState adam;
  Checkpoint best;
  best.config = cfg;
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    LossComponents sums;
    for (std::size_t idx : order) {
      const Document& doc = train_set[idx];
      Tape tape;
      ModelVars vars = register_model(tape, params);
      LossParts parts = example_loss_graph(tape, doc, train_inputs[idx], vars, cfg);
      double loss = parts.total.value()[0];
      if (!std::isfinite(loss)) {
        throw DivergenceError("non-finite loss on example '" + doc.id + "' in epoch " +
                              std::to_string(epoch));
      }
      GradientMap grads = tape.backward(parts.total);
      params.fill_missing(grads);
      adam_step(params, grads, adam, cfg);
      for (const auto& [name, value] : params) {
        for (int i = 0; i < value.numel(); ++i) {
          if (!std::isfinite(value[i]) || std::abs(value[i]) > 1e100) {
            throw DivergenceError("parameter " + name + " diverged after example '" + doc.id +
                                  "' in epoch " + std::to_string(epoch));
          }
        }
      }

      sums.total += loss;
      sums.tag += parts.tag.value()[0];
      sums.sent += parts.sent.value()[0];
      sums.word += parts.word.value()[0];
      sums.reg += parts.reg.value()[0];
    }
    double inv = 1.0 / static_cast<double>(train_set.size());

    // Validation runs on the f32-narrowed copy so the recorded loss matches a
    // checkpoint reloaded from disk bit for bit.
    ParameterStore eval_params = narrowed_copy(params);
    double val = val_set.empty() ? sums.total * inv
                                 : mean_loss(val_set, val_inputs, eval_params, cfg);

    if (log) {
      log->push_back({epoch, sums.total * inv, val, sums.tag * inv, sums.sent * inv,
                      sums.word * inv, sums.reg * inv});
    }
    if (progress) {
      (*progress) << "epoch " << epoch << " train_loss " << sums.total * inv << " val_loss " << val
                  << '\n';
    }

    if (val < best_val) {
      best_val = val;
      epochs_since_best = 0;
      best.params = std::move(eval_params);
      best.adam = adam;
      best.epoch = epoch;
      best.best_val = val;
    } else {
      ++epochs_since_best;
      if (epochs_since_best > cfg.patience) break;
    }
  }

  if (best.epoch == 0) {
    // epochs == 0: checkpoint the initial parameters.
    best.params = narrowed_copy(params);
    best.adam = adam;
    double val = val_set.empty() ? mean_loss(train_set, train_inputs, best.params, cfg)
                                 : mean_loss(val_set, val_inputs, best.params, cfg);
    best.best_val = val;
  }
  return best;
}

// --- checkpoint io -------------------------------------------------------------

namespace {

constexpr const char* kAdamMPrefix = "__adam_m__";
constexpr const char* kAdamVPrefix = "__adam_v__";
constexpr const char* kAdamStepKey = "__adam_step__";
constexpr const char* kBestValKey = "__best_val__";
constexpr const char* kEpochKey = "__epoch__";
constexpr const char* kConfigKey = "__config__";

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) throw FormatError("truncated checkpoint " + path);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

Tensor text_tensor(const std::string& text) {
  Tensor t({static_cast<int>(text.size())});
  for (std::size_t i = 0; i < text.size(); ++i) {
    t[static_cast<int>(i)] = static_cast<double>(static_cast<unsigned char>(text[i]));
  }
  return t;
}

std::string tensor_text(const Tensor& t) {
  std::string out;
  out.reserve(static_cast<std::size_t>(t.numel()));
  for (int i = 0; i < t.numel(); ++i) out.push_back(static_cast<char>(t[i]));
  return out;
}

// Bit-exact double storage through the f32-narrowing tensor format: the
// 64-bit pattern as four 16-bit integers, each exactly representable.
Tensor split_double(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  Tensor t({4});
  for (int i = 0; i < 4; ++i) {
    t[i] = static_cast<double>((bits >> (16 * i)) & 0xffffULL);
  }
  return t;
}

double join_double(const Tensor& t) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 4; ++i) {
    bits |= static_cast<std::uint64_t>(t[i]) << (16 * i);
  }
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::map<std::string, Tensor> entries;
  for (const auto& [name, value] : ckpt.params) entries.emplace(name, value);
  for (const auto& [name, value] : ckpt.adam.m) entries.emplace(kAdamMPrefix + name, value);
  for (const auto& [name, value] : ckpt.adam.v) entries.emplace(kAdamVPrefix + name, value);
  entries.emplace(kAdamStepKey, Tensor::scalar(static_cast<double>(ckpt.adam.step)));
  entries.emplace(kBestValKey, split_double(ckpt.best_val));
  entries.emplace(kEpochKey, Tensor::scalar(static_cast<double>(ckpt.epoch)));
  entries.emplace(kConfigKey, text_tensor(config_text(ckpt.config)));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write("HGC1", 4);
  put_u32(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, tensor] : entries) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_tensor(out, tensor);
  }
  if (!out) throw FormatError("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "HGC1", 4) != 0) {
    throw FormatError("bad checkpoint magic in " + path);
  }
  std::uint32_t count = get_u32(in, path);

  Checkpoint ckpt;
  bool saw_config = false;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t name_len = get_u32(in, path);
    if (name_len > 4096) throw FormatError("oversized entry name in " + path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (in.gcount() != static_cast<std::streamsize>(name_len)) {
      throw FormatError("truncated checkpoint " + path);
    }
    Tensor tensor = read_tensor(in, path);

    if (name.rfind(kAdamMPrefix, 0) == 0) {
      ckpt.adam.m.emplace(name.substr(std::strlen(kAdamMPrefix)), std::move(tensor));
    } else if (name.rfind(kAdamVPrefix, 0) == 0) {
      ckpt.adam.v.emplace(name.substr(std::strlen(kAdamVPrefix)), std::move(tensor));
    } else if (name == kAdamStepKey) {
      ckpt.adam.step = static_cast<long>(tensor[0]);
    } else if (name == kBestValKey) {
      ckpt.best_val = join_double(tensor);
    } else if (name == kEpochKey) {
      ckpt.epoch = static_cast<int>(tensor[0]);
    } else if (name == kConfigKey) {
      ckpt.config = parse_config_text(tensor_text(tensor), path + " config");
      saw_config = true;
    } else {
      ckpt.params.add(name, std::move(tensor));
    }
  }
  if (!saw_config) throw FormatError("checkpoint " + path + " has no config entry");
  return ckpt;
}

}  // namespace higen
