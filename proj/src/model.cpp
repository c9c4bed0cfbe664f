#include "higen/model.hpp"

#include <algorithm>

namespace higen {

ParameterStore init_model_params(const TrainConfig& cfg) {
  Rng rng(cfg.seed);
  return init_model_params(cfg, rng);
}

ParameterStore init_model_params(const TrainConfig& cfg, Rng& rng) {
  ParameterStore store;
  add_encoder_params(store, cfg.encoder(), rng);
  add_coattention_params(store, cfg.coattention(), rng);
  add_decoder_params(store, cfg.decoder(), rng);
  return store;
}

ModelVars register_model(Tape& tape, const ParameterStore& store) {
  ModelVars vars;
  vars.enc = register_encoder(tape, store);
  vars.coatt = register_coattention(tape, store);
  vars.sent = register_sentence_decoder(tape, store);
  vars.word = register_word_decoder(tape, store);
  return vars;
}

ExampleInput load_example_input(const Document& doc) {
  if (!doc.feature_path.empty()) {
    return ExampleInput{extract_region_features(doc.feature_path).features, false};
  }
  if (!doc.image_path.empty()) {
    return ExampleInput{load_image(doc.image_path), true};
  }
  throw DataError("document '" + doc.id + "' has neither features nor image");
}

Var features_graph(Tape& tape, const ExampleInput& input, const ModelVars& vars,
                   const TrainConfig& cfg) {
  if (input.is_image) {
    return region_features_from_image(tape, input.data, vars.enc, cfg.grid);
  }
  if (input.data.rank() != 2 || input.data.dim(0) != cfg.regions() ||
      input.data.dim(1) != cfg.dim_d) {
    throw DimensionError("region features " + input.data.shape_str() + " do not match config [" +
                         std::to_string(cfg.regions()) + "x" + std::to_string(cfg.dim_d) + "]");
  }
  return tape.leaf(input.data);
}

std::vector<int> semantic_tag_ids(const Tensor& tag_probs, const Document& doc,
                                  const TrainConfig& cfg) {
  if (!cfg.use_true_tags) return top_m_tags(tag_probs, cfg.top_m);

  std::vector<int> ids;
  for (int id : doc.tag_ids) {
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    if (static_cast<int>(ids.size()) == cfg.top_m) return ids;
  }
  // Fewer ground-truth tags than M: top up with the model's own ranking.
  for (int id : top_m_tags(tag_probs, tag_probs.numel())) {
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    if (static_cast<int>(ids.size()) == cfg.top_m) break;
  }
  return ids;
}

GeneratedReport run_generation(const ExampleInput& input, const ParameterStore& store,
                               const TrainConfig& cfg, const DecodeOptions& opts) {
  Tape tape;
  ModelVars vars = register_model(tape, store);
  Var features = features_graph(tape, input, vars, cfg);
  Var tag_probs = predict_tags_graph(features, vars.enc);

  GeneratedReport out;
  out.tag_ids = top_m_tags(tag_probs.value(), cfg.top_m);
  Var embeddings = gather_tag_embeddings(vars.enc.tag_embedding, out.tag_ids);

  DecodeResult decoded =
      generate_report(tape, features, embeddings, vars.coatt, vars.sent, vars.word,
                      cfg.attention_mode, cfg.s_max, cfg.t_max, cfg.stop_threshold, opts);
  out.report = std::move(decoded.report);
  out.attention = std::move(decoded.attention);
  return out;
}

TrainConfig toy_config() {
  TrainConfig cfg;
  cfg.dim_d = 8;
  cfg.dim_e = 8;
  cfg.dim_c = 8;
  cfg.dim_k = 8;
  cfg.dim_h = 8;
  cfg.dim_ha = 8;
  cfg.dim_hs = 8;
  cfg.dim_mlc = 8;
  cfg.num_tags = 6;
  cfg.vocab_size = 20;
  cfg.grid = 2;
  cfg.top_m = 3;
  cfg.cnn_c1 = 2;
  cfg.cnn_c2 = 4;
  cfg.s_max = 4;
  cfg.t_max = 8;
  cfg.epochs = 8;
  cfg.patience = 4;
  return cfg;
}

ParameterStore gradcheck_params(const TrainConfig& cfg) {
  ParameterStore params = init_model_params(cfg);
  for (auto& [name, value] : params) {
    value.flat() *= 8.0;
    if (name == "sent.lstm.b" || name == "word.lstm.b") {
      int hidden = value.numel() / 4;
      for (int i = hidden; i < 2 * hidden; ++i) value[i] = 1.0;
    }
  }
  return params;
}

ToyExample make_toy_example(const TrainConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  ToyExample out;
  out.input.data = uniform_init({cfg.regions(), cfg.dim_d}, rng, 1.0);
  out.input.is_image = false;

  out.doc.id = "toy";
  for (int s = 0; s < 2; ++s) {
    int len = 3 + static_cast<int>(rng.next_below(3));
    std::vector<int> words;
    for (int t = 0; t < len; ++t) {
      words.push_back(Vocabulary::kReserved +
                      static_cast<int>(rng.next_below(
                          static_cast<std::uint64_t>(cfg.vocab_size - Vocabulary::kReserved))));
    }
    out.doc.sentences.push_back(std::move(words));
  }
  out.doc.tag_ids.push_back(static_cast<int>(rng.next_below(cfg.num_tags)));
  return out;
}

}  // namespace higen
