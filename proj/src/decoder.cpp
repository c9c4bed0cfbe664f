#include "higen/decoder.hpp"

#include <json.hpp>

#include "higen/corpus.hpp"

namespace higen {

void add_decoder_params(ParameterStore& store, const DecoderConfig& cfg, Rng& rng) {
  store.add("sent.lstm.wx", uniform_init({4 * cfg.dim_h, cfg.dim_c}, rng));
  store.add("sent.lstm.wh", uniform_init({4 * cfg.dim_h, cfg.dim_h}, rng));
  store.add("sent.lstm.b", lstm_bias_init(cfg.dim_h, rng));
  store.add("sent.w_t_h", uniform_init({cfg.dim_k, cfg.dim_h}, rng));
  store.add("sent.w_t_ctx", uniform_init({cfg.dim_k, cfg.dim_c}, rng));
  store.add("sent.stop.w", uniform_init({2, cfg.dim_hs}, rng));
  store.add("sent.stop.w_prev", uniform_init({cfg.dim_hs, cfg.dim_h}, rng));
  store.add("sent.stop.w_cur", uniform_init({cfg.dim_hs, cfg.dim_h}, rng));
  store.add("word.lstm.wx", uniform_init({4 * cfg.dim_h, cfg.dim_k}, rng));
  store.add("word.lstm.wh", uniform_init({4 * cfg.dim_h, cfg.dim_h}, rng));
  store.add("word.lstm.b", lstm_bias_init(cfg.dim_h, rng));
  store.add("word.embedding", uniform_init({cfg.vocab_size, cfg.dim_k}, rng));
  store.add("word.w_out", uniform_init({cfg.vocab_size, cfg.dim_h}, rng));
}

SentenceVars register_sentence_decoder(Tape& tape, const ParameterStore& store) {
  SentenceVars v;
  v.cell.wx = tape.leaf(store.at("sent.lstm.wx"), "sent.lstm.wx");
  v.cell.wh = tape.leaf(store.at("sent.lstm.wh"), "sent.lstm.wh");
  v.cell.b = tape.leaf(store.at("sent.lstm.b"), "sent.lstm.b");
  v.w_t_h = tape.leaf(store.at("sent.w_t_h"), "sent.w_t_h");
  v.w_t_ctx = tape.leaf(store.at("sent.w_t_ctx"), "sent.w_t_ctx");
  v.stop_w = tape.leaf(store.at("sent.stop.w"), "sent.stop.w");
  v.stop_prev = tape.leaf(store.at("sent.stop.w_prev"), "sent.stop.w_prev");
  v.stop_cur = tape.leaf(store.at("sent.stop.w_cur"), "sent.stop.w_cur");
  return v;
}

WordVars register_word_decoder(Tape& tape, const ParameterStore& store) {
  WordVars v;
  v.cell.wx = tape.leaf(store.at("word.lstm.wx"), "word.lstm.wx");
  v.cell.wh = tape.leaf(store.at("word.lstm.wh"), "word.lstm.wh");
  v.cell.b = tape.leaf(store.at("word.lstm.b"), "word.lstm.b");
  v.embedding = tape.leaf(store.at("word.embedding"), "word.embedding");
  v.w_out = tape.leaf(store.at("word.w_out"), "word.w_out");
  return v;
}

LstmState lstm_step(Var x, const LstmState& prev, const LstmVars& cell) {
  int hidden = prev.h.value().numel();
  Var gates = add(add(matmul(cell.wx, x), matmul(cell.wh, prev.h)), cell.b);
  Var i = sigmoid(slice(gates, 0, hidden));
  Var f = sigmoid(slice(gates, hidden, hidden));
  Var g = tanh(slice(gates, 2 * hidden, hidden));
  Var o = sigmoid(slice(gates, 3 * hidden, hidden));
  Var c = add(mul(f, prev.c), mul(i, g));
  Var h = mul(o, tanh(c));
  return {h, c};
}

SentenceStep sentence_step(const LstmState& prev, Var ctx, const SentenceVars& vars) {
  SentenceStep out;
  out.state = lstm_step(ctx, prev, vars.cell);
  out.topic = tanh(add(matmul(vars.w_t_h, out.state.h), matmul(vars.w_t_ctx, ctx)));
  Var stop_hidden = tanh(add(matmul(vars.stop_prev, prev.h), matmul(vars.stop_cur, out.state.h)));
  out.stop_dist = softmax(matmul(vars.stop_w, stop_hidden));
  return out;
}

namespace {

LstmState zero_state(Tape& tape, int hidden) {
  return {tape.leaf(Tensor({hidden})), tape.leaf(Tensor({hidden}))};
}

int pick_token(const Tensor& dist, const DecodeOptions& opts, Rng* rng) {
  if (!opts.sample) {
    int best = 0;
    for (int i = 1; i < dist.numel(); ++i) {
      if (dist[i] > dist[best]) best = i;
    }
    return best;
  }
  double u = rng->next_double();
  double acc = 0.0;
  for (int i = 0; i < dist.numel(); ++i) {
    acc += dist[i];
    if (u < acc) return i;
  }
  return dist.numel() - 1;
}

}  // namespace

std::vector<int> generate_sentence(Var topic, const WordVars& vars, int t_max,
                                   const DecodeOptions& opts) {
  if (t_max < 1) throw DomainError("generate_sentence: t_max must be >= 1");
  Tape& tape = *topic.tape;
  int hidden = vars.cell.wh.value().dim(1);
  Rng rng(opts.seed);

  LstmState state = zero_state(tape, hidden);
  state = lstm_step(topic, state, vars.cell);
  Var x = row(vars.embedding, Vocabulary::kStart);

  std::vector<int> words;
  while (static_cast<int>(words.size()) < t_max) {
    state = lstm_step(x, state, vars.cell);
    Var dist = softmax(matmul(vars.w_out, state.h));
    int token = pick_token(dist.value(), opts, &rng);
    if (token == Vocabulary::kEnd) break;
    words.push_back(token);
    x = row(vars.embedding, token);
  }
  return words;
}

DecodeResult generate_report(Tape& tape, Var features, Var embeddings,
                             const CoAttentionVars& coatt, const SentenceVars& sent,
                             const WordVars& word, AttentionMode mode, int s_max, int t_max,
                             double stop_threshold, const DecodeOptions& opts) {
  if (s_max < 1) throw DomainError("generate_report: s_max must be >= 1");
  // 0.0 is allowed and stops after the first sentence (p_stop is always positive).
  if (stop_threshold < 0.0 || stop_threshold >= 1.0) {
    throw DomainError("generate_report: stop threshold must lie in [0, 1)");
  }

  int hidden = sent.cell.wh.value().dim(1);
  LstmState state = zero_state(tape, hidden);
  std::vector<Tensor> alpha_cols, beta_cols;

  DecodeResult out;
  DecodeOptions word_opts = opts;
  for (int s = 0; s < s_max; ++s) {
    ContextResult ctx = ablation_context(mode, features, embeddings, state.h, coatt);
    SentenceStep step = sentence_step(state, ctx.ctx, sent);
    state = step.state;
    if (ctx.alpha) alpha_cols.push_back(ctx.alpha.value());
    if (ctx.beta) beta_cols.push_back(ctx.beta.value());

    word_opts.seed = opts.seed + static_cast<std::uint64_t>(s) * 0x9e3779b9ULL;
    out.report.sentences.push_back(generate_sentence(step.topic, word, t_max, word_opts));
    out.report.stop_probs.push_back(step.p_stop());

    if (step.p_stop() > stop_threshold) {
      out.report.truncated = false;
      break;
    }
    out.report.truncated = s + 1 == s_max;
  }
  out.attention = make_attention_record(alpha_cols, beta_cols);
  return out;
}

TeacherForced teacher_forced_pass(const std::vector<std::vector<int>>& sentences, Var features,
                                  Var embeddings, const CoAttentionVars& coatt,
                                  const SentenceVars& sent, const WordVars& word,
                                  AttentionMode mode) {
  if (sentences.empty()) throw DomainError("teacher_forced_pass: document has no sentences");
  Tape& tape = *features.tape;
  int sent_hidden = sent.cell.wh.value().dim(1);
  int word_hidden = word.cell.wh.value().dim(1);

  TeacherForced out;
  std::vector<Tensor> alpha_cols, beta_cols;
  LstmState state = zero_state(tape, sent_hidden);
  for (const std::vector<int>& words : sentences) {
    ContextResult ctx = ablation_context(mode, features, embeddings, state.h, coatt);
    SentenceStep step = sentence_step(state, ctx.ctx, sent);
    state = step.state;
    out.stop_dists.push_back(step.stop_dist);
    if (ctx.alpha) {
      out.alpha_cols.push_back(ctx.alpha);
      alpha_cols.push_back(ctx.alpha.value());
    }
    if (ctx.beta) {
      out.beta_cols.push_back(ctx.beta);
      beta_cols.push_back(ctx.beta.value());
    }

    // Inputs: topic, START, then the ground-truth words; predictions cover
    // every word plus the closing END, T_s + 1 distributions in total.
    LstmState wstate = zero_state(tape, word_hidden);
    wstate = lstm_step(step.topic, wstate, word.cell);
    Var x = row(word.embedding, Vocabulary::kStart);
    std::vector<Var> dists;
    for (std::size_t t = 0; t <= words.size(); ++t) {
      wstate = lstm_step(x, wstate, word.cell);
      dists.push_back(softmax(matmul(word.w_out, wstate.h)));
      if (t < words.size()) x = row(word.embedding, words[t]);
    }
    out.word_dists.push_back(std::move(dists));
  }
  out.attention = make_attention_record(alpha_cols, beta_cols);
  return out;
}

std::string report_json(const std::string& id,
                        const std::vector<std::vector<std::string>>& sentences,
                        const std::vector<double>& stop_probs, bool truncated) {
  nlohmann::json obj;
  obj["id"] = id;
  obj["sentences"] = sentences;
  obj["stop_probs"] = stop_probs;
  obj["truncated"] = truncated;
  return obj.dump();
}

}  // namespace higen
