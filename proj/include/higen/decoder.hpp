#pragma once

#include <optional>
#include <vector>

#include "higen/coattention.hpp"
#include "higen/params.hpp"
#include "higen/rng.hpp"
#include "higen/tape.hpp"

namespace higen {

// Single LSTM cell. Weights are stacked over the four gates in the order
// input, forget, cell, output.
struct LstmVars {
  Var wx;  // [4H x in]
  Var wh;  // [4H x H]
  Var b;   // [4H]
};

struct LstmState {
  Var h, c;
};

LstmState lstm_step(Var x, const LstmState& prev, const LstmVars& cell);

// Sentence-level decoder: LSTM over joint context vectors, a deep output
// layer for the topic, and the two-class stop head.
struct SentenceVars {
  LstmVars cell;               // input C, hidden H
  Var w_t_h, w_t_ctx;          // [K x H], [K x C]
  Var stop_w;                  // [2 x Hs]
  Var stop_prev, stop_cur;     // [Hs x H] each
};

// Word-level decoder.
struct WordVars {
  LstmVars cell;    // input K, hidden H
  Var embedding;    // [V x K]
  Var w_out;        // [V x H]
};

struct DecoderConfig {
  int dim_c = 8;
  int dim_k = 8;
  int dim_h = 8;
  int dim_hs = 8;
  int vocab_size = 20;
};

void add_decoder_params(ParameterStore& store, const DecoderConfig& cfg, Rng& rng);
SentenceVars register_sentence_decoder(Tape& tape, const ParameterStore& store);
WordVars register_word_decoder(Tape& tape, const ParameterStore& store);

// Stop distribution index order follows the paper's labels: CONTINUE first, STOP second.
inline constexpr int kContinueIndex = 0;
inline constexpr int kStopIndex = 1;

struct SentenceStep {
  LstmState state;
  Var topic;      // [K]
  Var stop_dist;  // [2]
  double p_stop() const { return stop_dist.value()[kStopIndex]; }
};

SentenceStep sentence_step(const LstmState& prev, Var ctx, const SentenceVars& vars);

struct DecodeOptions {
  bool sample = false;  // greedy argmax when false
  std::uint64_t seed = 0;
};

// Unrolls the word LSTM from a topic vector: topic, then START, then the
// emitted words. Stops at END or after t_max emitted words; END is dropped.
std::vector<int> generate_sentence(Var topic, const WordVars& vars, int t_max,
                                   const DecodeOptions& opts = {});

struct Report {
  std::vector<std::vector<int>> sentences;
  std::vector<double> stop_probs;
  bool truncated = false;  // hit s_max without a stop decision
};

struct DecodeResult {
  Report report;
  AttentionRecord attention;
};

// Full report unrolling with the stop-control threshold. The sentence whose
// step crosses the threshold is still emitted.
DecodeResult generate_report(Tape& tape, Var features, Var embeddings,
                             const CoAttentionVars& coatt, const SentenceVars& sent,
                             const WordVars& word, AttentionMode mode, int s_max, int t_max,
                             double stop_threshold, const DecodeOptions& opts = {});

// Teacher-forced unrolling over the ground-truth sentences, collecting every
// distribution the loss needs.
struct TeacherForced {
  std::vector<Var> stop_dists;                 // S entries
  std::vector<std::vector<Var>> word_dists;    // per sentence, T_s + 1 entries
  std::vector<Var> alpha_cols, beta_cols;      // per-step attention weights
  AttentionRecord attention;
};

TeacherForced teacher_forced_pass(const std::vector<std::vector<int>>& sentences, Var features,
                                  Var embeddings, const CoAttentionVars& coatt,
                                  const SentenceVars& sent, const WordVars& word,
                                  AttentionMode mode);

// JSON Lines row for a generated report, tokens resolved by the caller.
std::string report_json(const std::string& id,
                        const std::vector<std::vector<std::string>>& sentences,
                        const std::vector<double>& stop_probs, bool truncated);

}  // namespace higen
