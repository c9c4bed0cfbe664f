#pragma once

#include <string>
#include <vector>

#include "higen/params.hpp"
#include "higen/tape.hpp"

namespace higen {

enum class AttentionMode {
  kNone,
  kVisualOnly,
  kSemanticOnly,
  kCo,
};

AttentionMode parse_attention_mode(const std::string& name);
std::string attention_mode_name(AttentionMode mode);

// Weights of the visual and semantic attention branches plus the fusion layer.
// The score layers carry no bias terms.
struct CoAttentionVars {
  Var w_v, w_v_h, w_v_att;  // [Ha x D], [Ha x H], [1 x Ha]
  Var w_a, w_a_h, w_a_att;  // [Ha x E], [Ha x H], [1 x Ha]
  Var w_fc;                 // [C x (D+E)]
};

struct CoAttentionConfig {
  int dim_d = 8;
  int dim_e = 8;
  int dim_c = 8;
  int dim_h = 8;
  int dim_ha = 8;
};

void add_coattention_params(ParameterStore& store, const CoAttentionConfig& cfg, Rng& rng);
CoAttentionVars register_coattention(Tape& tape, const ParameterStore& store);

struct AttentionStep {
  Var weights;   // [N] or [M], sums to 1
  Var attended;  // weighted sum of the rows
};

// Soft attention over region features [N x D] given the previous sentence
// hidden state. Instrumented: bumps the attention call counter.
AttentionStep visual_attention(Var features, Var h_prev, const CoAttentionVars& vars);

// Mirror of visual_attention over the tag embeddings [M x E].
AttentionStep semantic_attention(Var embeddings, Var h_prev, const CoAttentionVars& vars);

// ctx = W_fc [v_slot ; a_slot]; no bias.
Var joint_context(Var v_slot, Var a_slot, const CoAttentionVars& vars);

struct ContextResult {
  Var ctx;
  Var alpha;  // unset when the mode skips visual attention
  Var beta;   // unset when the mode skips semantic attention
};

// Mode-dependent context: co-attention, one attended branch with the other
// replaced by its unweighted mean, or both means. Mode kNone performs no
// attention calls at all.
ContextResult ablation_context(AttentionMode mode, Var features, Var embeddings, Var h_prev,
                               const CoAttentionVars& vars);

// Per-step attention weights collected over a report.
struct AttentionRecord {
  Tensor alpha;  // [N x S]; empty when the mode had no visual attention
  Tensor beta;   // [M x S]
};

AttentionRecord make_attention_record(const std::vector<Tensor>& alpha_cols,
                                      const std::vector<Tensor>& beta_cols);

// Coverage penalty: lambda * [sum_n (1 - sum_s alpha_ns)^2 + sum_m (1 - sum_s beta_ms)^2].
// Branches without recorded steps contribute nothing.
Var attention_regularizer_graph(Tape& tape, const std::vector<Var>& alpha_cols,
                                const std::vector<Var>& beta_cols, double lambda);
double attention_regularizer(const AttentionRecord& record, double lambda);

std::string attention_record_json(const std::string& id, const AttentionRecord& record);

// Test hooks for the no-attention ablation contract.
long attention_call_count();
void reset_attention_call_count();

}  // namespace higen
