#include "higen/coattention.hpp"

#include <atomic>

#include <json.hpp>

namespace higen {

namespace {
std::atomic<long> g_attention_calls{0};
}

long attention_call_count() { return g_attention_calls.load(); }
void reset_attention_call_count() { g_attention_calls.store(0); }

AttentionMode parse_attention_mode(const std::string& name) {
  if (name == "none") return AttentionMode::kNone;
  if (name == "visual_only") return AttentionMode::kVisualOnly;
  if (name == "semantic_only") return AttentionMode::kSemanticOnly;
  if (name == "co") return AttentionMode::kCo;
  throw DataError("unknown attention mode '" + name +
                  "' (expected none, visual_only, semantic_only, co)");
}

std::string attention_mode_name(AttentionMode mode) {
  switch (mode) {
    case AttentionMode::kNone: return "none";
    case AttentionMode::kVisualOnly: return "visual_only";
    case AttentionMode::kSemanticOnly: return "semantic_only";
    case AttentionMode::kCo: return "co";
  }
  throw ContractError("bad attention mode");
}

void add_coattention_params(ParameterStore& store, const CoAttentionConfig& cfg, Rng& rng) {
  store.add("coatt.w_v", uniform_init({cfg.dim_ha, cfg.dim_d}, rng));
  store.add("coatt.w_v_h", uniform_init({cfg.dim_ha, cfg.dim_h}, rng));
  store.add("coatt.w_v_att", uniform_init({1, cfg.dim_ha}, rng));
  store.add("coatt.w_a", uniform_init({cfg.dim_ha, cfg.dim_e}, rng));
  store.add("coatt.w_a_h", uniform_init({cfg.dim_ha, cfg.dim_h}, rng));
  store.add("coatt.w_a_att", uniform_init({1, cfg.dim_ha}, rng));
  store.add("coatt.w_fc", uniform_init({cfg.dim_c, cfg.dim_d + cfg.dim_e}, rng));
}

CoAttentionVars register_coattention(Tape& tape, const ParameterStore& store) {
  CoAttentionVars v;
  v.w_v = tape.leaf(store.at("coatt.w_v"), "coatt.w_v");
  v.w_v_h = tape.leaf(store.at("coatt.w_v_h"), "coatt.w_v_h");
  v.w_v_att = tape.leaf(store.at("coatt.w_v_att"), "coatt.w_v_att");
  v.w_a = tape.leaf(store.at("coatt.w_a"), "coatt.w_a");
  v.w_a_h = tape.leaf(store.at("coatt.w_a_h"), "coatt.w_a_h");
  v.w_a_att = tape.leaf(store.at("coatt.w_a_att"), "coatt.w_a_att");
  v.w_fc = tape.leaf(store.at("coatt.w_fc"), "coatt.w_fc");
  return v;
}

namespace {

// Shared attention body: rows [R x W] scored against h_prev, weights
// normalized over rows, attended = weighted row sum.
AttentionStep soft_attention(Var rows, Var h_prev, Var w_in, Var w_h, Var w_att) {
  if (rows.value().rank() != 2) {
    throw DimensionError("attention input must be rank-2, got " + rows.value().shape_str());
  }
  int n_rows = rows.value().dim(0);
  Var rows_t = transpose(rows);                            // [W x R]
  Var projected = matmul(w_in, rows_t);                    // [Ha x R]
  Var hidden_term = matmul(w_h, h_prev);                   // [Ha]
  Var activated = tanh(colwise_add(projected, hidden_term));
  Var scores = reshape(matmul(w_att, activated), {n_rows});
  Var weights = softmax(scores);
  Var attended = matmul(rows_t, weights);                  // [W]
  return {weights, attended};
}

}  // namespace

AttentionStep visual_attention(Var features, Var h_prev, const CoAttentionVars& vars) {
  ++g_attention_calls;
  return soft_attention(features, h_prev, vars.w_v, vars.w_v_h, vars.w_v_att);
}

AttentionStep semantic_attention(Var embeddings, Var h_prev, const CoAttentionVars& vars) {
  ++g_attention_calls;
  return soft_attention(embeddings, h_prev, vars.w_a, vars.w_a_h, vars.w_a_att);
}

Var joint_context(Var v_slot, Var a_slot, const CoAttentionVars& vars) {
  return matmul(vars.w_fc, concat({v_slot, a_slot}));
}

ContextResult ablation_context(AttentionMode mode, Var features, Var embeddings, Var h_prev,
                               const CoAttentionVars& vars) {
  ContextResult out;
  switch (mode) {
    case AttentionMode::kCo: {
      AttentionStep v = visual_attention(features, h_prev, vars);
      AttentionStep a = semantic_attention(embeddings, h_prev, vars);
      out.alpha = v.weights;
      out.beta = a.weights;
      out.ctx = joint_context(v.attended, a.attended, vars);
      return out;
    }
    case AttentionMode::kVisualOnly: {
      AttentionStep v = visual_attention(features, h_prev, vars);
      out.alpha = v.weights;
      out.ctx = joint_context(v.attended, mean_rows(embeddings), vars);
      return out;
    }
    case AttentionMode::kSemanticOnly: {
      AttentionStep a = semantic_attention(embeddings, h_prev, vars);
      out.beta = a.weights;
      out.ctx = joint_context(mean_rows(features), a.attended, vars);
      return out;
    }
    case AttentionMode::kNone:
      out.ctx = joint_context(mean_rows(features), mean_rows(embeddings), vars);
      return out;
  }
  throw ContractError("bad attention mode");
}

AttentionRecord make_attention_record(const std::vector<Tensor>& alpha_cols,
                                      const std::vector<Tensor>& beta_cols) {
  auto to_matrix = [](const std::vector<Tensor>& cols) -> Tensor {
    if (cols.empty()) return Tensor();
    Tensor m({cols.front().numel(), static_cast<int>(cols.size())});
    for (std::size_t s = 0; s < cols.size(); ++s) {
      if (cols[s].numel() != m.dim(0)) {
        throw DimensionError("attention columns disagree on row count");
      }
      m.matrix().col(static_cast<int>(s)) = cols[s].flat();
    }
    return m;
  };
  return AttentionRecord{to_matrix(alpha_cols), to_matrix(beta_cols)};
}

Var attention_regularizer_graph(Tape& tape, const std::vector<Var>& alpha_cols,
                                const std::vector<Var>& beta_cols, double lambda) {
  auto coverage = [](const std::vector<Var>& cols) -> Var {
    Var acc = cols.front();
    for (std::size_t s = 1; s < cols.size(); ++s) acc = add(acc, cols[s]);
    return sum(square(shift(scale(acc, -1.0), 1.0)));  // sum_rows (1 - coverage)^2
  };
  Var total;
  if (!alpha_cols.empty()) total = coverage(alpha_cols);
  if (!beta_cols.empty()) {
    Var b = coverage(beta_cols);
    total = total ? add(total, b) : b;
  }
  if (!total) return tape.leaf(Tensor::scalar(0.0));
  return scale(total, lambda);
}

double attention_regularizer(const AttentionRecord& record, double lambda) {
  auto penalty = [](const Tensor& m) -> double {
    if (m.empty()) return 0.0;
    double acc = 0.0;
    for (int r = 0; r < m.dim(0); ++r) {
      double coverage = m.matrix().row(r).sum();
      acc += (1.0 - coverage) * (1.0 - coverage);
    }
    return acc;
  };
  return lambda * (penalty(record.alpha) + penalty(record.beta));
}

std::string attention_record_json(const std::string& id, const AttentionRecord& record) {
  auto to_json = [](const Tensor& m) {
    nlohmann::json rows = nlohmann::json::array();
    if (m.empty()) return rows;
    for (int r = 0; r < m.dim(0); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < m.dim(1); ++c) row.push_back(m.at(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  nlohmann::json obj;
  obj["id"] = id;
  obj["alpha"] = to_json(record.alpha);
  obj["beta"] = to_json(record.beta);
  return obj.dump();
}

}  // namespace higen
