#include <doctest.h>

#include <cmath>

#include "higen/coattention.hpp"

using namespace higen;

namespace {

struct Fixture {
  CoAttentionConfig cfg;
  ParameterStore store;
  Tape tape;
  CoAttentionVars vars;

  explicit Fixture(std::uint64_t seed, int d = 8, int e = 8, int n_unused = 0) {
    (void)n_unused;
    cfg.dim_d = d;
    cfg.dim_e = e;
    Rng rng(seed);
    add_coattention_params(store, cfg, rng);
    vars = register_coattention(tape, store);
  }
};

Tensor random_tensor(std::vector<int> shape, Rng& rng, double bound = 1.0) {
  Tensor t(std::move(shape));
  for (int i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

TEST_CASE("single region gets all the attention") {
  Fixture fx(5);
  Rng rng(17);
  Var features = fx.tape.leaf(random_tensor({1, fx.cfg.dim_d}, rng));
  Var h = fx.tape.leaf(random_tensor({fx.cfg.dim_h}, rng));

  AttentionStep step = visual_attention(features, h, fx.vars);
  CHECK(step.weights.value()[0] == 1.0);
  for (int j = 0; j < fx.cfg.dim_d; ++j) {
    CHECK(step.attended.value()[j] == doctest::Approx(features.value().at(0, j)).epsilon(1e-15));
  }
}

TEST_CASE("identical regions share attention uniformly") {
  Fixture fx(7);
  Rng rng(19);
  Tensor one_row = random_tensor({fx.cfg.dim_d}, rng);
  Tensor features({5, fx.cfg.dim_d});
  for (int n = 0; n < 5; ++n) features.matrix().row(n) = one_row.flat().transpose();

  Var f = fx.tape.leaf(features);
  Var h = fx.tape.leaf(random_tensor({fx.cfg.dim_h}, rng));
  AttentionStep step = visual_attention(f, h, fx.vars);
  for (int n = 0; n < 5; ++n) {
    CHECK(step.weights.value()[n] == doctest::Approx(0.2).epsilon(1e-12));
  }
  for (int j = 0; j < fx.cfg.dim_d; ++j) {
    CHECK(step.attended.value()[j] == doctest::Approx(one_row[j]).epsilon(1e-12));
  }
}

// Independent re-evaluation of the attention equation with raw loops.
TEST_CASE("visual attention matches a loop-level oracle") {
  Fixture fx(11);
  Rng rng(23);
  int n = 6;
  Tensor features = random_tensor({n, fx.cfg.dim_d}, rng);
  Tensor h = random_tensor({fx.cfg.dim_h}, rng);

  Var step_f = fx.tape.leaf(features);
  Var step_h = fx.tape.leaf(h);
  AttentionStep step = visual_attention(step_f, step_h, fx.vars);

  const Tensor& wv = fx.store.at("coatt.w_v");
  const Tensor& wvh = fx.store.at("coatt.w_v_h");
  const Tensor& watt = fx.store.at("coatt.w_v_att");
  int ha = wv.dim(0);

  std::vector<double> scores(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    double score = 0.0;
    for (int a = 0; a < ha; ++a) {
      double pre = 0.0;
      for (int j = 0; j < fx.cfg.dim_d; ++j) pre += wv.at(a, j) * features.at(r, j);
      for (int j = 0; j < fx.cfg.dim_h; ++j) pre += wvh.at(a, j) * h[j];
      score += watt.at(0, a) * std::tanh(pre);
    }
    scores[static_cast<std::size_t>(r)] = score;
  }
  double max_score = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double& s : scores) {
    s = std::exp(s - max_score);
    z += s;
  }
  for (int r = 0; r < n; ++r) {
    CHECK(step.weights.value()[r] == doctest::Approx(scores[static_cast<std::size_t>(r)] / z)
                                         .epsilon(1e-12));
  }
  for (int j = 0; j < fx.cfg.dim_d; ++j) {
    double expect = 0.0;
    for (int r = 0; r < n; ++r) expect += (scores[static_cast<std::size_t>(r)] / z) * features.at(r, j);
    CHECK(step.attended.value()[j] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("semantic attention mirrors the visual branch") {
  Fixture fx(13);
  Rng rng(29);

  Var single = fx.tape.leaf(random_tensor({1, fx.cfg.dim_e}, rng));
  Var h = fx.tape.leaf(random_tensor({fx.cfg.dim_h}, rng));
  AttentionStep one = semantic_attention(single, h, fx.vars);
  CHECK(one.weights.value()[0] == 1.0);

  // zero h and zero W_a: constant logits, uniform weights regardless of rows
  fx.store.at("coatt.w_a").flat().setZero();
  Tape tape2;
  CoAttentionVars vars2 = register_coattention(tape2, fx.store);
  Var rows = tape2.leaf(random_tensor({4, fx.cfg.dim_e}, rng));
  Var zero_h = tape2.leaf(Tensor({fx.cfg.dim_h}));
  AttentionStep uniform = semantic_attention(rows, zero_h, vars2);
  for (int m = 0; m < 4; ++m) {
    CHECK(uniform.weights.value()[m] == doctest::Approx(0.25).epsilon(1e-15));
  }
}

TEST_CASE("attention weights sum to one and attended vectors stay in range") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    Fixture fx(1000 + trial);
    int n = 2 + static_cast<int>(rng.next_below(6));
    Tensor features = random_tensor({n, fx.cfg.dim_d}, rng, 2.0);
    Var f = fx.tape.leaf(features);
    Var h = fx.tape.leaf(random_tensor({fx.cfg.dim_h}, rng));
    AttentionStep step = visual_attention(f, h, fx.vars);

    CHECK(std::abs(step.weights.value().flat().sum() - 1.0) <= 1e-9);
    for (int j = 0; j < fx.cfg.dim_d; ++j) {
      double lo = features.at(0, j), hi = features.at(0, j);
      for (int r = 1; r < n; ++r) {
        lo = std::min(lo, features.at(r, j));
        hi = std::max(hi, features.at(r, j));
      }
      CHECK(step.attended.value()[j] >= lo - 1e-12);
      CHECK(step.attended.value()[j] <= hi + 1e-12);
    }
  }
}

TEST_CASE("permuting regions permutes alpha and fixes the context") {
  Fixture fx(37);
  Rng rng(41);
  int n = 5;
  Tensor features = random_tensor({n, fx.cfg.dim_d}, rng);
  Tensor h = random_tensor({fx.cfg.dim_h}, rng);

  std::vector<int> perm{3, 0, 4, 1, 2};
  Tensor permuted({n, fx.cfg.dim_d});
  for (int r = 0; r < n; ++r) {
    permuted.matrix().row(perm[static_cast<std::size_t>(r)]) = features.matrix().row(r);
  }

  AttentionStep base = visual_attention(fx.tape.leaf(features), fx.tape.leaf(h), fx.vars);
  AttentionStep moved = visual_attention(fx.tape.leaf(permuted), fx.tape.leaf(h), fx.vars);
  for (int r = 0; r < n; ++r) {
    CHECK(moved.weights.value()[perm[static_cast<std::size_t>(r)]] ==
          doctest::Approx(base.weights.value()[r]).epsilon(1e-12));
  }
  for (int j = 0; j < fx.cfg.dim_d; ++j) {
    CHECK(moved.attended.value()[j] == doctest::Approx(base.attended.value()[j]).epsilon(1e-12));
  }
}

TEST_CASE("joint context is the fused linear map") {
  Fixture fx(43);
  // identity-padded fusion returns the concatenation itself
  Tensor& w_fc = fx.store.at("coatt.w_fc");
  w_fc.flat().setZero();
  for (int i = 0; i < w_fc.dim(0) && i < w_fc.dim(1); ++i) w_fc.at(i, i) = 1.0;

  Tape tape;
  CoAttentionVars vars = register_coattention(tape, fx.store);
  Rng rng(47);
  Var v_slot = tape.leaf(random_tensor({fx.cfg.dim_d}, rng));
  Var a_slot = tape.leaf(random_tensor({fx.cfg.dim_e}, rng));
  Var ctx = joint_context(v_slot, a_slot, vars);
  REQUIRE(ctx.value().numel() == fx.cfg.dim_c);
  for (int i = 0; i < fx.cfg.dim_c; ++i) {
    CHECK(ctx.value()[i] == v_slot.value()[i]);  // C <= D here
  }

  // zero inputs give a zero context (no bias on the fusion layer)
  Var zero_ctx = joint_context(tape.leaf(Tensor({fx.cfg.dim_d})),
                               tape.leaf(Tensor({fx.cfg.dim_e})), vars);
  for (int i = 0; i < fx.cfg.dim_c; ++i) CHECK(zero_ctx.value()[i] == 0.0);
}

TEST_CASE("joint context matches a naive matrix-vector oracle") {
  Fixture fx(53);
  Rng rng(59);
  Tensor v(std::vector<int>{fx.cfg.dim_d});
  Tensor a(std::vector<int>{fx.cfg.dim_e});
  for (int i = 0; i < v.numel(); ++i) v[i] = rng.uniform(-1, 1);
  for (int i = 0; i < a.numel(); ++i) a[i] = rng.uniform(-1, 1);

  Var ctx = joint_context(fx.tape.leaf(v), fx.tape.leaf(a), fx.vars);
  const Tensor& w_fc = fx.store.at("coatt.w_fc");
  for (int i = 0; i < fx.cfg.dim_c; ++i) {
    double expect = 0.0;
    for (int j = 0; j < fx.cfg.dim_d; ++j) expect += w_fc.at(i, j) * v[j];
    for (int j = 0; j < fx.cfg.dim_e; ++j) expect += w_fc.at(i, fx.cfg.dim_d + j) * a[j];
    CHECK(ctx.value()[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("attention regularizer hand values") {
  // exact coverage: every region and tag accumulates exactly 1
  Tensor alpha({2, 2}, {0.25, 0.75, 0.75, 0.25});
  Tensor beta({2, 2}, {0.5, 0.5, 0.5, 0.5});
  CHECK(attention_regularizer(AttentionRecord{alpha, beta}, 3.0) == 0.0);

  // N=2, S=1, columns [0.5, 0.5] for both branches: four (1-0.5)^2 terms
  Tensor half({2, 1}, {0.5, 0.5});
  CHECK(attention_regularizer(AttentionRecord{half, half}, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(attention_regularizer(AttentionRecord{half, half}, 0.25) ==
        doctest::Approx(0.25).epsilon(1e-15));

  // lambda 0 kills any record
  Rng rng(61);
  Tensor messy({3, 2});
  for (int i = 0; i < messy.numel(); ++i) messy[i] = rng.next_double();
  CHECK(attention_regularizer(AttentionRecord{messy, Tensor()}, 0.0) == 0.0);

  // nonnegative, and zero iff rows sum to exactly 1
  CHECK(attention_regularizer(AttentionRecord{messy, Tensor()}, 1.0) > 0.0);
}

TEST_CASE("regularizer graph agrees with the record-level evaluation") {
  Rng rng(67);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 2 + static_cast<int>(rng.next_below(4));
    int m = 2 + static_cast<int>(rng.next_below(3));
    int s = 1 + static_cast<int>(rng.next_below(3));

    Tape tape;
    std::vector<Var> alpha_cols, beta_cols;
    std::vector<Tensor> alpha_vals, beta_vals;
    for (int step = 0; step < s; ++step) {
      Tensor a = random_tensor({n}, rng, 0.0);
      for (int i = 0; i < n; ++i) a[i] = rng.next_double();
      Tensor b(std::vector<int>{m});
      for (int i = 0; i < m; ++i) b[i] = rng.next_double();
      alpha_vals.push_back(a);
      beta_vals.push_back(b);
      alpha_cols.push_back(tape.leaf(a));
      beta_cols.push_back(tape.leaf(b));
    }
    Var graph = attention_regularizer_graph(tape, alpha_cols, beta_cols, 0.7);
    AttentionRecord record = make_attention_record(alpha_vals, beta_vals);
    CHECK(graph.value()[0] ==
          doctest::Approx(attention_regularizer(record, 0.7)).epsilon(1e-12));
  }
}

TEST_CASE("ablation modes produce contexts and respect the no-attention contract") {
  Fixture fx(71);
  Rng rng(73);
  Var features = fx.tape.leaf(random_tensor({4, fx.cfg.dim_d}, rng));
  Var embeddings = fx.tape.leaf(random_tensor({3, fx.cfg.dim_e}, rng));
  Var h = fx.tape.leaf(random_tensor({fx.cfg.dim_h}, rng));

  reset_attention_call_count();
  ContextResult none = ablation_context(AttentionMode::kNone, features, embeddings, h, fx.vars);
  CHECK(attention_call_count() == 0);
  CHECK(!none.alpha);
  CHECK(!none.beta);

  ContextResult co = ablation_context(AttentionMode::kCo, features, embeddings, h, fx.vars);
  CHECK(attention_call_count() == 2);
  CHECK(co.alpha);
  CHECK(co.beta);

  ContextResult vis =
      ablation_context(AttentionMode::kVisualOnly, features, embeddings, h, fx.vars);
  CHECK(vis.alpha);
  CHECK(!vis.beta);
  ContextResult sem =
      ablation_context(AttentionMode::kSemanticOnly, features, embeddings, h, fx.vars);
  CHECK(!sem.alpha);
  CHECK(sem.beta);

  for (const ContextResult* r : {&none, &co, &vis, &sem}) {
    CHECK(r->ctx.value().numel() == fx.cfg.dim_c);
    CHECK(r->ctx.value().all_finite());
  }
}

TEST_CASE("all modes coincide on a single region and tag") {
  Fixture fx(79);
  Rng rng(83);
  Var features = fx.tape.leaf(random_tensor({1, fx.cfg.dim_d}, rng));
  Var embeddings = fx.tape.leaf(random_tensor({1, fx.cfg.dim_e}, rng));
  Var h = fx.tape.leaf(random_tensor({fx.cfg.dim_h}, rng));

  Tensor reference;
  for (AttentionMode mode : {AttentionMode::kNone, AttentionMode::kVisualOnly,
                             AttentionMode::kSemanticOnly, AttentionMode::kCo}) {
    ContextResult r = ablation_context(mode, features, embeddings, h, fx.vars);
    if (reference.empty()) {
      reference = r.ctx.value();
    } else {
      for (int i = 0; i < reference.numel(); ++i) {
        CHECK(r.ctx.value()[i] == doctest::Approx(reference[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("attention mode names round trip") {
  for (const char* name : {"none", "visual_only", "semantic_only", "co"}) {
    CHECK(attention_mode_name(parse_attention_mode(name)) == name);
  }
  CHECK_THROWS_AS(parse_attention_mode("both"), DataError);
}

TEST_CASE("attention record export is valid json") {
  Tensor alpha({2, 1}, {0.25, 0.75});
  std::string json = attention_record_json("img1", AttentionRecord{alpha, Tensor()});
  CHECK(json.find("\"id\":\"img1\"") != std::string::npos);
  CHECK(json.find("0.75") != std::string::npos);
  CHECK(json.find("\"beta\":[]") != std::string::npos);
}
