#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "higen/gradcheck.hpp"
#include "higen/training.hpp"

using namespace higen;

namespace {

struct ToyFixture {
  TrainConfig cfg = toy_config();
  ToyExample example = make_toy_example(cfg, 42);
  ParameterStore params = init_model_params(cfg);
};

// Deterministic in-memory corpus over precomputed feature files.
struct TinyCorpus {
  TrainConfig cfg;
  std::vector<Document> docs;
  std::vector<std::string> feature_files;

  explicit TinyCorpus(int count, std::uint64_t seed) {
    cfg = toy_config();
    cfg.seed = seed;
    Rng rng(seed * 7919 + 1);
    for (int i = 0; i < count; ++i) {
      ToyExample ex = make_toy_example(cfg, seed + static_cast<std::uint64_t>(i) * 131);
      std::string path = "tiny_corpus_" + std::to_string(seed) + "_" + std::to_string(i) + ".hgt";
      write_tensor_file(path, ex.input.data);
      ex.doc.id = "doc" + std::to_string(i);
      ex.doc.feature_path = path;
      docs.push_back(ex.doc);
      feature_files.push_back(path);
    }
    (void)rng;
  }

  ~TinyCorpus() {
    for (const std::string& path : feature_files) std::remove(path.c_str());
  }
};

}  // namespace

TEST_CASE("example loss components add up") {
  ToyFixture fx;
  LossComponents parts = example_loss(fx.example.doc, fx.example.input, fx.params, fx.cfg);
  CHECK(parts.total ==
        doctest::Approx(parts.tag + parts.sent + parts.word + parts.reg).epsilon(1e-12));
  CHECK(parts.total > 0.0);

  // default loss weights are all 1.0
  TrainConfig defaults;
  CHECK(defaults.lambda_tag == 1.0);
  CHECK(defaults.lambda_sent == 1.0);
  CHECK(defaults.lambda_word == 1.0);
  CHECK(defaults.lambda_reg == 1.0);

  // all weights zero: loss vanishes
  TrainConfig zeroed = fx.cfg;
  zeroed.lambda_tag = zeroed.lambda_sent = zeroed.lambda_word = zeroed.lambda_reg = 0.0;
  LossComponents nothing = example_loss(fx.example.doc, fx.example.input, fx.params, zeroed);
  CHECK(nothing.total == 0.0);
}

TEST_CASE("full model loss matches finite differences") {
  ToyFixture fx;
  ParameterStore params = gradcheck_params(fx.cfg);
  LossBuilder f = [&fx](Tape& tape, const ParameterStore& p) {
    ModelVars vars = register_model(tape, p);
    return example_loss_graph(tape, fx.example.doc, fx.example.input, vars, fx.cfg).total;
  };
  CHECK(gradient_check(f, params, 1e-4) < 1e-3);
}

TEST_CASE("zeroing the tag weight cuts gradients to the mlc head only") {
  ToyFixture fx;
  TrainConfig cfg = fx.cfg;
  cfg.lambda_tag = 0.0;

  Tape tape;
  ModelVars vars = register_model(tape, fx.params);
  LossParts parts = example_loss_graph(tape, fx.example.doc, fx.example.input, vars, cfg);
  GradientMap grads = tape.backward(parts.total);
  fx.params.fill_missing(grads);

  // MLC parameters only reach the loss through the tag term
  for (const char* name : {"encoder.mlc.w1", "encoder.mlc.b1", "encoder.mlc.w2",
                           "encoder.mlc.b2"}) {
    const Tensor& g = grads.at(name);
    for (int i = 0; i < g.numel(); ++i) CHECK(g[i] == 0.0);
  }
  // tag embeddings still learn through semantic attention
  double embedding_norm = grads.at("encoder.tag_embedding").flat().norm();
  CHECK(embedding_norm > 0.0);
}

TEST_CASE("adam leaves parameters alone on zero gradients") {
  ToyFixture fx;
  AdamState state;
  GradientMap zeros;
  fx.params.fill_missing(zeros);

  ParameterStore before;
  for (const auto& [name, value] : fx.params) before.add(name, value);
  adam_step(fx.params, zeros, state, fx.cfg);
  CHECK(state.step == 1);
  for (const auto& [name, value] : fx.params) {
    CHECK(value == before.at(name));
  }
}

TEST_CASE("adam first step follows the bias-corrected closed form") {
  TrainConfig cfg;
  cfg.lr_rnn = 0.01;
  ParameterStore params;
  params.add("sent.w", Tensor({3}, {1.0, -2.0, 0.5}));
  GradientMap grads;
  grads.accumulate("sent.w", Tensor({3}, {0.3, -0.7, 0.0}));

  AdamState state;
  adam_step(params, grads, state, cfg);

  // after bias correction the first update is lr * g / (|g| + eps)
  Tensor expect({3}, {1.0 - 0.01 * 0.3 / (0.3 + 1e-8), -2.0 - 0.01 * -0.7 / (0.7 + 1e-8), 0.5});
  for (int i = 0; i < 3; ++i) {
    CHECK(params.at("sent.w")[i] == doctest::Approx(expect[i]).epsilon(1e-12));
  }

  // reference learning rates
  TrainConfig defaults;
  CHECK(defaults.lr_cnn == 1e-5);
  CHECK(defaults.lr_rnn == 5e-4);
  CHECK(learning_rate_for("encoder.conv1.w", defaults) == 1e-5);
  CHECK(learning_rate_for("coatt.w_v", defaults) == 5e-4);
  CHECK(learning_rate_for("word.w_out", defaults) == 5e-4);
}

TEST_CASE("training is deterministic and early stopping respects patience") {
  TinyCorpus corpus(4, 11);
  TrainConfig cfg = corpus.cfg;
  cfg.epochs = 3;
  cfg.lr_rnn = 1e-3;
  cfg.lr_cnn = 1e-3;

  std::vector<EpochRow> log_a, log_b;
  Checkpoint a = train(cfg, corpus.docs, {}, &log_a);
  Checkpoint b = train(cfg, corpus.docs, {}, &log_b);
  REQUIRE(log_a.size() == log_b.size());
  for (std::size_t i = 0; i < log_a.size(); ++i) {
    CHECK(log_a[i].train_loss == log_b[i].train_loss);
    CHECK(log_a[i].val_loss == log_b[i].val_loss);
  }

  // loss goes down on this tiny corpus
  CHECK(log_a.back().train_loss < log_a.front().train_loss);

  // patience 0 stops at the first non-improving epoch; a zero learning rate
  // freezes the parameters, so epoch 2 cannot improve on epoch 1
  TrainConfig impatient = corpus.cfg;
  impatient.epochs = 50;
  impatient.patience = 0;
  impatient.lr_rnn = 0.0;
  impatient.lr_cnn = 0.0;
  std::vector<EpochRow> log_c;
  train(impatient, corpus.docs, corpus.docs, &log_c);
  CHECK(log_c.size() == 2);

  CHECK_THROWS_AS(train(cfg, {}, {}), DomainError);
}

TEST_CASE("epochs zero checkpoints the initial parameters with an empty log") {
  TinyCorpus corpus(2, 13);
  TrainConfig cfg = corpus.cfg;
  cfg.epochs = 0;

  std::vector<EpochRow> log;
  Checkpoint ckpt = train(cfg, corpus.docs, {}, &log);
  CHECK(log.empty());
  CHECK(ckpt.epoch == 0);

  ParameterStore initial = narrowed_copy(init_model_params(cfg));
  for (const auto& [name, value] : ckpt.params) {
    CHECK(value == initial.at(name));
  }
}

TEST_CASE("checkpoints round trip bit-exactly") {
  TinyCorpus corpus(3, 17);
  TrainConfig cfg = corpus.cfg;
  cfg.epochs = 2;
  cfg.lr_rnn = 1e-3;

  std::vector<EpochRow> log;
  Checkpoint ckpt = train(cfg, corpus.docs, corpus.docs, &log);
  const char* path = "ckpt_tmp.hgc";
  save_checkpoint(path, ckpt);

  Checkpoint back = load_checkpoint(path);
  CHECK(back.epoch == ckpt.epoch);
  CHECK(back.best_val == ckpt.best_val);  // stored as a split double, exact
  CHECK(back.adam.step == ckpt.adam.step);
  CHECK(back.config.dim_h == cfg.dim_h);
  CHECK(back.config.seed == cfg.seed);
  CHECK(attention_mode_name(back.config.attention_mode) ==
        attention_mode_name(cfg.attention_mode));
  for (const auto& [name, value] : ckpt.params) {
    CHECK(back.params.at(name) == value);
  }

  // saving the loaded checkpoint reproduces the file byte for byte
  const char* path2 = "ckpt_tmp2.hgc";
  save_checkpoint(path2, back);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::stringstream b1, b2;
  b1 << f1.rdbuf();
  b2 << f2.rdbuf();
  CHECK(b1.str() == b2.str());
  CHECK(!b1.str().empty());

  // the recorded validation loss is reproducible from the loaded parameters
  std::vector<Document> clipped = clip_documents(corpus.docs, back.config);
  std::vector<ExampleInput> inputs;
  for (const Document& doc : clipped) inputs.push_back(load_example_input(doc));
  double val = mean_loss(clipped, inputs, back.params, back.config);
  CHECK(val == ckpt.best_val);

  std::remove(path);
  std::remove(path2);

  CHECK_THROWS_AS(load_checkpoint("missing.hgc"), FormatError);
}

TEST_CASE("config files parse, reject junk, and round trip") {
  const char* path = "config_tmp.txt";
  {
    std::ofstream out(path);
    out << "# comment line\n"
        << "dim_h = 32\n"
        << "lr_rnn = 0.002\n"
        << "attention_mode = semantic_only\n"
        << "use_true_tags = true\n"
        << "seed = 77\n";
  }
  TrainConfig cfg = parse_config_file(path);
  CHECK(cfg.dim_h == 32);
  CHECK(cfg.lr_rnn == 0.002);
  CHECK(cfg.attention_mode == AttentionMode::kSemanticOnly);
  CHECK(cfg.use_true_tags);
  CHECK(cfg.seed == 77);
  std::remove(path);

  CHECK_THROWS_AS(parse_config_text("nonsense_key = 3\n"), DataError);
  CHECK_THROWS_AS(parse_config_text("dim_h 32\n"), DataError);
  CHECK_THROWS_AS(parse_config_text("dim_h = soup\n"), DataError);

  TrainConfig round = parse_config_text(config_text(cfg));
  CHECK(round.dim_h == cfg.dim_h);
  CHECK(round.lr_rnn == cfg.lr_rnn);
  CHECK(round.seed == cfg.seed);
  CHECK(round.attention_mode == cfg.attention_mode);
}

TEST_CASE("clip_documents trims to the decoding limits") {
  TrainConfig cfg = toy_config();
  cfg.s_max = 2;
  cfg.t_max = 3;

  Document doc;
  doc.id = "long";
  doc.feature_path = "unused";
  doc.sentences = {{5, 6, 7, 8, 9}, {}, {10}, {11, 12}};
  std::vector<Document> clipped = clip_documents({doc}, cfg);
  REQUIRE(clipped.size() == 1);
  CHECK(clipped[0].sentences ==
        std::vector<std::vector<int>>{{5, 6, 7}, {10}});

  Document empty;
  empty.id = "empty";
  CHECK_THROWS_AS(clip_documents({empty}, cfg), DataError);
}

TEST_CASE("divergence aborts with the offending example") {
  TinyCorpus corpus(2, 19);
  TrainConfig cfg = corpus.cfg;
  cfg.epochs = 3;
  cfg.lr_rnn = 1e308;  // first update overflows
  cfg.lr_cnn = 1e308;
  CHECK_THROWS_WITH_AS(train(cfg, corpus.docs, {}), doctest::Contains("doc"), DivergenceError);
}

TEST_CASE("epoch log csv has the documented columns") {
  const char* path = "log_tmp.csv";
  write_epoch_log(path, {{1, 2.5, 2.25, 0.5, 0.25, 1.5, 0.25}});
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "epoch,train_loss,val_loss,l_tag,l_sent,l_word,l_reg");
  CHECK(row.substr(0, 2) == "1,");
  std::remove(path);
}
