#pragma once

#include <vector>

#include "higen/config.hpp"
#include "higen/corpus.hpp"
#include "higen/decoder.hpp"

namespace higen {

// Parameter handles for the whole pipeline on one tape.
struct ModelVars {
  EncoderVars enc;
  CoAttentionVars coatt;
  SentenceVars sent;
  WordVars word;
};

// Creates every weight tensor, drawing from one seeded stream in a fixed
// order so identical configs give identical parameters.
ParameterStore init_model_params(const TrainConfig& cfg);
ParameterStore init_model_params(const TrainConfig& cfg, Rng& rng);

ModelVars register_model(Tape& tape, const ParameterStore& store);

// Per-example model input: precomputed region features or a raw pixel grid.
struct ExampleInput {
  Tensor data;
  bool is_image = false;
};

ExampleInput load_example_input(const Document& doc);

// Region-feature node: pass-through leaf for precomputed features (shape
// checked against the config) or the CNN subgraph for images.
Var features_graph(Tape& tape, const ExampleInput& input, const ModelVars& vars,
                   const TrainConfig& cfg);

// Tag ids whose embeddings become the semantic features: the model's top-M
// predictions, or the ground-truth tags (topped up with predictions) when
// use_true_tags is set.
std::vector<int> semantic_tag_ids(const Tensor& tag_probs, const Document& doc,
                                  const TrainConfig& cfg);

struct GeneratedReport {
  Report report;
  AttentionRecord attention;
  std::vector<int> tag_ids;
};

// Full inference for one input: features, tag prediction, semantic features,
// hierarchical decoding.
GeneratedReport run_generation(const ExampleInput& input, const ParameterStore& store,
                               const TrainConfig& cfg, const DecodeOptions& opts = {});

// Small deterministic instance used by the gradcheck command and the tests:
// 4 regions of width 8, 6 tags, a 20-word vocabulary, M = 3.
TrainConfig toy_config();

struct ToyExample {
  Document doc;
  ExampleInput input;
};

ToyExample make_toy_example(const TrainConfig& cfg, std::uint64_t seed);

// Parameter draw for the finite-difference self-check. The training init
// leaves some deep-chain gradients near 1e-12, where central differences at
// eps 1e-4 measure only rounding noise against the checker's 1e-8 floor; a
// wider draw keeps every gradient clear of that band.
ParameterStore gradcheck_params(const TrainConfig& cfg);

}  // namespace higen
