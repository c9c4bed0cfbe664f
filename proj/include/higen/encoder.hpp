#pragma once

#include <string>
#include <vector>

#include "higen/params.hpp"
#include "higen/tape.hpp"

namespace higen {

// N region vectors of width D for one image.
struct RegionFeatureMap {
  Tensor features;  // [N x D]
  int regions() const { return features.dim(0); }
  int dim() const { return features.dim(1); }
};

struct TagDistribution {
  Tensor probs;  // [L]
};

// Embeddings of the M most likely tags, rows in probability order.
struct SemanticFeatureSet {
  Tensor embeddings;  // [M x E]
  std::vector<int> tag_ids;
};

// Parameter handles for the encoder: two conv+tanh+pool stages over a
// grayscale grid, a linear projection to D per region, the two-layer MLC
// head, and the tag embedding table.
struct EncoderVars {
  Var conv1_w, conv1_b;
  Var conv2_w, conv2_b;
  Var proj_w;           // [D x C2]
  Var mlc_w1, mlc_b1;   // [MLC x N*D], [MLC]
  Var mlc_w2, mlc_b2;   // [L x MLC], [L]
  Var tag_embedding;    // [L x E]
};

struct EncoderConfig {
  int grid = 2;       // regions per side; N = grid * grid
  int dim_d = 8;      // region feature width
  int dim_e = 8;      // tag embedding width
  int dim_mlc = 8;    // MLC hidden width
  int num_tags = 6;   // L
  int cnn_c1 = 4;
  int cnn_c2 = 8;
  int kernel = 3;
};

// Parameter names under the "encoder." prefix (the lr_cnn group).
void add_encoder_params(ParameterStore& store, const EncoderConfig& cfg, Rng& rng);
EncoderVars register_encoder(Tape& tape, const ParameterStore& store);

// CNN feature path: image [H x W] -> [N x D]. Spatial dims must be divisible
// by 4 * grid (two 2x2 pools, then the region grid).
Var region_features_from_image(Tape& tape, const Tensor& image, const EncoderVars& vars, int grid);

// Eq-1 head: region features -> softmax distribution over L tags.
Var predict_tags_graph(Var features, const EncoderVars& vars);

// Ground-truth tag distribution l / ||l||_1. l must be binary with >= 1 one.
Tensor tag_target(const Tensor& binary_tags);

// Ids of the m largest probabilities; ties prefer the lower tag id.
std::vector<int> top_m_tags(const Tensor& probs, int m);

// Gathered embedding rows for the given tag ids, as a stacked [M x E] node.
Var gather_tag_embeddings(Var tag_embedding, const std::vector<int>& tag_ids);

// --- value-level entry points -------------------------------------------------

// Loads a region-feature file ("HGT1", shape [N x D]) or runs the CNN over a
// pixel grid. Exactly one of feature_path/image must be provided.
RegionFeatureMap extract_region_features(const std::string& feature_path);
RegionFeatureMap extract_region_features(const Tensor& image, const ParameterStore& store,
                                         const EncoderConfig& cfg);

TagDistribution predict_tags(const RegionFeatureMap& features, const ParameterStore& store,
                             const EncoderConfig& cfg);

SemanticFeatureSet top_m_semantic_features(const TagDistribution& dist,
                                           const ParameterStore& store, int m);

// Grayscale image loading: PGM (P2/P5, maxval <= 255, scaled to [0,1]) or an
// "HGT1" rank-2 tensor used as the pixel grid directly.
Tensor load_image(const std::string& path);

}  // namespace higen
