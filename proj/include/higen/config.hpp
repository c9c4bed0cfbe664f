#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "higen/coattention.hpp"
#include "higen/decoder.hpp"
#include "higen/encoder.hpp"

namespace higen {

// Run configuration. Defaults follow the reference setup: 512-wide hidden
// states and embeddings, M = 10 tags, Adam at 1e-5 (encoder group) and 5e-4
// (attention/decoder group), all loss weights 1.0, stop threshold 0.5.
struct TrainConfig {
  // dims
  int dim_d = 512;
  int dim_e = 512;
  int dim_c = 512;
  int dim_k = 512;
  int dim_h = 512;
  int dim_ha = 512;
  int dim_hs = 512;
  int dim_mlc = 512;
  int num_tags = 572;    // L
  int vocab_size = 1004; // V, reserved ids included
  int grid = 14;         // N = grid^2 regions
  int top_m = 10;        // M
  int cnn_c1 = 8;
  int cnn_c2 = 16;

  // loss weights
  double lambda_tag = 1.0;
  double lambda_sent = 1.0;
  double lambda_word = 1.0;
  double lambda_reg = 1.0;

  // optimization
  double lr_cnn = 1e-5;
  double lr_rnn = 5e-4;
  int epochs = 64;
  int patience = 8;
  std::uint64_t seed = 1;

  // decoding
  double stop_threshold = 0.5;
  int s_max = 12;
  int t_max = 30;
  AttentionMode attention_mode = AttentionMode::kCo;

  // semantic features from ground-truth tags instead of predictions
  bool use_true_tags = false;

  // preprocessing
  int val_count = 500;
  int test_count = 500;
  int vocab_cap = 1000;
  int tfidf_k = 5;

  int regions() const { return grid * grid; }
  EncoderConfig encoder() const;
  CoAttentionConfig coattention() const;
  DecoderConfig decoder() const;
};

// Flat key = value text file; '#' starts a comment; keys mirror the
// TrainConfig field names; unknown keys are rejected.
TrainConfig parse_config_file(const std::string& path);
TrainConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
void apply_config_line(TrainConfig& cfg, const std::string& key, const std::string& value,
                       const std::string& origin = "<flag>");
std::string config_text(const TrainConfig& cfg);
void print_config(std::ostream& out, const TrainConfig& cfg);

}  // namespace higen
