#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "higen/model.hpp"

namespace higen {

// Per-example training loss. tag/sent/word carry the raw cross-entropy sums;
// reg already includes lambda_reg; total applies the remaining weights.
struct LossParts {
  Var total, tag, sent, word, reg;
  TeacherForced forward;
  std::vector<int> semantic_ids;
};

LossParts example_loss_graph(Tape& tape, const Document& doc, const ExampleInput& input,
                             const ModelVars& vars, const TrainConfig& cfg);

struct LossComponents {
  double total = 0.0, tag = 0.0, sent = 0.0, word = 0.0, reg = 0.0;
};

LossComponents example_loss(const Document& doc, const ExampleInput& input,
                            const ParameterStore& store, const TrainConfig& cfg);

// Adam with bias correction. Parameters under "encoder." update with lr_cnn,
// everything else with lr_rnn.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::map<std::string, Tensor> m, v;
};

void adam_step(ParameterStore& params, const GradientMap& grads, AdamState& state,
               const TrainConfig& cfg);
double learning_rate_for(const std::string& name, const TrainConfig& cfg);

struct EpochRow {
  int epoch = 0;
  double train_loss = 0.0, val_loss = 0.0;
  double tag = 0.0, sent = 0.0, word = 0.0, reg = 0.0;
};

void write_epoch_log(const std::string& path, const std::vector<EpochRow>& rows);

struct Checkpoint {
  ParameterStore params;
  AdamState adam;
  TrainConfig config;
  int epoch = 0;
  double best_val = 0.0;
};

// Per-example Adam training with early stopping on the mean validation loss.
// The checkpointed parameters are the f32-narrowed copy of the best epoch, so
// the recorded validation loss is reproducible after a save/load round trip.
Checkpoint train(const TrainConfig& cfg, const std::vector<Document>& train_docs,
                 const std::vector<Document>& val_docs, std::vector<EpochRow>* log = nullptr,
                 std::ostream* progress = nullptr);

// "HGC1" checkpoint file: magic, u32 entry count, then (u32 name length, name
// bytes, tensor in HGT1 format) per entry. Adam moments, the step counter,
// epoch, best validation loss and the config live under reserved "__" names.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// f32 round trip, matching what tensor serialization preserves.
Tensor narrowed(const Tensor& t);
ParameterStore narrowed_copy(const ParameterStore& store);

// Mean teacher-forced loss over a document list; NaN for an empty list.
double mean_loss(const std::vector<Document>& docs, const std::vector<ExampleInput>& inputs,
                 const ParameterStore& store, const TrainConfig& cfg);

// Drops empty sentences and clips documents to s_max sentences of t_max words.
std::vector<Document> clip_documents(const std::vector<Document>& docs, const TrainConfig& cfg);

}  // namespace higen
