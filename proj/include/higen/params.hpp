#pragma once

#include <map>
#include <string>
#include <vector>

#include "higen/rng.hpp"
#include "higen/tape.hpp"
#include "higen/tensor.hpp"

namespace higen {

// Named weight tensors. Map keys are sorted, so every iteration order (init,
// checkpointing, Adam) is deterministic.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, Tensor t);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  std::vector<std::string> names() const;

  // Adds zero entries for parameters the forward pass never touched.
  void fill_missing(GradientMap& grads) const;

 private:
  std::map<std::string, Tensor> params_;
};

// Uniform init in [-0.08, 0.08]; the LSTM bias helper sets the forget block to 1.
Tensor uniform_init(std::vector<int> shape, Rng& rng, double bound = 0.08);
Tensor lstm_bias_init(int hidden, Rng& rng, double bound = 0.08);

}  // namespace higen
