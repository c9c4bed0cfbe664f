#include "higen/params.hpp"

namespace higen {

Tensor& ParameterStore::add(const std::string& name, Tensor t) {
  auto [it, inserted] = params_.emplace(name, std::move(t));
  if (!inserted) throw ContractError("duplicate parameter " + name);
  return it->second;
}

Tensor& ParameterStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("unknown parameter " + name);
  return it->second;
}

const Tensor& ParameterStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("unknown parameter " + name);
  return it->second;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, value] : params_) out.push_back(name);
  return out;
}

void ParameterStore::fill_missing(GradientMap& grads) const {
  for (const auto& [name, value] : params_) {
    if (!grads.contains(name)) grads.insert_zeros(name, value.shape());
  }
}

Tensor uniform_init(std::vector<int> shape, Rng& rng, double bound) {
  Tensor t(std::move(shape));
  for (int i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

Tensor lstm_bias_init(int hidden, Rng& rng, double bound) {
  Tensor b = uniform_init({4 * hidden}, rng, bound);
  // Gate order is input, forget, cell, output; forget biases start at 1.
  for (int i = hidden; i < 2 * hidden; ++i) b[i] = 1.0;
  return b;
}

}  // namespace higen
