#include "higen/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace higen {

namespace {

double evaluate(const LossBuilder& f, const ParameterStore& params) {
  Tape tape;
  Var loss = f(tape, params);
  if (loss.value().numel() != 1) {
    throw ContractError("gradient_check: loss must be scalar, got " + loss.value().shape_str());
  }
  return loss.value()[0];
}

}  // namespace

double gradient_check(const LossBuilder& f, ParameterStore& params, double eps) {
  if (eps <= 0.0) throw DomainError("gradient_check: eps must be positive");

  Tape tape;
  Var loss = f(tape, params);
  if (loss.value().numel() != 1) {
    throw ContractError("gradient_check: loss must be scalar, got " + loss.value().shape_str());
  }
  GradientMap grads = tape.backward(loss);
  params.fill_missing(grads);

  double worst = 0.0;
  for (auto& [name, value] : params) {
    const Tensor& analytic = grads.at(name);
    for (int i = 0; i < value.numel(); ++i) {
      double saved = value[i];
      value[i] = saved + eps;
      double plus = evaluate(f, params);
      value[i] = saved - eps;
      double minus = evaluate(f, params);
      value[i] = saved;

      double numeric = (plus - minus) / (2.0 * eps);
      double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace higen
