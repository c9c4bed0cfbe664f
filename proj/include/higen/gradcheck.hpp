#pragma once

#include <functional>

#include "higen/params.hpp"
#include "higen/tape.hpp"

namespace higen {

// Builds a scalar loss from the parameters on the given tape. The builder must
// register every parameter it reads via Tape::leaf(store.at(name), name) and
// must be deterministic.
using LossBuilder = std::function<Var(Tape&, const ParameterStore&)>;

// Central-difference check of reverse-mode gradients. For every parameter
// scalar, compares the tape gradient against (f(p+eps) - f(p-eps)) / (2 eps)
// and returns the worst relative error, with denominator
// max(|analytic|, |numeric|, 1e-8).
double gradient_check(const LossBuilder& f, ParameterStore& params, double eps);

}  // namespace higen
