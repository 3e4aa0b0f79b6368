#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "apr/num/param_store.hpp"

namespace apr::num {

/// Evaluates a loss at the store's current values. When `with_grad` is set it must
/// also accumulate d(loss)/d(param) into the store's gradients.
using LossFn = std::function<Scalar(ParamStore& store, bool with_grad)>;

struct GradCheckReport {
  Scalar max_rel_error = 0.0;
  std::string worst_param;
  Index worst_row = 0;
  Index worst_col = 0;
  Scalar worst_analytic = 0.0;
  Scalar worst_numeric = 0.0;
  std::size_t coordinates = 0;
};

enum class Difference {
  central,  // (L(x + eps) - L(x - eps)) / 2 eps
  ridders,  // central differences extrapolated to zero step, starting at step eps
};

struct GradCheckOptions {
  Scalar eps = 1e-5;
  Difference method = Difference::central;
  std::size_t samples_per_tensor = 0;  // 0 checks every coordinate
  std::uint64_t seed = 0;
};

/// Compares analytic gradients with numeric ones on sampled coordinates. The relative
/// error of a coordinate is |a - n| / max(|a|, |n|, 1e-8). Gradients are left zeroed
/// and values restored on return.
GradCheckReport gradient_check(ParamStore& store, const LossFn& loss, const GradCheckOptions& options = {});

/// Ridders' polynomial extrapolation of central differences of f at step h, h/1.4, ...
/// Returns the estimate with the smallest internal error.
Scalar ridders_derivative(const std::function<Scalar(Scalar)>& f, Scalar x, Scalar h);

}  // namespace apr::num
