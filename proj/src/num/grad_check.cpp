#include "apr/num/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "apr/error.hpp"

namespace apr::num {

namespace {

Scalar evaluate(ParamStore& store, const LossFn& loss, bool with_grad) {
  const Scalar v = loss(store, with_grad);
  if (!std::isfinite(v)) throw NumericError("gradient check: loss evaluated to a non-finite value");
  return v;
}

}  // namespace

Scalar ridders_derivative(const std::function<Scalar(Scalar)>& f, Scalar x, Scalar h) {
  constexpr int kTable = 10;
  constexpr Scalar kShrink = 1.4;
  constexpr Scalar kShrink2 = kShrink * kShrink;
  constexpr Scalar kSafe = 2.0;
  if (!(h > 0.0)) throw ContractError("Ridders step must be positive");
  Scalar a[kTable][kTable];
  Scalar err = std::numeric_limits<Scalar>::max();
  a[0][0] = (f(x + h) - f(x - h)) / (2.0 * h);
  Scalar best = a[0][0];
  for (int i = 1; i < kTable; ++i) {
    h /= kShrink;
    a[0][i] = (f(x + h) - f(x - h)) / (2.0 * h);
    Scalar fac = kShrink2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= kShrink2;
      const Scalar e = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
      if (e <= err) {
        err = e;
        best = a[j][i];
      }
    }
    if (std::abs(a[i][i] - a[i - 1][i - 1]) >= kSafe * err) break;
  }
  return best;
}

GradCheckReport gradient_check(ParamStore& store, const LossFn& loss, const GradCheckOptions& options) {
  const Scalar eps = options.eps;
  const std::size_t samples_per_tensor = options.samples_per_tensor;
  if (!(eps > 0.0)) throw ContractError("gradient check step must be positive");
  store.zero_grad();
  evaluate(store, loss, true);
  std::vector<Tensor> analytic;
  for (std::uint32_t i = 0; i < store.size(); ++i) analytic.push_back(store.grad(ParamId{i}));
  store.zero_grad();

  std::mt19937_64 rng(options.seed);
  GradCheckReport report;
  report.max_rel_error = -1.0;
  for (std::uint32_t i = 0; i < store.size(); ++i) {
    const ParamId id{i};
    auto& value = store.value(id);
    const auto n = static_cast<std::size_t>(value.size());
    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (samples_per_tensor != 0 && samples_per_tensor < n) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(samples_per_tensor);
      std::sort(coords.begin(), coords.end());
    }
    for (const auto flat : coords) {
      const Index r = static_cast<Index>(flat) / value.cols();
      const Index c = static_cast<Index>(flat) % value.cols();
      const Scalar saved = value(r, c);
      auto at = [&](Scalar x) {
        value(r, c) = x;
        return evaluate(store, loss, false);
      };
      Scalar numeric;
      if (options.method == Difference::ridders) {
        numeric = ridders_derivative(at, saved, eps);
      } else {
        numeric = (at(saved + eps) - at(saved - eps)) / (2.0 * eps);
      }
      value(r, c) = saved;
      const Scalar a = analytic[i](r, c);
      const Scalar rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      ++report.coordinates;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = store.name(id);
        report.worst_row = r;
        report.worst_col = c;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  if (report.max_rel_error < 0.0) report.max_rel_error = 0.0;
  store.zero_grad();
  return report;
}

}  // namespace apr::num
