#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "tstcnn/core/kink_probe.hpp"
#include "tstcnn/core/tensor.hpp"

namespace tstcnn {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // coordinates whose step straddled a kink (probe active only)

  /// Keeps whichever report has the larger error.
  void merge(const GradCheckReport& other) {
    const std::size_t total = checked + other.checked, total_skipped = skipped + other.skipped;
    if (other.max_relative_error > max_relative_error) *this = other;
    checked = total;
    skipped = total_skipped;
  }

  double coverage() const {
    const std::size_t n = checked + skipped;
    return n == 0 ? 0.0 : double(checked) / double(n);
  }
};

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

/// Central-difference check of `analytic` against `value()` while perturbing `x` in
/// place. `x` is restored before returning. Suitable for parameters owned by a layer.
/// With a KinkProbe alive, coordinates whose +-epsilon evaluations take a different
/// ReLU / max-pool branch than the unperturbed point are counted as skipped.
template <typename T, typename F>
GradCheckReport check_gradients_in_place(F&& value, Tensor<T>& x, const Tensor<T>& analytic,
                                         double epsilon) {
  detail::require(epsilon > 0.0, "gradient check epsilon must be positive");
  detail::require_shape(x.shape() == analytic.shape(), "analytic gradient shape mismatch");
  GradCheckReport report;
  KinkProbe* probe = KinkProbe::active();
  std::uint64_t base_fingerprint = 0;
  if (probe) {
    probe->reset();
    value();
    base_fingerprint = probe->fingerprint();
  }
  auto differs = [&] { return probe && probe->fingerprint() != base_fingerprint; };
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const T saved = x[i];
    bool straddles = false;
    // The realized step is used as the divisor, so storage rounding of x +- epsilon
    // (relevant for float tensors) does not bias the difference quotient.
    // Differences are taken in long double so values near the 1e-8 floor survive.
    x[i] = static_cast<T>(static_cast<long double>(saved) + epsilon);
    const long double step_plus = static_cast<long double>(x[i]);
    if (probe) probe->reset();
    const long double plus = value();
    straddles = differs();
    x[i] = static_cast<T>(static_cast<long double>(saved) - epsilon);
    const long double step_minus = static_cast<long double>(x[i]);
    if (probe) probe->reset();
    const long double minus = value();
    straddles = straddles || differs();
    x[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus))
      throw NumericError("non-finite function value during gradient check at index " +
                         std::to_string(i));
    if (straddles) {
      ++report.skipped;
      continue;
    }
    const double numeric = static_cast<double>((plus - minus) / (step_plus - step_minus));
    const double a = static_cast<double>(analytic[i]);
    const double err = relative_error(a, numeric);
    if (err > report.max_relative_error || report.checked == 0) {
      report.max_relative_error = err;
      report.worst_index = i;
      report.analytic = a;
      report.numeric = numeric;
    }
    ++report.checked;
  }
  return report;
}

/// `f(x)` returns (value, gradient) as a std::pair<double, Tensor<T>>.
template <typename T, typename F>
GradCheckReport check_gradients(F&& f, Tensor<T> x, double epsilon) {
  auto [value, analytic] = f(x);
  if (!std::isfinite(value)) throw NumericError("non-finite function value");
  return check_gradients_in_place([&] { return f(x).first; }, x, analytic, epsilon);
}

}  // namespace tstcnn
