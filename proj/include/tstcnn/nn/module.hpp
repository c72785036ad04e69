#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tstcnn/core/random.hpp"
#include "tstcnn/core/tensor.hpp"

namespace tstcnn::nn {

// train: batch statistics and cached activations for backward.
// eval: running statistics, nothing cached.
enum class Mode { train, eval };

using Index3 = std::array<std::size_t, 3>;

template <typename T>
struct Parameter {
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  explicit Parameter(Shape shape) : value(shape), grad(shape) {}

  void zero_grad() { grad.fill(T(0)); }
};

template <typename T>
struct NamedParameter {
  std::string name;
  Parameter<T>* param;
};

template <typename T>
struct NamedBuffer {
  std::string name;
  Tensor<T>* tensor;
};

/// Flat view of a module tree in definition order. Names are dotted paths.
template <typename T>
struct ParameterSet {
  std::vector<NamedParameter<T>> params;
  std::vector<NamedBuffer<T>> buffers;

  void add(const std::string& name, Parameter<T>& p) { params.push_back({name, &p}); }
  void add_buffer(const std::string& name, Tensor<T>& t) { buffers.push_back({name, &t}); }

  void zero_grad() {
    for (auto& p : params) p.param->zero_grad();
  }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params) n += p.param->value.numel();
    return n;
  }
};

inline std::string join(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

// Uniform in +-sqrt(1/fan_in).
template <typename T>
void init_uniform_fan_in(Tensor<T>& t, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(rng.uniform(-bound, bound));
}

inline void require_rank5(const Shape& s, const char* who) {
  detail::require_shape(s.rank() == 5, std::string(who) + " expects (B, C, D, H, W) input, got " +
                                           s.str());
}

}  // namespace tstcnn::nn
