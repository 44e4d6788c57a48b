#pragma once

// Dense double-precision kernels used by the probe trainer and the
// statistics code. Every kernel has a portable scalar reference; an AVX2+FMA
// variant is selected at startup when the CPU supports it. Set
// DETANGLE_SIMD=scalar to force the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace detangle::simd {

enum class Backend { kScalar, kAvx2 };

std::string_view to_string(Backend backend);

struct AdamCoefficients {
  double learning_rate;
  double beta1;
  double beta2;
  double epsilon;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // x = max(x, 0)
  void (*relu)(double* x, std::size_t n);
  // grad[i] = 0 wherever activation[i] <= 0
  void (*relu_backward)(const double* activation, double* grad, std::size_t n);
  void (*adam_step)(double* param, const double* grad, double* m, double* v, std::size_t n,
                    const AdamCoefficients& c);
  double (*sum)(const double* x, std::size_t n);
};

const KernelTable& scalar_kernels();
// nullptr when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2_kernels();

bool backend_available(Backend backend);
Backend active_backend();
// Returns false (and leaves the selection unchanged) if unavailable.
bool set_backend(Backend backend);

const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void relu(std::span<double> x) { active().relu(x.data(), x.size()); }
inline void relu_backward(std::span<const double> activation, std::span<double> grad) {
  active().relu_backward(activation.data(), grad.data(), grad.size());
}
inline void adam_step(std::span<double> param, std::span<const double> grad, std::span<double> m,
                      std::span<double> v, const AdamCoefficients& c) {
  active().adam_step(param.data(), grad.data(), m.data(), v.data(), param.size(), c);
}
inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

}  // namespace detangle::simd
