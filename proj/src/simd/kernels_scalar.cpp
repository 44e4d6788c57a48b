#include <cmath>

#include "detangle/simd/kernels.hpp"

namespace detangle::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void relu_scalar(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_scalar(const double* activation, double* grad, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!(activation[i] > 0.0)) grad[i] = 0.0;
}

void adam_step_scalar(double* param, const double* grad, double* m, double* v, std::size_t n,
                      const AdamCoefficients& c) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grad[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
    double m_hat = m[i] / c.bias_correction1;
    double v_hat = v[i] / c.bias_correction2;
    param[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Backend::kScalar,   dot_scalar,       axpy_scalar, relu_scalar,
                                 relu_backward_scalar, adam_step_scalar, sum_scalar};
  return table;
}

}  // namespace detangle::simd
