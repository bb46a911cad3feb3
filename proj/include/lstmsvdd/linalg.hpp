#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lstmsvdd/types.hpp"

namespace lstmsvdd {

// Dense row-major matrix of 64-bit floats. Shape checks happen at the
// exported entry points; inner loops index raw storage.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  static Matrix identity(std::size_t n);

  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

// y = M v
Vector matvec(const Matrix& m, const Vector& v);
// y = M^T v
Vector matvec_t(const Matrix& m, const Vector& v);
// M += scale * a b^T
void add_outer(Matrix& m, const Vector& a, const Vector& b, double scale = 1.0);

// W x + U h + b, with shape checks naming the offending operand.
Vector affine(const Matrix& w, const Vector& x, const Matrix& u,
              const Vector& h, const Vector& b);

Matrix matmul(const Matrix& a, const Matrix& b);
double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);
double dist2(const Vector& a, const Vector& b);  // squared distance
void axpy(double alpha, const Vector& x, Vector& y);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

double sigmoid(double t);
double sigmoid_deriv(double t);  // sigmoid(t) * (1 - sigmoid(t))
double tanh_act(double t);
double tanh_deriv(double t);  // 1 - tanh(t)^2

// Deterministic random source. The raw stream is mt19937_64; uniform doubles
// take the top 53 bits, Gaussians come from the polar Box-Muller transform,
// and bounded integers use rejection sampling. Same seed, same stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double gaussian();

  // Uniform integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lstmsvdd
