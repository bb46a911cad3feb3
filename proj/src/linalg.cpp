#include "lstmsvdd/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace lstmsvdd {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector matvec(const Matrix& m, const Vector& v) {
  if (v.size() != m.cols)
    throw std::invalid_argument("matvec: matrix is " + std::to_string(m.rows) +
                                "x" + std::to_string(m.cols) +
                                " but vector has length " +
                                std::to_string(v.size()));
  Vector out(m.rows, 0.0);
  const double* row = m.data.data();
  for (std::size_t r = 0; r < m.rows; ++r, row += m.cols) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  return out;
}

Vector matvec_t(const Matrix& m, const Vector& v) {
  if (v.size() != m.rows)
    throw std::invalid_argument("matvec_t: matrix is " +
                                std::to_string(m.rows) + "x" +
                                std::to_string(m.cols) +
                                " but vector has length " +
                                std::to_string(v.size()));
  Vector out(m.cols, 0.0);
  const double* row = m.data.data();
  for (std::size_t r = 0; r < m.rows; ++r, row += m.cols) {
    const double vr = v[r];
    for (std::size_t c = 0; c < m.cols; ++c) out[c] += vr * row[c];
  }
  return out;
}

void add_outer(Matrix& m, const Vector& a, const Vector& b, double scale) {
  if (a.size() != m.rows || b.size() != m.cols)
    throw std::invalid_argument("add_outer: shape mismatch");
  double* row = m.data.data();
  for (std::size_t r = 0; r < m.rows; ++r, row += m.cols) {
    const double ar = scale * a[r];
    for (std::size_t c = 0; c < m.cols; ++c) row[c] += ar * b[c];
  }
}

Vector affine(const Matrix& w, const Vector& x, const Matrix& u,
              const Vector& h, const Vector& b) {
  if (x.size() != w.cols)
    throw std::invalid_argument("affine: W is " + std::to_string(w.rows) +
                                "x" + std::to_string(w.cols) +
                                " but x has length " + std::to_string(x.size()));
  if (u.rows != w.rows || u.cols != h.size())
    throw std::invalid_argument("affine: U is " + std::to_string(u.rows) +
                                "x" + std::to_string(u.cols) +
                                " but h has length " + std::to_string(h.size()) +
                                " and W has " + std::to_string(w.rows) + " rows");
  if (b.size() != w.rows)
    throw std::invalid_argument("affine: b has length " +
                                std::to_string(b.size()) + " but W has " +
                                std::to_string(w.rows) + " rows");
  Vector out = matvec(w, x);
  const double* urow = u.data.data();
  for (std::size_t r = 0; r < u.rows; ++r, urow += u.cols) {
    double acc = 0.0;
    for (std::size_t c = 0; c < u.cols; ++c) acc += urow[c] * h[c];
    out[r] += acc + b[r];
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw std::invalid_argument("matmul: " + std::to_string(a.rows) + "x" +
                                std::to_string(a.cols) + " times " +
                                std::to_string(b.rows) + "x" +
                                std::to_string(b.cols));
  Matrix out(a.rows, b.cols);
  for (std::size_t r = 0; r < a.rows; ++r)
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double av = a(r, k);
      if (av == 0.0) continue;
      for (std::size_t c = 0; c < b.cols; ++c) out(r, c) += av * b(k, c);
    }
  return out;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

double dist2(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dist2: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void axpy(double alpha, const Vector& x, Vector& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

bool all_finite(const Vector& v) {
  for (double t : v)
    if (!std::isfinite(t)) return false;
  return true;
}

bool all_finite(const Matrix& m) {
  for (double t : m.data)
    if (!std::isfinite(t)) return false;
  return true;
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double sigmoid_deriv(double t) {
  const double s = sigmoid(t);
  return s * (1.0 - s);
}

double tanh_act(double t) { return std::tanh(t); }

double tanh_deriv(double t) {
  const double th = std::tanh(t);
  return 1.0 - th * th;
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: zero bound");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

}  // namespace lstmsvdd
