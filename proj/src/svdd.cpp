#include "lstmsvdd/svdd.hpp"

#include <cmath>
#include <stdexcept>

#include "lstmsvdd/linalg.hpp"

namespace lstmsvdd {

namespace {

void check_sphere(const SphereParams& sphere) {
  if (sphere.center.empty())
    throw std::invalid_argument("sphere center is empty");
  if (!(sphere.radius >= 0.0))
    throw std::invalid_argument("radius must be nonnegative");
  if (!(sphere.nu > 0.0 && sphere.nu <= 1.0))
    throw std::invalid_argument("nu must be in (0, 1]");
  if (!(sphere.chi > 0.0))
    throw std::invalid_argument("chi must be positive");
}

}  // namespace

double psi(const Vector& encoding, const SphereParams& sphere) {
  return dist2(encoding, sphere.center) - sphere.radius * sphere.radius;
}

double smooth_penalty(double t, double chi) {
  const double a = chi * t;
  // For large a, ln(1 + e^a) = a + ln(1 + e^-a); keeps e^a from overflowing.
  if (a > 30.0) return t + std::log1p(std::exp(-a)) / chi;
  return std::log1p(std::exp(a)) / chi;
}

double smooth_penalty_deriv(double t, double chi) { return sigmoid(chi * t); }

double slack_exact(double t) { return t > 0.0 ? t : 0.0; }

double objective(const std::vector<Vector>& encodings,
                 const SphereParams& sphere) {
  check_sphere(sphere);
  if (encodings.empty()) throw std::invalid_argument("objective: no encodings");
  const double n = static_cast<double>(encodings.size());
  double sum = 0.0;
  for (const Vector& e : encodings)
    sum += smooth_penalty(psi(e, sphere), sphere.chi);
  return sphere.radius * sphere.radius + sum / (n * sphere.nu);
}

ObjectiveGrads objective_gradients(const std::vector<Vector>& encodings,
                                   const SphereParams& sphere) {
  check_sphere(sphere);
  if (encodings.empty())
    throw std::invalid_argument("objective_gradients: no encodings");
  const std::size_t n = encodings.size();
  const std::size_t m = sphere.center.size();
  const double scale = 1.0 / (static_cast<double>(n) * sphere.nu);

  ObjectiveGrads g;
  g.d_center.assign(m, 0.0);
  g.d_encodings.assign(n, Vector(m, 0.0));

  double sig_sum = 0.0;
  for (std::size_t idx = 0; idx < n; ++idx) {
    const Vector& e = encodings[idx];
    if (e.size() != m)
      throw std::invalid_argument("objective_gradients: encoding size mismatch");
    const double sig = smooth_penalty_deriv(psi(e, sphere), sphere.chi);
    sig_sum += sig;
    for (std::size_t k = 0; k < m; ++k) {
      const double diff = e[k] - sphere.center[k];
      g.d_encodings[idx][k] = scale * sig * 2.0 * diff;
      g.d_center[k] -= scale * sig * 2.0 * diff;
    }
  }
  g.d_radius = 2.0 * sphere.radius * (1.0 - scale * sig_sum);
  return g;
}

Score decide(const Vector& encoding, const SphereParams& sphere) {
  Score s;
  s.psi = psi(encoding, sphere);
  s.decision = s.psi > 0.0 ? -1 : 1;
  return s;
}

}  // namespace lstmsvdd
