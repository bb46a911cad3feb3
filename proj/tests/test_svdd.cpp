#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "lstmsvdd/linalg.hpp"
#include "lstmsvdd/svdd.hpp"
#include "oracles.hpp"

using namespace lstmsvdd;

namespace {

SphereParams make_sphere(Vector center, double radius, double nu, double chi) {
  SphereParams s;
  s.center = std::move(center);
  s.radius = radius;
  s.nu = nu;
  s.chi = chi;
  return s;
}

}  // namespace

TEST_CASE("psi hand cases") {
  CHECK(psi(Vector{1, 2}, make_sphere({1, 2}, 2.0, 0.5, 10)) ==
        doctest::Approx(-4.0));
  CHECK(psi(Vector{3, 4}, make_sphere({0, 0}, 5.0, 0.5, 10)) ==
        doctest::Approx(0.0));
  CHECK(psi(Vector{1, 1}, make_sphere({0, 0}, 1.0, 0.5, 10)) ==
        doctest::Approx(1.0));
}

TEST_CASE("smooth penalty values") {
  CHECK(smooth_penalty(0.0, 10.0) == doctest::Approx(std::log(2.0) / 10.0));
  CHECK(smooth_penalty(100.0, 10.0) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(smooth_penalty_deriv(0.0, 1.0) == doctest::Approx(0.5));
  CHECK(smooth_penalty_deriv(0.0, 1000.0) == doctest::Approx(0.5));
}

TEST_CASE("smooth penalty survives extreme arguments") {
  CHECK(std::isfinite(smooth_penalty(1000.0, 1000.0)));
  CHECK(smooth_penalty(1000.0, 1000.0) == doctest::Approx(1000.0));
  CHECK(std::isfinite(smooth_penalty(-1000.0, 1000.0)));
  CHECK(smooth_penalty(-1000.0, 1000.0) >= 0.0);
}

TEST_CASE("smooth penalty bounds the exact hinge") {
  for (double chi : {1.0, 10.0, 100.0, 1000.0}) {
    for (double t = -10.0; t <= 10.0; t += 0.25) {
      const double gap = smooth_penalty(t, chi) - slack_exact(t);
      CHECK(gap >= 0.0);
      CHECK(gap <= std::log(2.0) / chi + 1e-15);
    }
  }
}

TEST_CASE("smooth penalty decreases as chi grows") {
  for (double t = -10.0; t <= 10.0; t += 0.25) {
    CHECK(smooth_penalty(t, 10.0) <= smooth_penalty(t, 1.0) + 1e-15);
    CHECK(smooth_penalty(t, 100.0) <= smooth_penalty(t, 10.0) + 1e-15);
    CHECK(smooth_penalty(t, 1000.0) <= smooth_penalty(t, 100.0) + 1e-15);
  }
}

TEST_CASE("smooth penalty derivative matches finite differences") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const double t = -2.0 + 4.0 * rng.uniform();
    const double chi = 1.0 + 9.0 * rng.uniform();
    const double h = 1e-6;
    const double fd =
        (smooth_penalty(t + h, chi) - smooth_penalty(t - h, chi)) / (2 * h);
    CHECK(oracles::rel_err(smooth_penalty_deriv(t, chi), fd) <= 1e-5);
  }
}

TEST_CASE("slack hinge") {
  CHECK(slack_exact(-3.0) == 0.0);
  CHECK(slack_exact(0.0) == 0.0);
  CHECK(slack_exact(2.5) == 2.5);
}

TEST_CASE("objective with interior points is close to R^2") {
  std::vector<Vector> encodings(4, Vector{0.5, -0.5});
  const SphereParams s = make_sphere({0.5, -0.5}, 1.0, 0.5, 1000.0);
  CHECK(objective(encodings, s) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("objective with one boundary point") {
  std::vector<Vector> encodings = {Vector{1.0, 0.0}};
  const SphereParams s = make_sphere({0.0, 0.0}, 1.0, 1.0, 10.0);
  CHECK(objective(encodings, s) ==
        doctest::Approx(1.0 + std::log(2.0) / 10.0));
}

TEST_CASE("objective matches independent summation oracle") {
  Rng rng(3);
  const std::size_t n = 8, m = 4;
  std::vector<Vector> encodings(n, Vector(m));
  for (Vector& e : encodings)
    for (double& v : e) v = rng.gaussian();
  Vector center(m);
  for (double& v : center) v = 0.3 * rng.gaussian();
  for (double chi : {1.0, 10.0, 50.0}) {
    const SphereParams s = make_sphere(center, 1.2, 0.4, chi);
    const double expected =
        oracles::objective_sum(encodings, center, 1.2, 0.4, chi);
    CHECK(objective(encodings, s) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("objective never dips below R^2") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    const std::size_t m = 2 + rng.below(3);
    std::vector<Vector> encodings(n, Vector(m));
    for (Vector& e : encodings)
      for (double& v : e) v = rng.gaussian();
    Vector center(m);
    for (double& v : center) v = rng.gaussian();
    const double radius = 2.0 * rng.uniform();
    const SphereParams s =
        make_sphere(center, radius, 0.1 + 0.9 * rng.uniform(), 10.0);
    CHECK(objective(encodings, s) >= radius * radius);
  }
}

TEST_CASE("gradient of saturated interior point") {
  std::vector<Vector> encodings = {Vector{0.0, 0.0, 0.0}};
  const SphereParams s = make_sphere({0.0, 0.0, 0.0}, 1.0, 1.0, 100.0);
  const ObjectiveGrads g = objective_gradients(encodings, s);
  CHECK(g.d_radius == doctest::Approx(2.0).epsilon(1e-10));
  for (double v : g.d_center) CHECK(std::fabs(v) <= 1e-12);
}

TEST_CASE("symmetric pair cancels the center gradient") {
  std::vector<Vector> encodings = {Vector{1.0, 0.0}, Vector{-1.0, 0.0}};
  const SphereParams s = make_sphere({0.0, 0.0}, 0.9, 0.5, 5.0);
  const ObjectiveGrads g = objective_gradients(encodings, s);
  for (double v : g.d_center) CHECK(std::fabs(v) <= 1e-12);
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    const std::size_t m = 2 + rng.below(4);
    std::vector<Vector> encodings(n, Vector(m));
    for (Vector& e : encodings)
      for (double& v : e) v = rng.gaussian() * 0.6;
    SphereParams s;
    s.center.resize(m);
    for (double& v : s.center) v = rng.gaussian() * 0.2;
    s.radius = 0.5 + rng.uniform();
    s.nu = 0.2 + 0.6 * rng.uniform();
    s.chi = 2.0 + 8.0 * rng.uniform();

    const ObjectiveGrads g = objective_gradients(encodings, s);
    auto f = [&]() { return objective(encodings, s); };
    const double step = 1e-6;

    CHECK(oracles::rel_err(g.d_radius,
                           oracles::central_diff(f, &s.radius, step)) <= 1e-5);
    for (std::size_t k = 0; k < m; ++k)
      CHECK(oracles::rel_err(
                g.d_center[k],
                oracles::central_diff(f, &s.center[k], step)) <= 1e-5);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < m; ++k)
        CHECK(oracles::rel_err(
                  g.d_encodings[i][k],
                  oracles::central_diff(f, &encodings[i][k], step)) <= 1e-5);
  }
}

TEST_CASE("decide sign convention") {
  const SphereParams s = make_sphere({0.0, 0.0}, 1.0, 0.5, 10.0);
  CHECK(decide(Vector{0.0, 0.0}, s).decision == 1);
  CHECK(decide(Vector{2.0, 0.0}, s).decision == -1);
  CHECK(decide(Vector{1.0, 0.0}, s).decision == 1);  // exactly on boundary
  CHECK(decide(Vector{1.0, 0.0}, s).psi == doctest::Approx(0.0));
}

TEST_CASE("decision agrees with psi sign for random points") {
  Rng rng(41);
  const SphereParams s = make_sphere({0.2, -0.1, 0.4}, 0.8, 0.5, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vector p(3);
    for (double& v : p) v = rng.gaussian();
    const Score sc = decide(p, s);
    CHECK(sc.decision == (psi(p, s) <= 0.0 ? 1 : -1));
  }
}

TEST_CASE("objective input validation") {
  const SphereParams good = make_sphere({0.0}, 1.0, 0.5, 10.0);
  CHECK_THROWS_AS(objective({}, good), std::invalid_argument);

  SphereParams bad_nu = good;
  bad_nu.nu = 0.0;
  CHECK_THROWS_AS(objective({Vector{0.0}}, bad_nu), std::invalid_argument);
  bad_nu.nu = 1.5;
  CHECK_THROWS_AS(objective({Vector{0.0}}, bad_nu), std::invalid_argument);

  SphereParams bad_chi = good;
  bad_chi.chi = 0.0;
  CHECK_THROWS_AS(objective({Vector{0.0}}, bad_chi), std::invalid_argument);

  SphereParams bad_r = good;
  bad_r.radius = -0.1;
  CHECK_THROWS_AS(objective({Vector{0.0}}, bad_r), std::invalid_argument);

  CHECK_THROWS_AS(objective_gradients({Vector{0.0, 1.0}}, good),
                  std::invalid_argument);
}
