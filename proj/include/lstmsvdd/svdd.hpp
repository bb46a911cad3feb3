#pragma once

#include <cstddef>
#include <vector>

#include "lstmsvdd/types.hpp"

namespace lstmsvdd {

// Hypersphere in encoding space plus the objective's shape parameters.
struct SphereParams {
  Vector center;
  double radius = 0.0;
  double nu = 0.05;    // slack weight, in (0, 1]
  double chi = 1000.0; // sharpness of the smooth hinge
};

// Signed squared boundary offset: positive outside the sphere.
double psi(const Vector& encoding, const SphereParams& sphere);

// Smooth softplus hinge (1/chi) * ln(1 + e^(chi t)). Upper-bounds max(0, t)
// by at most ln(2)/chi and stays finite for large |chi t|.
double smooth_penalty(double t, double chi);
// d/dt of smooth_penalty; equals sigmoid(chi t).
double smooth_penalty_deriv(double t, double chi);
// The exact hinge max(0, t) the smooth version approximates.
double slack_exact(double t);

// R^2 + (1 / (n nu)) * sum_i smooth_penalty(psi_i).
double objective(const std::vector<Vector>& encodings,
                 const SphereParams& sphere);

struct ObjectiveGrads {
  double d_radius = 0.0;
  Vector d_center;
  std::vector<Vector> d_encodings;  // one per input encoding
};

ObjectiveGrads objective_gradients(const std::vector<Vector>& encodings,
                                   const SphereParams& sphere);

// Outcome of scoring one encoding. decision is +1 (normal, on or inside the
// sphere) or -1 (anomalous); boundary points count as normal.
struct Score {
  double psi = 0.0;
  int decision = 1;
};

Score decide(const Vector& encoding, const SphereParams& sphere);

}  // namespace lstmsvdd
