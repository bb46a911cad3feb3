#pragma once

#include <vector>

#include "lstmsvdd/trainer.hpp"

namespace lstmsvdd {

// Sphere descent directly in record space: every window must hold exactly
// one record, which is used as its own encoding.
TrainedModel svdd_only_fit(const std::vector<SequenceWindow>& records,
                           const TrainConfig& config,
                           const EncoderMeta& encoder = {});

// Joint descent over a single tanh hidden layer and the sphere. No
// orthogonality projection: that constraint belongs to the recurrent model.
TrainedModel ann_svdd_fit(const std::vector<SequenceWindow>& records,
                          const TrainConfig& config,
                          const EncoderMeta& encoder = {});

// One batch gradient of the objective through the tanh layer: the layer
// gradients plus the sphere gradients they chain from.
struct AnnGrads {
  Matrix dw1;
  Vector db1;
  ObjectiveGrads sphere;
};

AnnGrads ann_objective_gradients(const std::vector<SequenceWindow>& records,
                                 const AnnParams& params,
                                 const SphereParams& sphere);

}  // namespace lstmsvdd
