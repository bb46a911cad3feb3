#pragma once

#include <string>

#include "lstmsvdd/trainer.hpp"

namespace lstmsvdd {

// Self-describing JSON rendering of a trained model. The writer emits a
// fixed key order and full 17-significant-digit numbers, so identical models
// produce identical bytes and save -> load -> save round-trips exactly.
std::string model_to_json(const TrainedModel& model);

void save_model(const TrainedModel& model, const std::string& path);

TrainedModel load_model(const std::string& path);

}  // namespace lstmsvdd
