#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lstmsvdd/linalg.hpp"
#include "lstmsvdd/lstm.hpp"
#include "lstmsvdd/svdd.hpp"
#include "lstmsvdd/types.hpp"

namespace lstmsvdd {

enum class BatchMode { Full, MiniBatch };

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 30;
  double chi = 1000.0;
  double nu = 0.05;
  Pooling pooling = Pooling::Mean;
  std::size_t hidden_size = 64;
  std::size_t lookback = 1;
  std::uint64_t seed = 1;
  BatchMode batch_mode = BatchMode::Full;
  std::size_t batch_size = 0;  // only read in MiniBatch mode
  double stop_tol = 1e-7;      // on |F_e - F_{e-5}|; 0 disables early stop
};

enum class ModelKind { Lstm, Ann, SvddOnly };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Identity of the feature encoding a model was trained against, so scoring
// against a differently encoded dataset can be rejected.
struct EncoderMeta {
  std::size_t input_dim = 0;
  std::uint64_t hash = 0;
};

// Single tanh hidden layer used by the feedforward baseline.
struct AnnParams {
  std::size_t hidden_size = 0;
  std::size_t input_size = 0;
  Matrix w1;
  Vector b1;

  AnnParams() = default;
  AnnParams(std::size_t hidden, std::size_t input)
      : hidden_size(hidden), input_size(input), w1(hidden, input),
        b1(hidden, 0.0) {}
};

Vector ann_encode(const Vector& x, const AnnParams& params);

struct TrainedModel {
  ModelKind kind = ModelKind::Lstm;
  LstmParams lstm;  // valid when kind == Lstm
  AnnParams ann;    // valid when kind == Ann
  SphereParams sphere;
  Pooling pooling = Pooling::Mean;
  EncoderMeta encoder;
  TrainConfig config;
  std::vector<double> training_log;  // objective before training, then one
                                     // value per completed epoch
};

// Nearest matrix with orthonormal columns (rows >= cols) or orthonormal rows
// (rows < cols): the polar factor W (W^T W)^{-1/2}, computed by symmetric
// orthogonalization.
Matrix orthonormalize(const Matrix& w);

// Replaces every gate's W and U by its polar factor and rescales every gate
// bias to unit length (a zero bias becomes the first basis vector).
void project_constraints(LstmParams& params);

// Frobenius norm of W^T W - I (or W W^T - I for wide matrices); the
// constraint residual the projection drives to zero.
double orthogonality_residual(const Matrix& w);

// Orthogonal/unit-norm random initialization, drawing from rng in a fixed
// order (gates z, i, f, o; per gate W row-major, then U, then b).
LstmParams init_lstm_params(const TrainConfig& config, std::size_t input_dim,
                            Rng& rng);

// Sphere from sample encodings: center at the mean, radius at the
// (1 - nu)-quantile of the distances to the center.
SphereParams init_sphere(const std::vector<Vector>& sample_encodings,
                         double nu, double chi);

// The two initializations composed, drawing from a fresh Rng(config.seed)
// exactly as fit does, so a fit with epochs = 0 reproduces this state. The
// sample encodings are expected to come from the same seeded LSTM init.
std::pair<LstmParams, SphereParams> init_state(
    const TrainConfig& config, std::size_t input_dim,
    const std::vector<Vector>& sample_encodings);

// Called after every completed epoch with the epoch number (1-based), the
// current parameters, and the epoch's objective value.
using EpochObserver = std::function<void(
    std::size_t epoch, const LstmParams& params, const SphereParams& sphere,
    double objective_value)>;

// Joint gradient descent on the smoothed objective over normal-only windows.
// Throws if any window is not labeled Normal or if the objective diverges.
TrainedModel fit(const std::vector<SequenceWindow>& train_windows,
                 const TrainConfig& config, const EncoderMeta& encoder = {},
                 const EpochObserver& observer = {});

// Scores windows with any model kind. SvddOnly and Ann require length-1
// windows; feature dimension must match the model's encoder metadata.
std::vector<Score> score(const TrainedModel& model,
                         const std::vector<SequenceWindow>& windows);

// Pooled encoding of one window under the model's encoder (LSTM, ANN, or
// identity for SvddOnly).
Vector encode_window(const TrainedModel& model, const SequenceWindow& window);

}  // namespace lstmsvdd
