#include "lstmsvdd/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lstmsvdd {

namespace {

std::size_t check_records(const std::vector<SequenceWindow>& records,
                          const char* who) {
  if (records.empty())
    throw std::invalid_argument(std::string(who) + ": no training records");
  const std::size_t p = records.front().feature_dim();
  for (const SequenceWindow& w : records) {
    if (w.label != ClassLabel::Normal)
      throw std::invalid_argument(
          std::string(who) + ": window " + std::to_string(w.id) +
          " is not labeled normal; one-class training takes normal data only");
    if (w.length() != 1)
      throw std::invalid_argument(std::string(who) +
                                  ": expects single-record windows");
    if (w.feature_dim() != p)
      throw std::invalid_argument(std::string(who) +
                                  ": records disagree on feature dimension");
  }
  return p;
}

bool should_stop(const std::vector<double>& log, double stop_tol) {
  const std::size_t n = log.size();
  return stop_tol > 0.0 && n >= 6 && std::fabs(log[n - 1] - log[n - 6]) < stop_tol;
}

void check_objective_finite(double f, std::size_t epoch) {
  if (!std::isfinite(f))
    throw std::runtime_error("training diverged, objective non-finite at "
                             "epoch " + std::to_string(epoch));
}

}  // namespace

TrainedModel svdd_only_fit(const std::vector<SequenceWindow>& records,
                           const TrainConfig& config,
                           const EncoderMeta& encoder) {
  const std::size_t p = check_records(records, "svdd_only_fit");
  if (encoder.input_dim != 0 && encoder.input_dim != p)
    throw std::invalid_argument("svdd_only_fit: encoder metadata dimension "
                                "mismatch");
  if (config.batch_mode == BatchMode::MiniBatch && config.batch_size == 0)
    throw std::invalid_argument("batch_size must be positive in minibatch mode");

  const std::size_t n = records.size();
  std::vector<Vector> encodings;
  encodings.reserve(n);
  for (const SequenceWindow& w : records) encodings.push_back(w.steps.front());

  SphereParams sphere = init_sphere(encodings, config.nu, config.chi);

  TrainedModel model;
  model.kind = ModelKind::SvddOnly;
  model.pooling = config.pooling;
  model.encoder = encoder;
  model.encoder.input_dim = p;
  model.config = config;
  model.training_log.push_back(objective(encodings, sphere));
  check_objective_finite(model.training_log.back(), 0);

  Rng rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const double lr = config.learning_rate;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::size_t batch_size =
        config.batch_mode == BatchMode::Full ? n : config.batch_size;
    if (config.batch_mode == BatchMode::MiniBatch) {
      for (std::size_t i = n; i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);
    }

    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t count = std::min(batch_size, n - start);
      std::vector<Vector> batch(count);
      for (std::size_t k = 0; k < count; ++k)
        batch[k] = encodings[order[start + k]];
      const ObjectiveGrads g = objective_gradients(batch, sphere);
      axpy(-lr, g.d_center, sphere.center);
      sphere.radius = std::max(0.0, sphere.radius - lr * g.d_radius);
    }

    const double f = objective(encodings, sphere);
    check_objective_finite(f, epoch);
    model.training_log.push_back(f);
    if (should_stop(model.training_log, config.stop_tol)) break;
  }

  model.sphere = std::move(sphere);
  return model;
}

AnnGrads ann_objective_gradients(const std::vector<SequenceWindow>& records,
                                 const AnnParams& params,
                                 const SphereParams& sphere) {
  const std::size_t count = records.size();
  const std::size_t m = params.hidden_size;
  std::vector<Vector> batch(count);
  for (std::size_t k = 0; k < count; ++k)
    batch[k] = ann_encode(records[k].steps.front(), params);

  AnnGrads out{Matrix(m, params.input_size), Vector(m, 0.0),
               objective_gradients(batch, sphere)};
  Vector da(m);
  for (std::size_t k = 0; k < count; ++k) {
    const Vector& x = records[k].steps.front();
    const Vector& h = batch[k];
    for (std::size_t r = 0; r < m; ++r)
      da[r] = out.sphere.d_encodings[k][r] * (1.0 - h[r] * h[r]);
    add_outer(out.dw1, da, x);
    axpy(1.0, da, out.db1);
  }
  return out;
}

TrainedModel ann_svdd_fit(const std::vector<SequenceWindow>& records,
                          const TrainConfig& config,
                          const EncoderMeta& encoder) {
  const std::size_t p = check_records(records, "ann_svdd_fit");
  if (encoder.input_dim != 0 && encoder.input_dim != p)
    throw std::invalid_argument("ann_svdd_fit: encoder metadata dimension "
                                "mismatch");
  if (config.hidden_size == 0)
    throw std::invalid_argument("hidden_size must be positive");
  if (!(config.learning_rate > 0.0))
    throw std::invalid_argument("learning_rate must be positive");
  if (config.batch_mode == BatchMode::MiniBatch && config.batch_size == 0)
    throw std::invalid_argument("batch_size must be positive in minibatch mode");

  const std::size_t n = records.size();
  const std::size_t m = config.hidden_size;

  Rng rng(config.seed);
  AnnParams params(m, p);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));
  for (double& v : params.w1.data) v = scale * rng.gaussian();

  auto encode_record = [&params](const SequenceWindow& w) {
    return ann_encode(w.steps.front(), params);
  };
  auto encode_everything = [&]() {
    std::vector<Vector> out;
    out.reserve(n);
    for (const SequenceWindow& w : records) out.push_back(encode_record(w));
    return out;
  };

  std::vector<Vector> encodings = encode_everything();
  SphereParams sphere = init_sphere(encodings, config.nu, config.chi);

  TrainedModel model;
  model.kind = ModelKind::Ann;
  model.pooling = config.pooling;
  model.encoder = encoder;
  model.encoder.input_dim = p;
  model.config = config;
  model.training_log.push_back(objective(encodings, sphere));
  check_objective_finite(model.training_log.back(), 0);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const double lr = config.learning_rate;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::size_t batch_size =
        config.batch_mode == BatchMode::Full ? n : config.batch_size;
    if (config.batch_mode == BatchMode::MiniBatch) {
      for (std::size_t i = n; i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);
    }

    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t count = std::min(batch_size, n - start);
      AnnGrads g;
      if (config.batch_mode == BatchMode::Full) {
        g = ann_objective_gradients(records, params, sphere);
      } else {
        std::vector<SequenceWindow> batch;
        batch.reserve(count);
        for (std::size_t k = 0; k < count; ++k)
          batch.push_back(records[order[start + k]]);
        g = ann_objective_gradients(batch, params, sphere);
      }

      for (std::size_t k = 0; k < params.w1.data.size(); ++k)
        params.w1.data[k] -= lr * g.dw1.data[k];
      axpy(-lr, g.db1, params.b1);
      axpy(-lr, g.sphere.d_center, sphere.center);
      sphere.radius = std::max(0.0, sphere.radius - lr * g.sphere.d_radius);
    }

    encodings = encode_everything();
    const double f = objective(encodings, sphere);
    check_objective_finite(f, epoch);
    model.training_log.push_back(f);
    if (should_stop(model.training_log, config.stop_tol)) break;
  }

  model.ann = std::move(params);
  model.sphere = std::move(sphere);
  return model;
}

}  // namespace lstmsvdd
