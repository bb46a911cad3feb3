#include "lstmsvdd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lstmsvdd {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Lstm: return "lstm";
    case ModelKind::Ann: return "ann";
    case ModelKind::SvddOnly: return "svdd";
  }
  return "lstm";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "lstm") return ModelKind::Lstm;
  if (name == "ann") return ModelKind::Ann;
  if (name == "svdd") return ModelKind::SvddOnly;
  throw std::invalid_argument("unknown model kind: " + name);
}

Vector ann_encode(const Vector& x, const AnnParams& params) {
  if (x.size() != params.input_size)
    throw std::invalid_argument("ann_encode: input length mismatch");
  Vector h = matvec(params.w1, x);
  for (std::size_t k = 0; k < h.size(); ++k)
    h[k] = tanh_act(h[k] + params.b1[k]);
  return h;
}

namespace {

// Cyclic Jacobi eigendecomposition of a small symmetric matrix.
// Eigenvectors end up as the columns of v.
void symmetric_eigen(Matrix a, Vector& eigvals, Matrix& v) {
  const std::size_t n = a.rows;
  v = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-26) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(1.0 + theta * theta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = cs * akp - sn * akq;
          a(k, q) = sn * akp + cs * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = cs * apk - sn * aqk;
          a(q, k) = sn * apk + cs * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = cs * vkp - sn * vkq;
          v(k, q) = sn * vkp + cs * vkq;
        }
      }
    }
  }
  eigvals.resize(n);
  for (std::size_t k = 0; k < n; ++k) eigvals[k] = a(k, k);
}

// W^T W for tall matrices, W W^T for wide ones: the smaller Gram matrix.
Matrix small_gram(const Matrix& w, bool wide) {
  const std::size_t n = wide ? w.rows : w.cols;
  Matrix g(n, n);
  if (wide) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = r; c < n; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < w.cols; ++k) acc += w(r, k) * w(c, k);
        g(r, c) = acc;
        g(c, r) = acc;
      }
  } else {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = r; c < n; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < w.rows; ++k) acc += w(k, r) * w(k, c);
        g(r, c) = acc;
        g(c, r) = acc;
      }
  }
  return g;
}

void unit_normalize(Vector& b) {
  const double n = norm2(b);
  if (n < 1e-300) {
    std::fill(b.begin(), b.end(), 0.0);
    b[0] = 1.0;
    return;
  }
  for (double& v : b) v /= n;
}

void fisher_yates(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng.below(i)]);
}

void check_config(const TrainConfig& config) {
  if (!(config.learning_rate > 0.0))
    throw std::invalid_argument("learning_rate must be positive");
  if (config.hidden_size == 0)
    throw std::invalid_argument("hidden_size must be positive");
  if (config.lookback == 0)
    throw std::invalid_argument("lookback must be at least 1");
  if (!(config.nu > 0.0 && config.nu <= 1.0))
    throw std::invalid_argument("nu must be in (0, 1]");
  if (!(config.chi > 0.0))
    throw std::invalid_argument("chi must be positive");
  if (config.batch_mode == BatchMode::MiniBatch && config.batch_size == 0)
    throw std::invalid_argument("batch_size must be positive in minibatch mode");
  if (!(config.stop_tol >= 0.0))
    throw std::invalid_argument("stop_tol must be nonnegative");
}

}  // namespace

Matrix orthonormalize(const Matrix& w) {
  if (!all_finite(w))
    throw std::invalid_argument("orthonormalize: non-finite entries");
  const bool wide = w.rows < w.cols;
  const Matrix g = small_gram(w, wide);

  Vector eigvals;
  Matrix v(0, 0);
  symmetric_eigen(g, eigvals, v);

  const double lmax = *std::max_element(eigvals.begin(), eigvals.end());
  if (!(lmax > 0.0))
    throw std::runtime_error("orthonormalize: zero matrix has no polar factor");
  for (double l : eigvals)
    if (l < 1e-12 * lmax)
      throw std::runtime_error("orthonormalize: rank-deficient matrix");

  const std::size_t n = g.rows;
  Matrix inv_sqrt(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r; c < n; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        acc += v(r, k) * v(c, k) / std::sqrt(eigvals[k]);
      inv_sqrt(r, c) = acc;
      inv_sqrt(c, r) = acc;
    }
  return wide ? matmul(inv_sqrt, w) : matmul(w, inv_sqrt);
}

double orthogonality_residual(const Matrix& w) {
  const bool wide = w.rows < w.cols;
  Matrix g = small_gram(w, wide);
  for (std::size_t k = 0; k < g.rows; ++k) g(k, k) -= 1.0;
  double acc = 0.0;
  for (double v : g.data) acc += v * v;
  return std::sqrt(acc);
}

void project_constraints(LstmParams& params) {
  GateParams* gates[4] = {&params.block, &params.input_gate,
                          &params.forget_gate, &params.output_gate};
  for (GateParams* g : gates) {
    g->w = orthonormalize(g->w);
    g->u = orthonormalize(g->u);
    unit_normalize(g->b);
  }
}

LstmParams init_lstm_params(const TrainConfig& config, std::size_t input_dim,
                            Rng& rng) {
  if (input_dim == 0)
    throw std::invalid_argument("init_lstm_params: input_dim must be positive");
  LstmParams params(config.hidden_size, input_dim);
  GateParams* gates[4] = {&params.block, &params.input_gate,
                          &params.forget_gate, &params.output_gate};
  for (GateParams* g : gates) {
    for (double& v : g->w.data) v = rng.gaussian();
    g->w = orthonormalize(g->w);
    for (double& v : g->u.data) v = rng.gaussian();
    g->u = orthonormalize(g->u);
    for (double& v : g->b) v = rng.gaussian();
    unit_normalize(g->b);
  }
  return params;
}

SphereParams init_sphere(const std::vector<Vector>& sample_encodings,
                         double nu, double chi) {
  if (sample_encodings.empty())
    throw std::invalid_argument("init_sphere: no sample encodings");
  if (!(nu > 0.0 && nu <= 1.0))
    throw std::invalid_argument("nu must be in (0, 1]");
  const std::size_t n = sample_encodings.size();
  const std::size_t m = sample_encodings.front().size();

  SphereParams sphere;
  sphere.nu = nu;
  sphere.chi = chi;
  sphere.center.assign(m, 0.0);
  for (const Vector& e : sample_encodings) axpy(1.0, e, sphere.center);
  for (double& v : sphere.center) v /= static_cast<double>(n);

  Vector dists(n);
  for (std::size_t i = 0; i < n; ++i)
    dists[i] = std::sqrt(dist2(sample_encodings[i], sphere.center));
  std::sort(dists.begin(), dists.end());

  const double pos = (1.0 - nu) * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  sphere.radius = dists[lo];
  if (lo + 1 < n) sphere.radius += frac * (dists[lo + 1] - dists[lo]);
  return sphere;
}

std::pair<LstmParams, SphereParams> init_state(
    const TrainConfig& config, std::size_t input_dim,
    const std::vector<Vector>& sample_encodings) {
  Rng rng(config.seed);
  LstmParams params = init_lstm_params(config, input_dim, rng);
  return {std::move(params),
          init_sphere(sample_encodings, config.nu, config.chi)};
}

namespace {

std::vector<Vector> encode_all(const std::vector<SequenceWindow>& windows,
                               const LstmParams& params, Pooling pooling) {
  std::vector<Vector> out;
  out.reserve(windows.size());
  for (const SequenceWindow& w : windows)
    out.push_back(encode_sequence(w, params, pooling));
  return out;
}

void apply_lstm_update(LstmParams& params, LstmGrads& grads, double lr) {
  params.for_each_gate(grads, [lr](GateParams& g, GateParams& d) {
    for (std::size_t k = 0; k < g.w.data.size(); ++k)
      g.w.data[k] -= lr * d.w.data[k];
    for (std::size_t k = 0; k < g.u.data.size(); ++k)
      g.u.data[k] -= lr * d.u.data[k];
    for (std::size_t k = 0; k < g.b.size(); ++k) g.b[k] -= lr * d.b[k];
  });
}

}  // namespace

TrainedModel fit(const std::vector<SequenceWindow>& train_windows,
                 const TrainConfig& config, const EncoderMeta& encoder,
                 const EpochObserver& observer) {
  check_config(config);
  if (train_windows.empty())
    throw std::invalid_argument("fit: no training windows");
  const std::size_t p = train_windows.front().feature_dim();
  for (const SequenceWindow& w : train_windows) {
    if (w.label != ClassLabel::Normal)
      throw std::invalid_argument(
          "fit: window " + std::to_string(w.id) +
          " is not labeled normal; one-class training takes normal data only");
    if (w.feature_dim() != p)
      throw std::invalid_argument("fit: windows disagree on feature dimension");
  }
  if (encoder.input_dim != 0 && encoder.input_dim != p)
    throw std::invalid_argument("fit: encoder metadata dimension mismatch");

  Rng rng(config.seed);
  LstmParams params = init_lstm_params(config, p, rng);

  std::vector<Vector> encodings = encode_all(train_windows, params,
                                             config.pooling);
  SphereParams sphere = init_sphere(encodings, config.nu, config.chi);

  TrainedModel model;
  model.kind = ModelKind::Lstm;
  model.pooling = config.pooling;
  model.encoder = encoder;
  model.encoder.input_dim = p;
  model.config = config;

  const double f0 = objective(encodings, sphere);
  if (!std::isfinite(f0))
    throw std::runtime_error("fit: objective non-finite at initialization");
  model.training_log.push_back(f0);

  const std::size_t n = train_windows.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const double lr = config.learning_rate;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::size_t batch_size =
        config.batch_mode == BatchMode::Full ? n : config.batch_size;
    if (config.batch_mode == BatchMode::MiniBatch) fisher_yates(order, rng);

    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t count = std::min(batch_size, n - start);
      std::vector<Vector> batch_enc(count);
      if (config.batch_mode == BatchMode::Full) {
        // Full batch reuses the encodings computed for the last objective.
        batch_enc = encodings;
      } else {
        for (std::size_t k = 0; k < count; ++k)
          batch_enc[k] = encode_sequence(train_windows[order[start + k]],
                                         params, config.pooling);
      }

      const ObjectiveGrads g = objective_gradients(batch_enc, sphere);

      // Re-encode with a tape one window at a time: backprop needs the
      // per-step cache but holding every tape at once would dwarf the data.
      LstmGrads grads = zero_grads(params);
      LstmTape tape;
      for (std::size_t k = 0; k < count; ++k) {
        const SequenceWindow& w = train_windows[order[start + k]];
        encode_sequence(w, params, config.pooling, &tape);
        encode_backward(tape, w, params, config.pooling, g.d_encodings[k],
                        grads);
      }

      apply_lstm_update(params, grads, lr);
      axpy(-lr, g.d_center, sphere.center);
      sphere.radius = std::max(0.0, sphere.radius - lr * g.d_radius);
      try {
        project_constraints(params);
      } catch (const std::exception& e) {
        // A step large enough to break the projection is a divergence, not a
        // caller error; report it with the epoch like the objective check.
        throw std::runtime_error("fit: training diverged at epoch " +
                                 std::to_string(epoch) + " (" + e.what() + ")");
      }
    }

    encodings = encode_all(train_windows, params, config.pooling);
    const double f = objective(encodings, sphere);
    if (!std::isfinite(f))
      throw std::runtime_error("fit: training diverged, objective non-finite "
                               "at epoch " + std::to_string(epoch));
    model.training_log.push_back(f);
    if (observer) observer(epoch, params, sphere, f);

    const std::size_t logged = model.training_log.size();
    if (config.stop_tol > 0.0 && logged >= 6 &&
        std::fabs(model.training_log[logged - 1] -
                  model.training_log[logged - 6]) < config.stop_tol)
      break;
  }

  model.lstm = std::move(params);
  model.sphere = std::move(sphere);
  return model;
}

Vector encode_window(const TrainedModel& model, const SequenceWindow& window) {
  if (model.encoder.input_dim != 0 &&
      window.feature_dim() != model.encoder.input_dim)
    throw std::invalid_argument(
        "encode_window: window feature dimension " +
        std::to_string(window.feature_dim()) + " does not match the model's " +
        std::to_string(model.encoder.input_dim));
  switch (model.kind) {
    case ModelKind::Lstm:
      return encode_sequence(window, model.lstm, model.pooling);
    case ModelKind::Ann:
      if (window.length() != 1)
        throw std::invalid_argument(
            "encode_window: the feedforward model scores single-record "
            "windows only");
      return ann_encode(window.steps.front(), model.ann);
    case ModelKind::SvddOnly:
      if (window.length() != 1)
        throw std::invalid_argument(
            "encode_window: the record-space model scores single-record "
            "windows only");
      return window.steps.front();
  }
  throw std::logic_error("encode_window: bad model kind");
}

std::vector<Score> score(const TrainedModel& model,
                         const std::vector<SequenceWindow>& windows) {
  std::vector<Score> out;
  out.reserve(windows.size());
  for (const SequenceWindow& w : windows)
    out.push_back(decide(encode_window(model, w), model.sphere));
  return out;
}

}  // namespace lstmsvdd
