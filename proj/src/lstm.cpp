#include "lstmsvdd/lstm.hpp"

#include <algorithm>
#include <stdexcept>

namespace lstmsvdd {

LstmParams::LstmParams(std::size_t hidden, std::size_t input)
    : hidden_size(hidden), input_size(input) {
  if (hidden == 0 || input == 0)
    throw std::invalid_argument("LstmParams: sizes must be positive");
  GateParams* gates[4] = {&block, &input_gate, &forget_gate, &output_gate};
  for (GateParams* g : gates) {
    g->w = Matrix(hidden, input);
    g->u = Matrix(hidden, hidden);
    g->b.assign(hidden, 0.0);
  }
}

void lstm_step(const Vector& x, const Vector& h_prev, const Vector& c_prev,
               const LstmParams& params, Vector& h_out, Vector& c_out,
               LstmStepCache* cache) {
  const std::size_t m = params.hidden_size;
  if (x.size() != params.input_size)
    throw std::invalid_argument("lstm_step: input length mismatch");
  if (h_prev.size() != m || c_prev.size() != m)
    throw std::invalid_argument("lstm_step: state length mismatch");

  Vector pre_z = affine(params.block.w, x, params.block.u, h_prev, params.block.b);
  Vector pre_i = affine(params.input_gate.w, x, params.input_gate.u, h_prev,
                        params.input_gate.b);
  Vector pre_f = affine(params.forget_gate.w, x, params.forget_gate.u, h_prev,
                        params.forget_gate.b);
  Vector pre_o = affine(params.output_gate.w, x, params.output_gate.u, h_prev,
                        params.output_gate.b);

  Vector z(m), i(m), f(m), o(m), c(m), tc(m);
  h_out.resize(m);
  c_out.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    z[k] = tanh_act(pre_z[k]);
    i[k] = sigmoid(pre_i[k]);
    f[k] = sigmoid(pre_f[k]);
    o[k] = sigmoid(pre_o[k]);
    c[k] = i[k] * z[k] + f[k] * c_prev[k];
    tc[k] = tanh_act(c[k]);
    h_out[k] = o[k] * tc[k];
    c_out[k] = c[k];
  }

  if (cache) {
    cache->pre_z = std::move(pre_z);
    cache->pre_i = std::move(pre_i);
    cache->pre_f = std::move(pre_f);
    cache->pre_o = std::move(pre_o);
    cache->z = std::move(z);
    cache->i = std::move(i);
    cache->f = std::move(f);
    cache->o = std::move(o);
    cache->c = c_out;
    cache->tanh_c = std::move(tc);
    cache->h = h_out;
  }
}

Vector pool(const std::vector<Vector>& hs, Pooling method) {
  if (hs.empty()) throw std::invalid_argument("pool: no hidden states");
  const std::size_t m = hs.front().size();
  switch (method) {
    case Pooling::Last:
      return hs.back();
    case Pooling::Mean: {
      Vector out(m, 0.0);
      for (const Vector& h : hs) axpy(1.0, h, out);
      const double inv = 1.0 / static_cast<double>(hs.size());
      for (double& v : out) v *= inv;
      return out;
    }
    case Pooling::Max: {
      Vector out = hs.front();
      for (std::size_t j = 1; j < hs.size(); ++j)
        for (std::size_t k = 0; k < m; ++k)
          if (hs[j][k] > out[k]) out[k] = hs[j][k];
      return out;
    }
  }
  throw std::logic_error("pool: bad method");
}

Vector encode_sequence(const SequenceWindow& seq, const LstmParams& params,
                       Pooling pooling, LstmTape* tape) {
  const std::size_t m = params.hidden_size;
  const std::size_t d = seq.length();
  if (tape) {
    tape->steps.clear();
    tape->steps.resize(d);
  }
  Vector h(m, 0.0), c(m, 0.0), h_next, c_next;
  std::vector<Vector> hs;
  hs.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    lstm_step(seq.steps[j], h, c, params, h_next, c_next,
              tape ? &tape->steps[j] : nullptr);
    h = h_next;
    c = c_next;
    hs.push_back(h);
  }
  return pool(hs, pooling);
}

LstmGrads zero_grads(const LstmParams& params) {
  return LstmGrads(params.hidden_size, params.input_size);
}

namespace {

// Splits the pooled gradient back onto the per-step hidden states.
std::vector<Vector> pool_backward(const LstmTape& tape, Pooling pooling,
                                  const Vector& grad_hbar) {
  const std::size_t d = tape.steps.size();
  const std::size_t m = grad_hbar.size();
  std::vector<Vector> out(d, Vector(m, 0.0));
  switch (pooling) {
    case Pooling::Last:
      out[d - 1] = grad_hbar;
      break;
    case Pooling::Mean: {
      const double inv = 1.0 / static_cast<double>(d);
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < m; ++k) out[j][k] = grad_hbar[k] * inv;
      break;
    }
    case Pooling::Max:
      // Gradient goes to the first step attaining the max, matching pool().
      for (std::size_t k = 0; k < m; ++k) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < d; ++j)
          if (tape.steps[j].h[k] > tape.steps[arg].h[k]) arg = j;
        out[arg][k] = grad_hbar[k];
      }
      break;
  }
  return out;
}

}  // namespace

void encode_backward(const LstmTape& tape, const SequenceWindow& seq,
                     const LstmParams& params, Pooling pooling,
                     const Vector& grad_hbar, LstmGrads& grads) {
  const std::size_t d = tape.steps.size();
  const std::size_t m = params.hidden_size;
  if (d == 0 || d != seq.length())
    throw std::invalid_argument("encode_backward: tape/window length mismatch");
  if (grad_hbar.size() != m)
    throw std::invalid_argument("encode_backward: gradient length mismatch");

  const std::vector<Vector> dh_pool = pool_backward(tape, pooling, grad_hbar);

  Vector dh_next(m, 0.0), dc_next(m, 0.0);
  Vector dh(m), dc(m), da_z(m), da_i(m), da_f(m), da_o(m);
  const Vector zeros(m, 0.0);
  for (std::size_t j = d; j-- > 0;) {
    const LstmStepCache& s = tape.steps[j];
    const Vector& h_prev = (j == 0) ? zeros : tape.steps[j - 1].h;
    const Vector& c_prev = (j == 0) ? zeros : tape.steps[j - 1].c;

    for (std::size_t k = 0; k < m; ++k) {
      dh[k] = dh_pool[j][k] + dh_next[k];
      const double do_ = dh[k] * s.tanh_c[k];
      dc[k] = dh[k] * s.o[k] * tanh_deriv(s.c[k]) + dc_next[k];
      da_z[k] = dc[k] * s.i[k] * tanh_deriv(s.pre_z[k]);
      da_i[k] = dc[k] * s.z[k] * sigmoid_deriv(s.pre_i[k]);
      da_f[k] = dc[k] * c_prev[k] * sigmoid_deriv(s.pre_f[k]);
      da_o[k] = do_ * sigmoid_deriv(s.pre_o[k]);
      dc_next[k] = dc[k] * s.f[k];
    }

    add_outer(grads.block.w, da_z, seq.steps[j]);
    add_outer(grads.input_gate.w, da_i, seq.steps[j]);
    add_outer(grads.forget_gate.w, da_f, seq.steps[j]);
    add_outer(grads.output_gate.w, da_o, seq.steps[j]);
    add_outer(grads.block.u, da_z, h_prev);
    add_outer(grads.input_gate.u, da_i, h_prev);
    add_outer(grads.forget_gate.u, da_f, h_prev);
    add_outer(grads.output_gate.u, da_o, h_prev);
    axpy(1.0, da_z, grads.block.b);
    axpy(1.0, da_i, grads.input_gate.b);
    axpy(1.0, da_f, grads.forget_gate.b);
    axpy(1.0, da_o, grads.output_gate.b);

    Vector next = matvec_t(params.block.u, da_z);
    axpy(1.0, matvec_t(params.input_gate.u, da_i), next);
    axpy(1.0, matvec_t(params.forget_gate.u, da_f), next);
    axpy(1.0, matvec_t(params.output_gate.u, da_o), next);
    dh_next = std::move(next);
  }
}

}  // namespace lstmsvdd
