#pragma once

#include <cstddef>
#include <vector>

#include "lstmsvdd/linalg.hpp"
#include "lstmsvdd/types.hpp"

namespace lstmsvdd {

// One (W, U, b) triple; the recurrence uses four of these.
struct GateParams {
  Matrix w;  // hidden_size x input_size
  Matrix u;  // hidden_size x hidden_size
  Vector b;  // hidden_size
};

struct LstmParams {
  std::size_t hidden_size = 0;
  std::size_t input_size = 0;
  GateParams block;        // tanh block input
  GateParams input_gate;   // sigmoid
  GateParams forget_gate;  // sigmoid
  GateParams output_gate;  // sigmoid

  LstmParams() = default;
  LstmParams(std::size_t hidden, std::size_t input);

  // Applies op to each of the 12 parameter tensors in a fixed order,
  // paired with the corresponding tensor of `other`.
  template <typename Op>
  void for_each_gate(LstmParams& other, Op op) {
    GateParams* mine[4] = {&block, &input_gate, &forget_gate, &output_gate};
    GateParams* theirs[4] = {&other.block, &other.input_gate,
                             &other.forget_gate, &other.output_gate};
    for (int g = 0; g < 4; ++g) op(*mine[g], *theirs[g]);
  }
};

// Gradients have the same shape as the parameters.
using LstmGrads = LstmParams;

// Everything the backward pass needs from one forward step. Pre-activations
// are kept so activation derivatives are evaluated exactly at the forward
// point instead of being reconstructed from saturated outputs.
struct LstmStepCache {
  Vector pre_z, pre_i, pre_f, pre_o;  // affine pre-activations
  Vector z, i, f, o;                  // activated gate values
  Vector c;                           // cell state after the step
  Vector tanh_c;
  Vector h;
};

struct LstmTape {
  std::vector<LstmStepCache> steps;
};

// One recurrence step. h_prev and c_prev are zero vectors at the first step.
// Fills *cache when given.
void lstm_step(const Vector& x, const Vector& h_prev, const Vector& c_prev,
               const LstmParams& params, Vector& h_out, Vector& c_out,
               LstmStepCache* cache = nullptr);

// Pool a list of per-step hidden vectors into one vector.
Vector pool(const std::vector<Vector>& hs, Pooling method);

// Run the recurrence over the whole window and pool; the tape caches every
// step for encode_backward.
Vector encode_sequence(const SequenceWindow& seq, const LstmParams& params,
                       Pooling pooling, LstmTape* tape = nullptr);

// Gradient of (grad_hbar . hbar) with respect to every LSTM parameter,
// accumulated into *grads (so per-batch accumulation is one pass).
void encode_backward(const LstmTape& tape, const SequenceWindow& seq,
                     const LstmParams& params, Pooling pooling,
                     const Vector& grad_hbar, LstmGrads& grads);

LstmGrads zero_grads(const LstmParams& params);

}  // namespace lstmsvdd
