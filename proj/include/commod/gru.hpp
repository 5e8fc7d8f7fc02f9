#pragma once

#include <span>
#include <vector>

#include "commod/la.hpp"
#include "commod/nn.hpp"
#include "commod/rng.hpp"

namespace commod {

// Gate weights for one GRU chain. Input->gate matrices are m x d, recurrent
// matrices m x m. Gate equations (reset applied inside the candidate's
// recurrent term):
//   z = sigma(W_z x + U_z h_prev + b_z)
//   r = sigma(W_r x + U_r h_prev + b_r)
//   hc = tanh(W_h x + U_h (r . h_prev) + b_h)
//   h  = (1 - z) . h_prev + z . hc
struct GruWeights {
  Matrix w_z, w_r, w_h;  // m x d
  Matrix u_z, u_r, u_h;  // m x m
  Vector b_z, b_r, b_h;  // m

  GruWeights() = default;
  GruWeights(int d, int m);

  int input_dim() const { return w_z.cols; }
  int hidden_dim() const { return w_z.rows; }

  // Glorot matrices, zero biases. Draw order: w_z, w_r, w_h, u_z, u_r, u_h.
  void init(Rng& rng);
};

// Per-timestep activations retained for backpropagation through time.
struct GruStepCache {
  Vector h_prev, z, r, hc, rh;  // rh = r . h_prev
};

struct SequenceCache {
  std::vector<int> token_indices;
  std::vector<GruStepCache> steps;
  Vector h_final;

  int length() const { return static_cast<int>(steps.size()); }
};

struct GruGrads {
  Matrix w_z, w_r, w_h;
  Matrix u_z, u_r, u_h;
  Vector b_z, b_r, b_h;

  GruGrads() = default;
  GruGrads(int d, int m);
  void zero();
};

// Word-embedding row gradients for one sequence; rows repeat-accumulated.
struct SparseRowGrads {
  std::vector<int> rows;
  std::vector<Vector> grads;

  void clear();
  // Returns the accumulator for `row`, creating it zeroed on first touch.
  Vector& slot(int row, int dim);
};

void gru_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                      const GruWeights& w, Vector& h_out, GruStepCache* cache);

// h_0 = 0; x_t = embeddings.row(indices[t]).
SequenceCache gru_sequence_forward(std::span<const int> indices,
                                   const Matrix& embeddings, const GruWeights& w);

// Exact reverse-mode gradients of a scalar loss whose gradient at the final
// hidden state is dh_final. Accumulates into gru_grads / embed_grads.
void gru_sequence_backward(const SequenceCache& cache, std::span<const double> dh_final,
                           const GruWeights& w, const Matrix& embeddings,
                           GruGrads& gru_grads, SparseRowGrads& embed_grads);

}  // namespace commod
