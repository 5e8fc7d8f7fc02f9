#include "commod/gru.hpp"

#include <cmath>
#include <stdexcept>

namespace commod {

GruWeights::GruWeights(int d, int m)
    : w_z(m, d), w_r(m, d), w_h(m, d),
      u_z(m, m), u_r(m, m), u_h(m, m),
      b_z(m, 0.0), b_r(m, 0.0), b_h(m, 0.0) {}

void GruWeights::init(Rng& rng) {
  const int d = input_dim();
  const int m = hidden_dim();
  w_z = glorot_init(d, m, rng);
  w_r = glorot_init(d, m, rng);
  w_h = glorot_init(d, m, rng);
  u_z = glorot_init(m, m, rng);
  u_r = glorot_init(m, m, rng);
  u_h = glorot_init(m, m, rng);
}

GruGrads::GruGrads(int d, int m)
    : w_z(m, d), w_r(m, d), w_h(m, d),
      u_z(m, m), u_r(m, m), u_h(m, m),
      b_z(m, 0.0), b_r(m, 0.0), b_h(m, 0.0) {}

void GruGrads::zero() {
  w_z.zero(); w_r.zero(); w_h.zero();
  u_z.zero(); u_r.zero(); u_h.zero();
  b_z.assign(b_z.size(), 0.0);
  b_r.assign(b_r.size(), 0.0);
  b_h.assign(b_h.size(), 0.0);
}

void SparseRowGrads::clear() {
  rows.clear();
  grads.clear();
}

Vector& SparseRowGrads::slot(int row, int dim) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] == row) return grads[i];
  }
  rows.push_back(row);
  grads.emplace_back(dim, 0.0);
  return grads.back();
}

void gru_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                      const GruWeights& w, Vector& h_out, GruStepCache* cache) {
  const int d = w.input_dim();
  const int m = w.hidden_dim();
  if (static_cast<int>(x.size()) != d || static_cast<int>(h_prev.size()) != m) {
    throw std::invalid_argument("gru_cell_forward: shape mismatch");
  }

  Vector z = w.b_z, r = w.b_r, hc = w.b_h;
  matvec_add(w.w_z, x, z);
  matvec_add(w.u_z, h_prev, z);
  matvec_add(w.w_r, x, r);
  matvec_add(w.u_r, h_prev, r);
  for (int i = 0; i < m; ++i) z[i] = sigmoid(z[i]);
  for (int i = 0; i < m; ++i) r[i] = sigmoid(r[i]);

  Vector rh(m);
  for (int i = 0; i < m; ++i) rh[i] = r[i] * h_prev[i];
  matvec_add(w.w_h, x, hc);
  matvec_add(w.u_h, rh, hc);
  for (int i = 0; i < m; ++i) hc[i] = std::tanh(hc[i]);

  h_out.resize(m);
  for (int i = 0; i < m; ++i) h_out[i] = (1.0 - z[i]) * h_prev[i] + z[i] * hc[i];

  if (cache) {
    cache->h_prev.assign(h_prev.begin(), h_prev.end());
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->hc = std::move(hc);
    cache->rh = std::move(rh);
  }
}

SequenceCache gru_sequence_forward(std::span<const int> indices, const Matrix& embeddings,
                                   const GruWeights& w) {
  if (indices.empty()) throw std::invalid_argument("gru_sequence_forward: empty sequence");
  const int m = w.hidden_dim();

  SequenceCache cache;
  cache.token_indices.assign(indices.begin(), indices.end());
  cache.steps.resize(indices.size());

  Vector h(m, 0.0), h_next;
  for (std::size_t t = 0; t < indices.size(); ++t) {
    const int idx = indices[t];
    if (idx < 0 || idx >= embeddings.rows) {
      throw std::out_of_range("gru_sequence_forward: token index out of range");
    }
    gru_cell_forward(embeddings.row(idx), h, w, h_next, &cache.steps[t]);
    h = h_next;
  }
  cache.h_final = std::move(h);
  return cache;
}

void gru_sequence_backward(const SequenceCache& cache, std::span<const double> dh_final,
                           const GruWeights& w, const Matrix& embeddings,
                           GruGrads& gru_grads, SparseRowGrads& embed_grads) {
  const int d = w.input_dim();
  const int m = w.hidden_dim();
  if (static_cast<int>(dh_final.size()) != m) {
    throw std::invalid_argument("gru_sequence_backward: dh_final shape mismatch");
  }
  if (gru_grads.w_z.rows != m || gru_grads.w_z.cols != d) {
    throw std::invalid_argument("gru_sequence_backward: gradient shape mismatch");
  }

  Vector dh(dh_final.begin(), dh_final.end());
  Vector dz(m), dhc(m), da_h(m), drh(m), dr(m), da_r(m), da_z(m), dh_prev(m), dx(d);

  for (int t = cache.length() - 1; t >= 0; --t) {
    const GruStepCache& s = cache.steps[t];
    const int idx = cache.token_indices[t];
    auto x = embeddings.row(idx);

    // h = (1 - z) . h_prev + z . hc
    for (int i = 0; i < m; ++i) {
      dz[i] = dh[i] * (s.hc[i] - s.h_prev[i]);
      dhc[i] = dh[i] * s.z[i];
      dh_prev[i] = dh[i] * (1.0 - s.z[i]);
    }

    // hc = tanh(W_h x + U_h rh + b_h)
    for (int i = 0; i < m; ++i) da_h[i] = dhc[i] * (1.0 - s.hc[i] * s.hc[i]);
    outer_add(da_h, x, gru_grads.w_h);
    outer_add(da_h, s.rh, gru_grads.u_h);
    axpy(1.0, da_h, gru_grads.b_h);
    drh.assign(m, 0.0);
    matvec_t_add(w.u_h, da_h, drh);
    for (int i = 0; i < m; ++i) {
      dr[i] = drh[i] * s.h_prev[i];
      dh_prev[i] += drh[i] * s.r[i];
    }

    // r = sigma(W_r x + U_r h_prev + b_r)
    for (int i = 0; i < m; ++i) da_r[i] = dr[i] * s.r[i] * (1.0 - s.r[i]);
    outer_add(da_r, x, gru_grads.w_r);
    outer_add(da_r, s.h_prev, gru_grads.u_r);
    axpy(1.0, da_r, gru_grads.b_r);
    matvec_t_add(w.u_r, da_r, dh_prev);

    // z = sigma(W_z x + U_z h_prev + b_z)
    for (int i = 0; i < m; ++i) da_z[i] = dz[i] * s.z[i] * (1.0 - s.z[i]);
    outer_add(da_z, x, gru_grads.w_z);
    outer_add(da_z, s.h_prev, gru_grads.u_z);
    axpy(1.0, da_z, gru_grads.b_z);
    matvec_t_add(w.u_z, da_z, dh_prev);

    dx.assign(d, 0.0);
    matvec_t_add(w.w_z, da_z, dx);
    matvec_t_add(w.w_r, da_r, dx);
    matvec_t_add(w.w_h, da_h, dx);
    axpy(1.0, dx, embed_grads.slot(idx, d));

    dh = dh_prev;
  }
}

}  // namespace commod
