#include "commod/model.hpp"

#include <cmath>
#include <stdexcept>

namespace commod {

const char* to_string(Variant v) {
  switch (v) {
    case Variant::RNN: return "RNN";
    case Variant::ueRNN: return "ueRNN";
    case Variant::teRNN: return "teRNN";
    case Variant::ubRNN: return "ubRNN";
    case Variant::tbRNN: return "tbRNN";
    case Variant::uBASE: return "uBASE";
    default: return "tBASE";
  }
}

Variant variant_from_string(const std::string& s) {
  if (s == "RNN") return Variant::RNN;
  if (s == "ueRNN") return Variant::ueRNN;
  if (s == "teRNN") return Variant::teRNN;
  if (s == "ubRNN") return Variant::ubRNN;
  if (s == "tbRNN") return Variant::tbRNN;
  if (s == "uBASE") return Variant::uBASE;
  if (s == "tBASE") return Variant::tBASE;
  throw std::invalid_argument("unknown variant \"" + s + "\"");
}

bool is_neural(Variant v) { return v != Variant::uBASE && v != Variant::tBASE; }
bool uses_user_slot(Variant v) { return v == Variant::ueRNN || v == Variant::ubRNN; }
bool uses_user_type(Variant v) { return v == Variant::teRNN || v == Variant::tbRNN; }

SlotMap build_slot_map(const Corpus& corpus, const UserStatsTable& stats) {
  SlotMap slots;
  for (const Comment& c : corpus.comments) {
    if (c.split != Split::Train) continue;
    if (slots.user_to_slot.count(c.author)) continue;
    if (stats.lookup(c.author).T > 10) {
      slots.user_to_slot.emplace(c.author, static_cast<int>(slots.slot_user.size()));
      slots.slot_user.push_back(c.author);
    }
  }
  slots.unknown_slot = static_cast<int>(slots.slot_user.size());
  return slots;
}

int resolve_user_slot(const std::string& author, const SlotMap& slots) {
  auto it = slots.user_to_slot.find(author);
  return it == slots.user_to_slot.end() ? slots.unknown_slot : it->second;
}

bool ModelParameters::has_global_bias() const {
  return variant == Variant::RNN || variant == Variant::ueRNN || variant == Variant::teRNN;
}

std::vector<ParamView> ModelParameters::views() {
  std::vector<ParamView> out;
  auto push = [&out](const std::string& name, Vector& v, int rows, int cols) {
    out.push_back({name, std::span<double>(v.data(), v.size()), rows, cols});
  };
  push("embeddings", embeddings.a, embeddings.rows, embeddings.cols);
  push("gru.w_z", gru.w_z.a, gru.w_z.rows, gru.w_z.cols);
  push("gru.w_r", gru.w_r.a, gru.w_r.rows, gru.w_r.cols);
  push("gru.w_h", gru.w_h.a, gru.w_h.rows, gru.w_h.cols);
  push("gru.u_z", gru.u_z.a, gru.u_z.rows, gru.u_z.cols);
  push("gru.u_r", gru.u_r.a, gru.u_r.rows, gru.u_r.cols);
  push("gru.u_h", gru.u_h.a, gru.u_h.rows, gru.u_h.cols);
  push("gru.b_z", gru.b_z, static_cast<int>(gru.b_z.size()), 1);
  push("gru.b_r", gru.b_r, static_cast<int>(gru.b_r.size()), 1);
  push("gru.b_h", gru.b_h, static_cast<int>(gru.b_h.size()), 1);
  push("w_p", w_p, static_cast<int>(w_p.size()), 1);
  if (has_global_bias()) {
    out.push_back({"b", std::span<double>(&b, 1), 1, 1});
  }
  if (variant == Variant::ueRNN || variant == Variant::teRNN) {
    push("user_emb", user_emb.a, user_emb.rows, user_emb.cols);
    push("w_v", w_v, static_cast<int>(w_v.size()), 1);
  }
  if (variant == Variant::ubRNN || variant == Variant::tbRNN) {
    push("user_bias", user_bias, static_cast<int>(user_bias.size()), 1);
  }
  return out;
}

ModelParameters init_parameters(Variant variant, int vocab_size, int d, int m,
                                int n_slots, Rng& rng) {
  if (!is_neural(variant)) throw std::invalid_argument("init_parameters: baselines have no parameters");
  if (vocab_size <= 0 || d <= 0 || m <= 0 || n_slots <= 0) {
    throw std::invalid_argument("init_parameters: dimensions must be positive");
  }
  ModelParameters p;
  p.variant = variant;

  // Draw order: embeddings, GRU matrices, w_p, then the user table.
  p.embeddings = Matrix(vocab_size, d);
  for (double& w : p.embeddings.a) w = rng.uniform(-kUserTableInitRange, kUserTableInitRange);

  p.gru = GruWeights(d, m);
  p.gru.init(rng);

  const Matrix wp = glorot_init(m, 1, rng);
  p.w_p.assign(wp.a.begin(), wp.a.end());
  p.b = 0.0;

  const int user_rows = uses_user_type(variant) ? kNumUserTypes : n_slots;
  if (variant == Variant::ueRNN || variant == Variant::teRNN) {
    p.user_emb = Matrix(user_rows, d);
    for (double& w : p.user_emb.a) w = rng.uniform(-kUserTableInitRange, kUserTableInitRange);
    const Matrix wv = glorot_init(d, 1, rng);
    p.w_v.assign(wv.a.begin(), wv.a.end());
  } else if (variant == Variant::ubRNN || variant == Variant::tbRNN) {
    p.user_bias.resize(user_rows);
    for (double& w : p.user_bias) w = rng.uniform(-kUserTableInitRange, kUserTableInitRange);
  }
  return p;
}

ModelGradients::ModelGradients(const ModelParameters& p)
    : variant(p.variant),
      embeddings(p.embeddings.rows, p.embeddings.cols),
      gru(p.gru.input_dim(), p.gru.hidden_dim()),
      w_p(p.w_p.size(), 0.0),
      user_emb(p.user_emb.rows, p.user_emb.cols),
      w_v(p.w_v.size(), 0.0),
      user_bias(p.user_bias.size(), 0.0) {}

void ModelGradients::zero() {
  embeddings.zero();
  gru.zero();
  w_p.assign(w_p.size(), 0.0);
  b = 0.0;
  user_emb.zero();
  w_v.assign(w_v.size(), 0.0);
  user_bias.assign(user_bias.size(), 0.0);
}

std::vector<ParamView> ModelGradients::views() {
  std::vector<ParamView> out;
  auto push = [&out](const std::string& name, Vector& v, int rows, int cols) {
    out.push_back({name, std::span<double>(v.data(), v.size()), rows, cols});
  };
  push("embeddings", embeddings.a, embeddings.rows, embeddings.cols);
  push("gru.w_z", gru.w_z.a, gru.w_z.rows, gru.w_z.cols);
  push("gru.w_r", gru.w_r.a, gru.w_r.rows, gru.w_r.cols);
  push("gru.w_h", gru.w_h.a, gru.w_h.rows, gru.w_h.cols);
  push("gru.u_z", gru.u_z.a, gru.u_z.rows, gru.u_z.cols);
  push("gru.u_r", gru.u_r.a, gru.u_r.rows, gru.u_r.cols);
  push("gru.u_h", gru.u_h.a, gru.u_h.rows, gru.u_h.cols);
  push("gru.b_z", gru.b_z, static_cast<int>(gru.b_z.size()), 1);
  push("gru.b_r", gru.b_r, static_cast<int>(gru.b_r.size()), 1);
  push("gru.b_h", gru.b_h, static_cast<int>(gru.b_h.size()), 1);
  push("w_p", w_p, static_cast<int>(w_p.size()), 1);
  if (variant == Variant::RNN || variant == Variant::ueRNN || variant == Variant::teRNN) {
    out.push_back({"b", std::span<double>(&b, 1), 1, 1});
  }
  if (variant == Variant::ueRNN || variant == Variant::teRNN) {
    push("user_emb", user_emb.a, user_emb.rows, user_emb.cols);
    push("w_v", w_v, static_cast<int>(w_v.size()), 1);
  }
  if (variant == Variant::ubRNN || variant == Variant::tbRNN) {
    push("user_bias", user_bias, static_cast<int>(user_bias.size()), 1);
  }
  return out;
}

EncodedExample encode_example(const Comment& c, const Vocabulary& vocab,
                              const UserStatsTable& stats, const SlotMap& slots,
                              Variant variant, int truncation_cap) {
  EncodedExample ex;
  ex.tokens = encode_comment(c, vocab, truncation_cap);
  ex.y = c.label == Label::Reject ? 1.0 : 0.0;
  if (uses_user_slot(variant)) {
    ex.user_row = resolve_user_slot(c.author, slots);
  } else if (uses_user_type(variant)) {
    ex.user_row = type_index(stats.lookup(c.author).type);
  }
  return ex;
}

namespace {

double head_logit(Variant variant, std::span<const double> h_final, int user_row,
                  const ModelParameters& p) {
  double z = dot(std::span<const double>(p.w_p.data(), p.w_p.size()), h_final);
  switch (variant) {
    case Variant::RNN:
      return z + p.b;
    case Variant::ueRNN:
    case Variant::teRNN:
      if (user_row < 0 || user_row >= p.user_emb.rows) {
        throw std::invalid_argument("head_forward: user row out of range");
      }
      return z + dot(std::span<const double>(p.w_v.data(), p.w_v.size()), p.user_emb.row(user_row)) + p.b;
    case Variant::ubRNN:
    case Variant::tbRNN:
      // b_u (or b_t) replaces the global bias.
      if (user_row < 0 || user_row >= static_cast<int>(p.user_bias.size())) {
        throw std::invalid_argument("head_forward: user row out of range");
      }
      return z + p.user_bias[user_row];
    default:
      throw std::invalid_argument("head_forward: not a neural variant");
  }
}

}  // namespace

double head_forward(Variant variant, std::span<const double> h_final, int user_row,
                    const ModelParameters& p) {
  if (is_neural(variant) && variant != Variant::RNN && user_row < 0) {
    throw std::invalid_argument("head_forward: variant requires a user context");
  }
  return sigmoid(head_logit(variant, h_final, user_row, p));
}

double model_forward(const EncodedExample& ex, const ModelParameters& p) {
  SequenceCache cache = gru_sequence_forward(ex.tokens, p.embeddings, p.gru);
  return head_forward(p.variant, cache.h_final, ex.user_row, p);
}

void ExampleGradients::clear() {
  gru.zero();
  embed_rows.clear();
  w_p.assign(w_p.size(), 0.0);
  b = 0.0;
  w_v.assign(w_v.size(), 0.0);
  user_row = -1;
  user_emb_row.assign(user_emb_row.size(), 0.0);
  user_bias_g = 0.0;
  loss = 0.0;
}

void model_backward(const EncodedExample& ex, const ModelParameters& p, ExampleGradients& out) {
  const int m = p.hidden_dim();
  const int d = p.embed_dim();
  if (out.gru.w_z.rows != m || out.gru.w_z.cols != d) out.gru = GruGrads(d, m);
  out.clear();
  out.w_p.resize(m, 0.0);

  SequenceCache cache = gru_sequence_forward(ex.tokens, p.embeddings, p.gru);
  const double prob = head_forward(p.variant, cache.h_final, ex.user_row, p);
  const auto [loss, dz] = bce_loss_and_grad(prob, ex.y);
  out.loss = loss;

  // Head gradients; dz = p - y is d loss / d logit.
  for (int i = 0; i < m; ++i) out.w_p[i] = dz * cache.h_final[i];
  out.user_row = ex.user_row;
  switch (p.variant) {
    case Variant::RNN:
      out.b = dz;
      break;
    case Variant::ueRNN:
    case Variant::teRNN: {
      out.b = dz;
      out.w_v.resize(d, 0.0);
      auto v_row = p.user_emb.row(ex.user_row);
      for (int i = 0; i < d; ++i) out.w_v[i] = dz * v_row[i];
      out.user_emb_row.resize(d, 0.0);
      for (int i = 0; i < d; ++i) out.user_emb_row[i] = dz * p.w_v[i];
      break;
    }
    case Variant::ubRNN:
    case Variant::tbRNN:
      out.user_bias_g = dz;
      break;
    default:
      throw std::invalid_argument("model_backward: not a neural variant");
  }

  Vector dh(m);
  for (int i = 0; i < m; ++i) dh[i] = dz * p.w_p[i];
  gru_sequence_backward(cache, dh, p.gru, p.embeddings, out.gru, out.embed_rows);
}

namespace {

void add_gru(GruGrads& acc, const GruGrads& g) {
  axpy(1.0, std::span<const double>(g.w_z.a), std::span<double>(acc.w_z.a));
  axpy(1.0, std::span<const double>(g.w_r.a), std::span<double>(acc.w_r.a));
  axpy(1.0, std::span<const double>(g.w_h.a), std::span<double>(acc.w_h.a));
  axpy(1.0, std::span<const double>(g.u_z.a), std::span<double>(acc.u_z.a));
  axpy(1.0, std::span<const double>(g.u_r.a), std::span<double>(acc.u_r.a));
  axpy(1.0, std::span<const double>(g.u_h.a), std::span<double>(acc.u_h.a));
  axpy(1.0, std::span<const double>(g.b_z), std::span<double>(acc.b_z));
  axpy(1.0, std::span<const double>(g.b_r), std::span<double>(acc.b_r));
  axpy(1.0, std::span<const double>(g.b_h), std::span<double>(acc.b_h));
}

}  // namespace

void accumulate(ModelGradients& acc, const ExampleGradients& g, const ModelParameters& p) {
  add_gru(acc.gru, g.gru);
  for (std::size_t k = 0; k < g.embed_rows.rows.size(); ++k) {
    axpy(1.0, std::span<const double>(g.embed_rows.grads[k]),
         acc.embeddings.row(g.embed_rows.rows[k]));
  }
  axpy(1.0, std::span<const double>(g.w_p), std::span<double>(acc.w_p));
  switch (p.variant) {
    case Variant::RNN:
      acc.b += g.b;
      break;
    case Variant::ueRNN:
    case Variant::teRNN:
      acc.b += g.b;
      axpy(1.0, std::span<const double>(g.w_v), std::span<double>(acc.w_v));
      axpy(1.0, std::span<const double>(g.user_emb_row), acc.user_emb.row(g.user_row));
      break;
    case Variant::ubRNN:
    case Variant::tbRNN:
      acc.user_bias[g.user_row] += g.user_bias_g;
      break;
    default:
      break;
  }
}

double ubase_score(const std::string& author, const UserStatsTable& stats) {
  const UserStats s = stats.lookup(author);
  return s.T > 10 ? s.R : 0.5;
}

double tbase_score(UserType t) {
  switch (t) {
    case UserType::Red: return 1.0;
    case UserType::Green: return 0.0;
    default: return 0.5;  // Yellow and Unknown
  }
}

}  // namespace commod
