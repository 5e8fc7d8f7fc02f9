#include "commod/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "commod/eval.hpp"
#include "commod/rng.hpp"

namespace commod {

namespace {

constexpr double kPcaTol = 1e-9;
constexpr int kPcaMaxIters = 1000;
constexpr std::uint64_t kPcaStartSeed = 0x9E3779B97F4A7C15ULL;

double norm2(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void normalize(Vector& v) {
  const double n = norm2(v);
  for (double& x : v) x /= n;
}

// v -= (v . u) u
void reject_component(Vector& v, const Vector& u) {
  const double c = dot(std::span<const double>(v), std::span<const double>(u));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * u[i];
}

// Deterministic unit vector orthogonal to u: basis vector of u's
// smallest-magnitude coordinate, Gram-Schmidt'ed.
Vector orthogonal_unit(const Vector& u) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (std::fabs(u[i]) < std::fabs(u[k])) k = i;
  }
  Vector v(u.size(), 0.0);
  v[k] = 1.0;
  reject_component(v, u);
  normalize(v);
  return v;
}

// Dominant eigenvector of cov, optionally deflated against prev.
std::pair<Vector, double> power_iterate(const Matrix& cov, const Vector* prev, Rng& rng) {
  const int d = cov.cols;
  Vector v(d);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  if (prev) reject_component(v, *prev);
  if (norm2(v) < 1e-12) v = orthogonal_unit(*prev);
  normalize(v);

  Vector next(d);
  for (int iter = 0; iter < kPcaMaxIters; ++iter) {
    next.assign(d, 0.0);
    matvec_add(cov, v, next);
    if (prev) reject_component(next, *prev);
    const double n = norm2(next);
    if (n < 1e-300) {
      // Deflated matrix vanished (rank <= 1): any orthogonal direction
      // is an eigenvector with eigenvalue 0.
      v = prev ? orthogonal_unit(*prev) : v;
      return {v, 0.0};
    }
    for (double& x : next) x /= n;
    if (dot(std::span<const double>(next), std::span<const double>(v)) < 0.0) {
      for (double& x : next) x = -x;
    }
    double delta = 0.0;
    for (int i = 0; i < d; ++i) delta = std::max(delta, std::fabs(next[i] - v[i]));
    v = next;
    if (delta < kPcaTol) break;
  }

  Vector cv(d, 0.0);
  matvec_add(cov, v, cv);
  const double lambda = dot(std::span<const double>(v), std::span<const double>(cv));
  return {v, lambda};
}

void fix_sign(Vector& v, Vector& projections_column) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::fabs(v[i]) > std::fabs(v[k])) k = i;
  }
  if (v[k] < 0.0) {
    for (double& x : v) x = -x;
    for (double& x : projections_column) x = -x;
  }
}

}  // namespace

PcaResult pca_project(const Matrix& vectors) {
  const int n = vectors.rows;
  const int d = vectors.cols;
  if (n < 3) throw std::invalid_argument("pca_project: need at least 3 points");
  if (d < 2) throw std::invalid_argument("pca_project: need at least 2 dimensions");

  Matrix centered = vectors;
  for (int j = 0; j < d; ++j) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += vectors(i, j);
    mean /= n;
    for (int i = 0; i < n; ++i) centered(i, j) -= mean;
  }

  Matrix cov(d, d);
  for (int i = 0; i < n; ++i) {
    auto row = centered.row(i);
    for (int a = 0; a < d; ++a) {
      const double ra = row[a];
      auto crow = cov.row(a);
      for (int bcol = 0; bcol < d; ++bcol) crow[bcol] += ra * row[bcol];
    }
  }
  for (double& x : cov.a) x /= n;

  double total_var = 0.0;
  for (int j = 0; j < d; ++j) total_var += cov(j, j);
  if (total_var < 1e-24) {
    throw std::invalid_argument("pca_project: degenerate input (all points identical)");
  }

  Rng rng(kPcaStartSeed);
  auto [v1, lambda1] = power_iterate(cov, nullptr, rng);

  Matrix deflated = cov;
  for (int a = 0; a < d; ++a) {
    for (int bcol = 0; bcol < d; ++bcol) deflated(a, bcol) -= lambda1 * v1[a] * v1[bcol];
  }
  auto [v2, lambda2] = power_iterate(deflated, &v1, rng);

  if (lambda2 > lambda1) {
    std::swap(v1, v2);
    std::swap(lambda1, lambda2);
  }

  PcaResult res;
  res.projections = Matrix(n, 2);
  Vector col1(n), col2(n);
  for (int i = 0; i < n; ++i) {
    col1[i] = dot(centered.row(i), std::span<const double>(v1));
    col2[i] = dot(centered.row(i), std::span<const double>(v2));
  }
  fix_sign(v1, col1);
  fix_sign(v2, col2);
  for (int i = 0; i < n; ++i) {
    res.projections(i, 0) = col1[i];
    res.projections(i, 1) = col2[i];
  }
  res.components = Matrix(2, d);
  for (int j = 0; j < d; ++j) {
    res.components(0, j) = v1[j];
    res.components(1, j) = v2[j];
  }
  res.explained_share = {lambda1 / total_var, lambda2 / total_var};
  return res;
}

BiasReport bias_report(std::span<const ModelArtifact> tb_models,
                       std::span<const ModelArtifact> ub_models,
                       const UserStatsTable& stats) {
  if (tb_models.empty() || ub_models.empty()) {
    throw std::invalid_argument("bias_report: need at least one repetition of each variant");
  }
  for (const ModelArtifact& a : tb_models) {
    if (a.params.variant != Variant::tbRNN) throw std::invalid_argument("bias_report: expected tbRNN");
  }
  for (const ModelArtifact& a : ub_models) {
    if (a.params.variant != Variant::ubRNN) throw std::invalid_argument("bias_report: expected ubRNN");
  }

  BiasReport report;
  for (int t = 0; t < kNumUserTypes; ++t) {
    BiasRow& row = report.rows[t];
    row.type = static_cast<UserType>(t);

    std::vector<double> tb_vals;
    for (const ModelArtifact& a : tb_models) tb_vals.push_back(a.params.user_bias[t]);
    const MeanStderr tb = mean_and_stderr(tb_vals);
    row.tb_mean = tb.mean;
    row.tb_stderr = tb.stderr_;

    // Per repetition: mean b_u over the trained users of this type; the
    // shared unknown slot stands in for the Unknown type.
    std::vector<double> ub_vals;
    int n_users = 0;
    for (const ModelArtifact& a : ub_models) {
      double sum = 0.0;
      int count = 0;
      if (row.type == UserType::Unknown) {
        sum = a.params.user_bias[a.slots.unknown_slot];
        count = 1;
      } else {
        for (std::size_t s = 0; s < a.slots.slot_user.size(); ++s) {
          if (stats.lookup(a.slots.slot_user[s]).type == row.type) {
            sum += a.params.user_bias[s];
            ++count;
          }
        }
      }
      n_users = count;
      ub_vals.push_back(count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN());
    }
    row.ub_users = n_users;
    const MeanStderr ub = mean_and_stderr(ub_vals);
    row.ub_mean = ub.mean;
    row.ub_stderr = ub.stderr_;
  }
  return report;
}

std::string bias_report_csv(const BiasReport& report) {
  std::string csv = "user_type,tb_bias_mean,tb_bias_stderr,ub_bias_mean,ub_bias_stderr,ub_users\n";
  for (const BiasRow& row : report.rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%d\n", to_string(row.type),
                  row.tb_mean, row.tb_stderr, row.ub_mean, row.ub_stderr, row.ub_users);
    csv += buf;
  }
  return csv;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson: bad input");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

EmbeddingExport embedding_export(const ModelArtifact& ue_model, const UserStatsTable& stats) {
  if (ue_model.params.variant != Variant::ueRNN) {
    throw std::invalid_argument("embedding_export: expected a ueRNN model");
  }
  const int n_slots = ue_model.params.user_emb.rows;
  if (n_slots < 3) throw std::invalid_argument("embedding_export: need at least 3 user slots");

  EmbeddingExport out;
  out.pca = pca_project(ue_model.params.user_emb);

  out.csv = "user,slot,T,R,type,pc1,pc2\n";
  std::vector<double> pc1_trained, r_trained;
  for (int s = 0; s < n_slots; ++s) {
    const bool unknown = s == ue_model.slots.unknown_slot;
    const std::string user = unknown ? "<unknown>" : ue_model.slots.slot_user[s];
    const UserStats us = unknown ? UserStats{} : stats.lookup(user);
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.6f,%s,%.6f,%.6f\n", user.c_str(), s, us.T,
                  us.R, to_string(us.type), out.pca.projections(s, 0),
                  out.pca.projections(s, 1));
    out.csv += buf;
    if (!unknown) {
      pc1_trained.push_back(out.pca.projections(s, 0));
      r_trained.push_back(us.R);
    }
  }
  out.pc1_r_correlation =
      pc1_trained.size() >= 2 ? pearson(pc1_trained, r_trained) : 0.0;
  return out;
}

}  // namespace commod
