#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "commod/corpus.hpp"
#include "commod/la.hpp"
#include "commod/model.hpp"

namespace commod {

struct PcaResult {
  Matrix components;    // 2 x d, orthonormal; sign: largest-|entry| positive
  Matrix projections;   // n x 2, centered per axis
  std::array<double, 2> explained_share{};  // non-increasing, in [0,1]
};

// Top-2 principal components via power iteration with deflation
// (tolerance 1e-9, at most 1000 iterations per component).
// Requires n >= 3, d >= 2 and non-degenerate input.
PcaResult pca_project(const Matrix& vectors);

struct BiasRow {
  UserType type;
  double tb_mean = 0.0;  // tbRNN b_t across repetitions
  double tb_stderr = 0.0;
  double ub_mean = 0.0;  // ubRNN: per-type mean of b_u, then across repetitions
  double ub_stderr = 0.0;
  int ub_users = 0;      // trained users of this type (unknown slot counts as Unknown)
};

struct BiasReport {
  std::array<BiasRow, kNumUserTypes> rows;  // Red, Yellow, Green, Unknown
};

BiasReport bias_report(std::span<const ModelArtifact> tb_models,
                       std::span<const ModelArtifact> ub_models,
                       const UserStatsTable& stats);

std::string bias_report_csv(const BiasReport& report);

struct EmbeddingExport {
  std::string csv;          // user,slot,T,R,type,pc1,pc2
  double pc1_r_correlation = 0.0;  // Pearson between pc1 and R(u), report-only
  PcaResult pca;
};

// One row per trained user slot plus the unknown slot of a ueRNN model.
EmbeddingExport embedding_export(const ModelArtifact& ue_model, const UserStatsTable& stats);

double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace commod
