#pragma once

#include <span>
#include <string>
#include <vector>

#include "commod/corpus.hpp"
#include "commod/model.hpp"

namespace commod {

// Tie-aware ROC-AUC (Mann-Whitney: ties credit 0.5), rank-based O(n log n).
// Requires both classes present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample sd (n-1) / sqrt(n); 0 when n == 1
};

MeanStderr mean_and_stderr(std::span<const double> values);

struct EvalReport {
  std::string variant;
  std::string split;
  std::vector<double> auc_values;  // per repetition, in [0,1]
  double auc_mean = 0.0;
  double auc_stderr = 0.0;
  std::size_t n_examples = 0;
  double positive_rate = 0.0;
};

EvalReport make_report(const std::string& variant, const std::string& split,
                       std::vector<double> auc_values, std::size_t n_examples,
                       double positive_rate);

// Scores every comment of the split in corpus order (reject -> 1) and
// returns its AUC. Errors if the split is empty or single-class.
double evaluate_model(const ModelArtifact& artifact, const Corpus& corpus, Split split);
double evaluate_baseline(Variant baseline, const UserStatsTable& stats,
                         const Corpus& corpus, Split split);

// "80.71 (+-0.13)" style cell, AUC in percentage points.
std::string format_auc_cell(double mean, double stderr_);

// One CSV row per report; deterministic field order, AUC in percentage points.
std::string report_csv_header();
std::string report_csv_row(const EvalReport& r);
void write_report_csv(const std::vector<EvalReport>& reports, const std::string& path);

}  // namespace commod
