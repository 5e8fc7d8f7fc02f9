#include "commod/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "commod/batch.hpp"

namespace commod {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: length mismatch");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw std::invalid_argument("roc_auc: labels must be 0/1");
    n_pos += l;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("roc_auc: both classes required");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney via average ranks; tied scores share their mean rank,
  // crediting 0.5 per tied (positive, negative) pair.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double n_pos_d = static_cast<double>(n_pos);
  return (pos_rank_sum - n_pos_d * (n_pos_d + 1.0) / 2.0) /
         (n_pos_d * static_cast<double>(n_neg));
}

MeanStderr mean_and_stderr(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_and_stderr: empty input");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, sd / std::sqrt(n)};
}

EvalReport make_report(const std::string& variant, const std::string& split,
                       std::vector<double> auc_values, std::size_t n_examples,
                       double positive_rate) {
  EvalReport r;
  r.variant = variant;
  r.split = split;
  r.auc_values = std::move(auc_values);
  const MeanStderr ms = mean_and_stderr(r.auc_values);
  r.auc_mean = ms.mean;
  r.auc_stderr = ms.stderr_;
  r.n_examples = n_examples;
  r.positive_rate = positive_rate;
  return r;
}

namespace {

struct SplitLabels {
  std::vector<const Comment*> comments;
  std::vector<int> labels;
  double positive_rate = 0.0;
};

SplitLabels split_labels(const Corpus& corpus, Split split) {
  SplitLabels out;
  out.comments = corpus.split_view(split);
  if (out.comments.empty()) {
    throw std::invalid_argument(std::string("evaluate: empty split ") + to_string(split));
  }
  out.labels.reserve(out.comments.size());
  std::size_t pos = 0;
  for (const Comment* c : out.comments) {
    const int y = c->label == Label::Reject ? 1 : 0;
    out.labels.push_back(y);
    pos += y;
  }
  out.positive_rate = static_cast<double>(pos) / static_cast<double>(out.comments.size());
  return out;
}

}  // namespace

double evaluate_model(const ModelArtifact& artifact, const Corpus& corpus, Split split) {
  const SplitLabels sl = split_labels(corpus, split);
  const UserStatsTable stats = compute_user_stats(corpus);

  std::vector<EncodedExample> examples;
  examples.reserve(sl.comments.size());
  for (const Comment* c : sl.comments) {
    examples.push_back(encode_example(*c, artifact.vocab, stats, artifact.slots,
                                      artifact.params.variant));
  }
  std::vector<double> scores(examples.size());
  score_examples_parallel(examples, artifact.params, scores);
  return roc_auc(scores, sl.labels);
}

double evaluate_baseline(Variant baseline, const UserStatsTable& stats,
                         const Corpus& corpus, Split split) {
  if (is_neural(baseline)) throw std::invalid_argument("evaluate_baseline: not a baseline");
  const SplitLabels sl = split_labels(corpus, split);
  std::vector<double> scores;
  scores.reserve(sl.comments.size());
  for (const Comment* c : sl.comments) {
    scores.push_back(baseline == Variant::uBASE
                         ? ubase_score(c->author, stats)
                         : tbase_score(stats.lookup(c->author).type));
  }
  return roc_auc(scores, sl.labels);
}

std::string format_auc_cell(double mean, double stderr_) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f (+-%.2f)", 100.0 * mean, 100.0 * stderr_);
  return buf;
}

std::string report_csv_header() {
  return "variant,split,n_examples,positive_rate,auc_mean,auc_stderr,auc_values";
}

std::string report_csv_row(const EvalReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s,%s,%zu,%.6f,%.4f,%.4f,", r.variant.c_str(),
                r.split.c_str(), r.n_examples, r.positive_rate, 100.0 * r.auc_mean,
                100.0 * r.auc_stderr);
  std::string row = buf;
  for (std::size_t i = 0; i < r.auc_values.size(); ++i) {
    char v[32];
    std::snprintf(v, sizeof(v), "%s%.4f", i ? "|" : "", 100.0 * r.auc_values[i]);
    row += v;
  }
  return row;
}

void write_report_csv(const std::vector<EvalReport>& reports, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report " + path);
  out << report_csv_header() << '\n';
  for (const EvalReport& r : reports) out << report_csv_row(r) << '\n';
}

}  // namespace commod
