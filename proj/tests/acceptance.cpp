// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 5 trains every variant on the frozen synthetic corpus,
// so the full run takes a few minutes on a laptop CPU.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "commod/analysis.hpp"
#include "commod/batch.hpp"
#include "commod/eval.hpp"
#include "commod/model.hpp"
#include "commod/trainer.hpp"

using namespace commod;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& what, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++g_failures;
}

double now() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double auc_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels) {
  double credit = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) credit += 1.0;
      else if (scores[i] == scores[j]) credit += 0.5;
    }
  }
  return credit / static_cast<double>(pairs);
}

// Training setup used for the ordering criteria: desk-scale widths tuned so
// the full five-variant sweep stays well inside the runtime budget on two
// laptop cores.
TrainConfig acceptance_config() {
  TrainConfig cfg;
  cfg.d = 48;
  cfg.m = 24;
  cfg.alpha = 0.003;
  cfg.batch_size = 64;
  cfg.max_epochs = 25;
  cfg.patience = 5;
  cfg.seeds = {1, 2, 3};
  return cfg;
}

void criterion_1_auc_oracle() {
  const double t0 = now();
  bool ok = true;
  std::string detail;

  const std::vector<double> worked{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> worked_labels{0, 0, 1, 1};
  ok = ok && roc_auc(worked, worked_labels) == 0.75;

  Rng rng(20250810);
  double max_diff = 0.0;
  for (int instance = 0; instance < 200; ++instance) {
    const int n = 2 + static_cast<int>(rng.next_below(499));
    const int levels = 1 + static_cast<int>(rng.next_below(10));  // duplicated scores
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.next_below(levels)) / levels;
      labels[i] = rng.next_double() < 0.5 ? 0 : 1;
    }
    labels[0] = 0;
    labels[n - 1] = 1;
    max_diff = std::max(max_diff,
                        std::fabs(roc_auc(scores, labels) - auc_bruteforce(scores, labels)));
  }
  ok = ok && max_diff < 1e-12;
  const double secs = now() - t0;
  ok = ok && secs < 5.0;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |rank - brute| = %.2e over 200 instances, %.2fs",
                max_diff, secs);
  report(1, "AUC oracle equivalence", ok, buf);
}

void criterion_2_gradients() {
  const double t0 = now();
  SyntheticSpec spec;
  spec.n_users = 12;
  spec.n_train = 60;
  spec.n_dev = 10;
  spec.n_test = 10;
  spec.vocab_size = 30;
  spec.abusive_fraction = 0.2;
  spec.seed = 99;
  Corpus corpus = generate_synthetic(spec);
  UserStatsTable stats = compute_user_stats(corpus);
  Vocabulary vocab = build_vocabulary(corpus);
  SlotMap slots = build_slot_map(corpus, stats);

  bool ok = true;
  double worst = 0.0;
  std::string worst_group;
  for (Variant variant : {Variant::RNN, Variant::ueRNN, Variant::teRNN, Variant::ubRNN,
                          Variant::tbRNN}) {
    Rng rng(7 + static_cast<int>(variant));
    ModelParameters p = init_parameters(variant, vocab.size(), 8, 6, slots.n_slots(), rng);
    for (double& w : p.embeddings.a) w = rng.uniform(-0.5, 0.5);
    for (double& w : p.user_emb.a) w = rng.uniform(-0.5, 0.5);

    EncodedExample ex = encode_example(*corpus.split_view(Split::Train)[3], vocab, stats,
                                       slots, variant);
    if (ex.tokens.size() > 6) ex.tokens.resize(6);
    ex.y = 1.0;

    ExampleGradients eg;
    model_backward(ex, p, eg);
    ModelGradients dense(p);
    accumulate(dense, eg, p);

    auto pv = p.views();
    const auto gv = dense.views();
    auto loss = [&]() { return bce_loss_and_grad(model_forward(ex, p), ex.y).loss; };
    for (const GroupCheck& c : finite_difference_check(loss, pv, gv, 1e-5)) {
      if (c.max_rel_err > worst) {
        worst = c.max_rel_err;
        worst_group = std::string(to_string(variant)) + "/" + c.name;
      }
      ok = ok && c.max_rel_err < 1e-4;
    }
  }
  const double secs = now() - t0;
  ok = ok && secs < 60.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "worst group %s rel err %.2e, %.1fs", worst_group.c_str(),
                worst, secs);
  report(2, "gradient correctness (5 variants, d=8 m=6 k<=6)", ok, buf);
}

void criterion_3_reductions() {
  SyntheticSpec spec;
  spec.n_users = 15;
  spec.n_train = 150;
  spec.n_dev = 20;
  spec.n_test = 20;
  spec.seed = 1234;
  Corpus corpus = generate_synthetic(spec);
  UserStatsTable stats = compute_user_stats(corpus);
  Vocabulary vocab = build_vocabulary(corpus);
  SlotMap slots = build_slot_map(corpus, stats);

  Rng rng(55);
  ModelParameters rnn = init_parameters(Variant::RNN, vocab.size(), 6, 5, slots.n_slots(), rng);
  rnn.b = 0.21;

  const double beta = -0.4;
  ModelParameters ub = rnn;
  ub.variant = Variant::ubRNN;
  ub.b = 0.0;
  ub.user_bias.assign(slots.n_slots(), beta);
  ModelParameters rnn_beta = rnn;
  rnn_beta.b = beta;

  ModelParameters te = rnn;
  te.variant = Variant::teRNN;
  Vector tied(6);
  for (double& x : tied) x = rng.uniform(-0.7, 0.7);
  te.user_emb = Matrix(kNumUserTypes, 6);
  for (int t = 0; t < kNumUserTypes; ++t) {
    for (int j = 0; j < 6; ++j) te.user_emb(t, j) = tied[j];
  }
  te.w_v.resize(6);
  for (double& x : te.w_v) x = rng.uniform(-0.7, 0.7);
  ModelParameters rnn_shift = rnn;
  rnn_shift.b = rnn.b + dot(std::span<const double>(te.w_v), std::span<const double>(tied));

  double worst = 0.0;
  int checked = 0;
  for (const Comment& c : corpus.comments) {
    if (checked >= 100) break;
    ++checked;
    EncodedExample base = encode_example(c, vocab, stats, slots, Variant::RNN);
    EncodedExample ub_ex = encode_example(c, vocab, stats, slots, Variant::ubRNN);
    EncodedExample te_ex = encode_example(c, vocab, stats, slots, Variant::teRNN);
    worst = std::max(worst,
                     std::fabs(model_forward(ub_ex, ub) - model_forward(base, rnn_beta)));
    worst = std::max(worst,
                     std::fabs(model_forward(te_ex, te) - model_forward(base, rnn_shift)));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max |score diff| = %.2e over %d comments", worst, checked);
  report(3, "architecture reduction identities", worst < 1e-12, buf);
}

void criterion_4_baselines() {
  // Generated corpus plus hand-built users pinned to the exact boundaries
  // T = 10, R = 0.33, R = 0.66.
  SyntheticSpec spec;
  spec.n_users = 20;
  spec.n_train = 400;
  spec.n_dev = 40;
  spec.n_test = 40;
  spec.seed = 77;
  Corpus corpus = generate_synthetic(spec);
  int id = 900000;
  auto add_user = [&corpus, &id](const std::string& author, int rejected, int total) {
    for (int i = 0; i < total; ++i) {
      Comment c;
      c.id = "b" + std::to_string(id++);
      c.author = author;
      c.tokens = {"w0001"};
      c.label = i < rejected ? Label::Reject : Label::Accept;
      c.split = Split::Train;
      corpus.comments.push_back(c);
    }
  };
  add_user("boundary_T10", 10, 10);     // T = 10 -> Unknown, uBASE 0.5
  add_user("boundary_R33", 33, 100);    // R = 0.33 -> Green
  add_user("boundary_R66", 66, 100);    // R = 0.66 -> Red
  add_user("boundary_T11", 4, 11);      // just above the T threshold

  UserStatsTable stats = compute_user_stats(corpus);
  bool ok = true;
  for (const auto& [user, s] : stats.by_user) {
    const double u = ubase_score(user, stats);
    const double expected_u = s.T > 10 ? s.R : 0.5;
    ok = ok && u == expected_u;

    const double t = tbase_score(s.type);
    double expected_t = 0.5;
    if (s.T > 10 && s.R >= 0.66) expected_t = 1.0;
    else if (s.T > 10 && s.R <= 0.33) expected_t = 0.0;
    ok = ok && t == expected_t;
  }
  ok = ok && stats.lookup("boundary_T10").type == UserType::Unknown;
  ok = ok && stats.lookup("boundary_R33").type == UserType::Green;
  ok = ok && stats.lookup("boundary_R66").type == UserType::Red;
  ok = ok && ubase_score("boundary_T10", stats) == 0.5;
  ok = ok && tbase_score(stats.lookup("boundary_R66").type) == 1.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%zu users checked exactly", stats.by_user.size());
  report(4, "baseline exactness incl. boundaries", ok, buf);
}

struct OrderingResult {
  std::map<std::string, double> mean_auc;
  std::vector<TrainedModel> tb_runs, ub_runs, ue_runs;
};

OrderingResult criterion_5_ordering() {
  const double t0 = now();
  const SyntheticSpec spec;  // frozen default: 5000/1000/1000, 100 users, seed 2017
  Corpus corpus = generate_synthetic(spec);
  UserStatsTable stats = compute_user_stats(corpus);
  const TrainConfig cfg = acceptance_config();

  OrderingResult out;
  std::printf("  training 5 variants x %zu seeds on the frozen synthetic corpus...\n",
              cfg.seeds.size());
  for (Variant variant : {Variant::RNN, Variant::ueRNN, Variant::teRNN, Variant::ubRNN,
                          Variant::tbRNN}) {
    std::vector<double> aucs;
    for (TrainedModel& run : run_experiment(corpus, variant, cfg)) {
      aucs.push_back(evaluate_model(run.artifact, corpus, Split::Test));
      if (variant == Variant::tbRNN) out.tb_runs.push_back(std::move(run));
      else if (variant == Variant::ubRNN) out.ub_runs.push_back(std::move(run));
      else if (variant == Variant::ueRNN) out.ue_runs.push_back(std::move(run));
    }
    const MeanStderr ms = mean_and_stderr(aucs);
    out.mean_auc[to_string(variant)] = ms.mean;
    std::printf("  %-6s test AUC %s\n", to_string(variant),
                format_auc_cell(ms.mean, ms.stderr_).c_str());
  }
  const double ubase = evaluate_baseline(Variant::uBASE, stats, corpus, Split::Test);
  const double tbase = evaluate_baseline(Variant::tBASE, stats, corpus, Split::Test);
  out.mean_auc["uBASE"] = ubase;
  out.mean_auc["tBASE"] = tbase;
  std::printf("  %-6s test AUC %s\n", "uBASE", format_auc_cell(ubase, 0).c_str());
  std::printf("  %-6s test AUC %s\n", "tBASE", format_auc_cell(tbase, 0).c_str());

  const double rnn = out.mean_auc["RNN"];
  bool ok = out.mean_auc["ueRNN"] > rnn + 0.02;
  ok = ok && out.mean_auc["ubRNN"] > rnn + 0.02;
  for (const char* v : {"ueRNN", "teRNN", "ubRNN", "tbRNN"}) {
    ok = ok && out.mean_auc[v] >= rnn;
  }
  for (const char* v : {"RNN", "ueRNN", "teRNN", "ubRNN", "tbRNN"}) {
    ok = ok && out.mean_auc[v] > ubase && out.mean_auc[v] > tbase;
  }
  const double secs = now() - t0;
  ok = ok && secs < 900.0;
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "ue-RNN gap %+.4f, ub-RNN gap %+.4f, runtime %.0fs (budget 900s)",
                out.mean_auc["ueRNN"] - rnn, out.mean_auc["ubRNN"] - rnn, secs);
  report(5, "synthetic ordering (user-aware > RNN > baselines)", ok, buf);
  return out;
}

void criterion_6_bias_ordering(const OrderingResult& runs) {
  const SyntheticSpec spec;
  Corpus corpus = generate_synthetic(spec);
  UserStatsTable stats = compute_user_stats(corpus);

  bool ok = runs.tb_runs.size() == 3 && !runs.ub_runs.empty();
  for (const TrainedModel& run : runs.tb_runs) {
    const Vector& bt = run.artifact.params.user_bias;
    const double red = bt[type_index(UserType::Red)];
    const double yellow = bt[type_index(UserType::Yellow)];
    const double green = bt[type_index(UserType::Green)];
    ok = ok && red > yellow && yellow > green;
  }

  std::vector<ModelArtifact> tb, ub;
  for (const TrainedModel& r : runs.tb_runs) tb.push_back(r.artifact);
  for (const TrainedModel& r : runs.ub_runs) ub.push_back(r.artifact);
  const BiasReport bias = bias_report(tb, ub, stats);
  const double ub_red = bias.rows[type_index(UserType::Red)].ub_mean;
  const double ub_green = bias.rows[type_index(UserType::Green)].ub_mean;
  ok = ok && ub_red > ub_green;

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "b_t ordering in %zu/%zu reps; mean ub bias Red %.3f > Green %.3f",
                runs.tb_runs.size(), runs.tb_runs.size(), ub_red, ub_green);
  report(6, "bias ordering (Red > Yellow > Green)", ok, buf);
}

void criterion_7_determinism() {
  SyntheticSpec spec;
  spec.n_users = 20;
  spec.n_train = 300;
  spec.n_dev = 50;
  spec.n_test = 50;
  spec.seed = 31;
  Corpus corpus = generate_synthetic(spec);

  TrainConfig cfg;
  cfg.d = 8;
  cfg.m = 6;
  cfg.batch_size = 32;
  cfg.max_epochs = 4;
  cfg.holdout_fraction = 0.05;

  TrainedModel a = train_model(corpus, Variant::ueRNN, cfg, 42);
  TrainedModel b = train_model(corpus, Variant::ueRNN, cfg, 42);
  save_model("/tmp/commod_acc_a.cmod", a.artifact);
  save_model("/tmp/commod_acc_b.cmod", b.artifact);

  std::ifstream fa("/tmp/commod_acc_a.cmod", std::ios::binary);
  std::ifstream fb("/tmp/commod_acc_b.cmod", std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(fa)),
                            std::istreambuf_iterator<char>());
  const std::string bytes_b((std::istreambuf_iterator<char>(fb)),
                            std::istreambuf_iterator<char>());
  const bool ok = !bytes_a.empty() && bytes_a == bytes_b;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%zu-byte artifacts identical", bytes_a.size());
  report(7, "training determinism (byte-identical artifacts)", ok, buf);
}

void criterion_8_pca(const OrderingResult& runs) {
  bool ok = true;

  // Covariance diag(9, 1) realized exactly by balanced (+-3, +-1) points,
  // rotated by a known angle.
  const double theta = 0.6283;
  const double c = std::cos(theta), s = std::sin(theta);
  const int n = 10000;
  Matrix x(n, 2);
  for (int i = 0; i < n; ++i) {
    const double g1 = (i % 2 == 0) ? 3.0 : -3.0;
    const double g2 = (i % 4 < 2) ? 1.0 : -1.0;
    x(i, 0) = c * g1 - s * g2;
    x(i, 1) = s * g1 + c * g2;
  }
  PcaResult planted = pca_project(x);
  const double angle = std::atan2(planted.components(0, 1), planted.components(0, 0));
  const double diff = std::fabs(std::remainder(angle - theta, std::numbers::pi));
  ok = ok && diff < 1e-3;

  // Orthonormality and centering on the trained user embeddings.
  const SyntheticSpec spec;
  Corpus corpus = generate_synthetic(spec);
  UserStatsTable stats = compute_user_stats(corpus);
  double corr = 0.0;
  if (!runs.ue_runs.empty()) {
    const EmbeddingExport ex = embedding_export(runs.ue_runs.front().artifact, stats);
    corr = ex.pc1_r_correlation;
    const Matrix& comp = ex.pca.components;
    double n1 = 0.0, n2 = 0.0, cross = 0.0;
    for (int j = 0; j < comp.cols; ++j) {
      n1 += comp(0, j) * comp(0, j);
      n2 += comp(1, j) * comp(1, j);
      cross += comp(0, j) * comp(1, j);
    }
    ok = ok && std::fabs(n1 - 1.0) < 1e-9 && std::fabs(n2 - 1.0) < 1e-9 &&
         std::fabs(cross) < 1e-9;
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < ex.pca.projections.rows; ++i) {
      m1 += ex.pca.projections(i, 0);
      m2 += ex.pca.projections(i, 1);
    }
    ok = ok && std::fabs(m1 / ex.pca.projections.rows) < 1e-9 &&
         std::fabs(m2 / ex.pca.projections.rows) < 1e-9;
  } else {
    ok = false;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "axis error %.2e rad; corr(pc1, R) = %.3f on trained ueRNN (report-only)",
                diff, corr);
  report(8, "PCA correctness", ok, buf);
}

void criterion_9_early_stopping() {
  SyntheticSpec spec;
  spec.n_users = 12;
  spec.n_train = 80;
  spec.n_dev = 16;
  spec.n_test = 16;
  spec.seed = 71;
  Corpus corpus = generate_synthetic(spec);

  TrainConfig cfg;
  cfg.d = 4;
  cfg.m = 3;
  cfg.batch_size = 16;
  cfg.max_epochs = 10;
  cfg.patience = 3;
  cfg.holdout_fraction = 0.1;

  const std::vector<double> trace{0.60, 0.55, 0.56, 0.57, 0.58, 0.01};
  std::map<int, ModelParameters> snapshots;
  auto mock = [&](int epoch, const ModelParameters& params) {
    snapshots.emplace(epoch, params);
    return trace.at(epoch - 1);
  };
  TrainedModel run = train_model(corpus, Variant::RNN, cfg, 5, mock);

  bool ok = run.history.holdout_loss.size() == 5;
  ok = ok && run.history.best_epoch == 2;
  ok = ok && run.history.stop_reason == "early_stop";
  if (ok) {
    ModelParameters& returned = run.artifact.params;
    ModelParameters& expected = snapshots.at(2);
    auto rv = returned.views();
    auto ev = expected.views();
    for (std::size_t g = 0; g < rv.size() && ok; ++g) {
      for (std::size_t i = 0; i < rv[g].values.size() && ok; ++i) {
        ok = rv[g].values[i] == ev[g].values[i];
      }
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "stopped after epoch %zu, restored epoch %d",
                run.history.holdout_loss.size(), run.history.best_epoch);
  report(9, "early stopping on the scripted holdout trace", ok, buf);
}

}  // namespace

int main() {
  const double t0 = now();
  criterion_1_auc_oracle();
  criterion_2_gradients();
  criterion_3_reductions();
  criterion_4_baselines();
  const OrderingResult runs = criterion_5_ordering();
  criterion_6_bias_ordering(runs);
  criterion_7_determinism();
  criterion_8_pca(runs);
  criterion_9_early_stopping();
  std::printf("%d/9 criteria passed (%.0fs total)\n", 9 - g_failures, now() - t0);
  return g_failures == 0 ? 0 : 1;
}
