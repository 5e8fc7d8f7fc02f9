#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "commod/analysis.hpp"
#include "commod/batch.hpp"
#include "commod/eval.hpp"
#include "commod/manifest.hpp"
#include "commod/model.hpp"
#include "commod/trainer.hpp"
#include "commod/util.hpp"

namespace fs = std::filesystem;
using namespace commod;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void set_jobs(int jobs) {
#ifdef _OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#else
  (void)jobs;
#endif
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) seeds.push_back(std::stoull(item));
  }
  return seeds;
}

int cmd_synth(const SyntheticSpec& spec, const std::string& out_path) {
  const auto t0 = std::chrono::steady_clock::now();
  Corpus corpus = generate_synthetic(spec);
  fs::create_directories(fs::path(out_path).parent_path().empty()
                             ? fs::path(".")
                             : fs::path(out_path).parent_path());
  write_corpus(corpus, out_path);

  RunManifest manifest("synth");
  manifest.set_config("n_users", std::to_string(spec.n_users));
  manifest.set_config("n_train", std::to_string(spec.n_train));
  manifest.set_config("n_dev", std::to_string(spec.n_dev));
  manifest.set_config("n_test", std::to_string(spec.n_test));
  manifest.set_config("vocab_size", std::to_string(spec.vocab_size));
  manifest.set_config("abusive_fraction", std::to_string(spec.abusive_fraction));
  manifest.set_config("user_propensity_spread", std::to_string(spec.user_propensity_spread));
  manifest.add_seed(spec.seed);
  manifest.add_artifact(out_path);
  manifest.add_timing("generate", seconds_since(t0));
  manifest.write(out_path + ".manifest.json");

  std::cout << "wrote " << corpus.comments.size() << " comments to " << out_path << "\n";
  return 0;
}

int cmd_stats(const std::string& corpus_path, const std::string& csv_path) {
  Corpus corpus = ingest_corpus(corpus_path);
  UserStatsTable stats = compute_user_stats(corpus);

  const Split splits[] = {Split::Train, Split::Dev, Split::Test};
  std::printf("%-8s %9s %9s | %8s %8s %8s %8s | %8s\n", "split", "accepted", "rejected",
              "Green", "Yellow", "Red", "Unknown", "total");
  std::string csv = "split,accepted,rejected,green,yellow,red,unknown,total\n";
  for (Split s : splits) {
    std::size_t acc = 0, rej = 0;
    std::size_t per_type[kNumUserTypes] = {0, 0, 0, 0};
    for (const Comment& c : corpus.comments) {
      if (c.split != s) continue;
      (c.label == Label::Accept ? acc : rej) += 1;
      per_type[type_index(stats.lookup(c.author).type)] += 1;
    }
    const std::size_t total = acc + rej;
    std::printf("%-8s %9zu %9zu | %8zu %8zu %8zu %8zu | %8zu\n", to_string(s), acc, rej,
                per_type[2], per_type[1], per_type[0], per_type[3], total);
    char row[256];
    std::snprintf(row, sizeof(row), "%s,%zu,%zu,%zu,%zu,%zu,%zu,%zu\n", to_string(s), acc,
                  rej, per_type[2], per_type[1], per_type[0], per_type[3], total);
    csv += row;
  }

  // Users per type, over train-split statistics.
  std::size_t users_per_type[kNumUserTypes] = {0, 0, 0, 0};
  for (const auto& [user, us] : stats.by_user) users_per_type[type_index(us.type)] += 1;
  std::printf("\n%-8s %8s %8s %8s %8s | %8s\n", "users", "Green", "Yellow", "Red",
              "Unknown", "total");
  std::printf("%-8s %8zu %8zu %8zu %8zu | %8zu\n", "all", users_per_type[2],
              users_per_type[1], users_per_type[0], users_per_type[3], stats.by_user.size());

  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::binary);
    out << csv;
    std::cout << "wrote " << csv_path << "\n";
  }
  return 0;
}

int cmd_train(const std::string& corpus_path, const std::string& variant_name,
              const std::string& out_dir, TrainConfig cfg, int jobs) {
  set_jobs(jobs);
  const Variant variant = variant_from_string(variant_name);
  if (!is_neural(variant)) {
    std::cerr << "train: " << variant_name << " is a deterministic baseline; nothing to train\n";
    return 2;
  }
  Corpus corpus = ingest_corpus(corpus_path);
  fs::create_directories(out_dir);

  RunManifest manifest("train");
  manifest.set_input("corpus", corpus_path);
  manifest.set_config("variant", variant_name);
  manifest.set_config("config", train_config_text(cfg));

  for (std::uint64_t seed : cfg.seeds) {
    manifest.add_seed(seed);
    const auto t0 = std::chrono::steady_clock::now();
    TrainedModel run = train_model(corpus, variant, cfg, seed);
    const double secs = seconds_since(t0);

    const std::string model_path = out_dir + "/model_seed" + std::to_string(seed) + ".cmod";
    save_model(model_path, run.artifact);
    manifest.add_artifact(model_path);
    manifest.add_timing("train_seed" + std::to_string(seed), secs);

    const std::string hist_path = out_dir + "/history_seed" + std::to_string(seed) + ".csv";
    std::ofstream hist(hist_path, std::ios::binary);
    hist << "epoch,train_loss,holdout_loss,holdout_auc\n";
    for (std::size_t e = 0; e < run.history.train_loss.size(); ++e) {
      char row[128];
      std::snprintf(row, sizeof(row), "%zu,%.6f,%.6f,%.6f\n", e + 1,
                    run.history.train_loss[e], run.history.holdout_loss[e],
                    run.history.holdout_auc[e]);
      hist << row;
    }
    hist.close();
    manifest.add_artifact(hist_path);

    std::printf("seed %llu: best epoch %d (%s), %zu epochs, %.1fs -> %s\n",
                static_cast<unsigned long long>(seed), run.history.best_epoch,
                run.history.stop_reason.c_str(), run.history.train_loss.size(), secs,
                model_path.c_str());
  }
  manifest.write(out_dir + "/manifest.json");
  return 0;
}

int cmd_eval(const std::string& corpus_path, const std::vector<std::string>& split_names,
             const std::vector<std::string>& model_paths, bool baselines,
             const std::string& out_path, int jobs) {
  set_jobs(jobs);
  Corpus corpus = ingest_corpus(corpus_path);
  UserStatsTable stats = compute_user_stats(corpus);

  std::vector<ModelArtifact> artifacts;
  artifacts.reserve(model_paths.size());
  for (const std::string& path : model_paths) artifacts.push_back(load_model(path));

  std::vector<EvalReport> reports;
  for (const std::string& split_name : split_names) {
    const Split split = split_from_string(split_name);
    const auto view = corpus.split_view(split);
    std::size_t pos = 0;
    for (const Comment* c : view) pos += c->label == Label::Reject;
    const double pos_rate = view.empty() ? 0.0 : static_cast<double>(pos) / view.size();

    // Model repetitions grouped by variant -> one report row per variant.
    std::map<std::string, std::vector<double>> auc_by_variant;
    for (const ModelArtifact& artifact : artifacts) {
      const double auc = evaluate_model(artifact, corpus, split);
      auc_by_variant[to_string(artifact.params.variant)].push_back(auc);
    }
    for (auto& [variant, aucs] : auc_by_variant) {
      reports.push_back(make_report(variant, split_name, aucs, view.size(), pos_rate));
    }
    if (baselines) {
      for (Variant b : {Variant::uBASE, Variant::tBASE}) {
        const double auc = evaluate_baseline(b, stats, corpus, split);
        reports.push_back(make_report(to_string(b), split_name, {auc}, view.size(), pos_rate));
      }
    }
  }

  std::printf("%-8s %-6s %s\n", "variant", "split", "AUC");
  for (const EvalReport& r : reports) {
    std::printf("%-8s %-6s %s\n", r.variant.c_str(), r.split.c_str(),
                format_auc_cell(r.auc_mean, r.auc_stderr).c_str());
  }
  if (!out_path.empty()) {
    write_report_csv(reports, out_path);
    RunManifest manifest("eval");
    manifest.set_input("corpus", corpus_path);
    for (const std::string& p : model_paths) manifest.set_input("model", p);
    manifest.add_artifact(out_path);
    manifest.write(out_path + ".manifest.json");
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int cmd_analyze(const std::string& corpus_path, const std::string& ue_path,
                const std::vector<std::string>& ub_paths,
                const std::vector<std::string>& tb_paths, const std::string& out_dir) {
  Corpus corpus = ingest_corpus(corpus_path);
  UserStatsTable stats = compute_user_stats(corpus);
  fs::create_directories(out_dir);
  RunManifest manifest("analyze");
  manifest.set_input("corpus", corpus_path);

  if (!ue_path.empty()) {
    ModelArtifact ue = load_model(ue_path);
    EmbeddingExport ex = embedding_export(ue, stats);
    const std::string path = out_dir + "/user_embeddings_pca.csv";
    std::ofstream out(path, std::ios::binary);
    out << ex.csv;
    out.close();
    manifest.add_artifact(path);
    std::printf("user-embedding PCA: explained shares %.3f / %.3f, corr(pc1, R) = %.3f\n",
                ex.pca.explained_share[0], ex.pca.explained_share[1], ex.pc1_r_correlation);
    std::cout << "wrote " << path << "\n";
  }

  if (!ub_paths.empty() && !tb_paths.empty()) {
    std::vector<ModelArtifact> tb, ub;
    for (const auto& p : tb_paths) tb.push_back(load_model(p));
    for (const auto& p : ub_paths) ub.push_back(load_model(p));
    BiasReport report = bias_report(tb, ub, stats);
    const std::string path = out_dir + "/bias_report.csv";
    std::ofstream out(path, std::ios::binary);
    out << bias_report_csv(report);
    out.close();
    manifest.add_artifact(path);
    std::printf("%-8s %22s %22s\n", "type", "b_t (tbRNN)", "mean b_u (ubRNN)");
    for (const BiasRow& row : report.rows) {
      std::printf("%-8s %10.3f (+-%.3f) %10.3f (+-%.3f)\n", to_string(row.type), row.tb_mean,
                  row.tb_stderr, row.ub_mean, row.ub_stderr);
    }
    std::cout << "wrote " << path << "\n";
  } else if (!ub_paths.empty() || !tb_paths.empty()) {
    std::cerr << "analyze: bias report needs at least one --ub-model and one --tb-model\n";
    return 2;
  }
  manifest.write(out_dir + "/manifest.json");
  return 0;
}

// Finite-difference sweep over every variant at small dimensions.
int cmd_gradcheck() {
  const SyntheticSpec spec{.n_users = 12,
                           .n_train = 60,
                           .n_dev = 10,
                           .n_test = 10,
                           .vocab_size = 30,
                           .abusive_fraction = 0.2,
                           .user_propensity_spread = 0.9,
                           .seed = 99};
  Corpus corpus = generate_synthetic(spec);
  UserStatsTable stats = compute_user_stats(corpus);
  Vocabulary vocab = build_vocabulary(corpus);
  SlotMap slots = build_slot_map(corpus, stats);

  const int d = 8, m = 6;
  bool all_ok = true;
  for (Variant variant : {Variant::RNN, Variant::ueRNN, Variant::teRNN, Variant::ubRNN,
                          Variant::tbRNN}) {
    Rng rng(7 + static_cast<int>(variant));
    ModelParameters params =
        init_parameters(variant, vocab.size(), d, m, slots.n_slots(), rng);
    // O(1)-scale lookup tables: keeps every gradient element well above the
    // finite-difference noise floor, which is what this sweep measures.
    for (double& w : params.embeddings.a) w = rng.uniform(-0.5, 0.5);
    for (double& w : params.user_emb.a) w = rng.uniform(-0.5, 0.5);

    const Comment* probe = corpus.split_view(Split::Train)[3];
    EncodedExample ex = encode_example(*probe, vocab, stats, slots, variant);
    if (ex.tokens.size() > 6) ex.tokens.resize(6);

    ExampleGradients eg;
    model_backward(ex, params, eg);
    ModelGradients dense(params);
    accumulate(dense, eg, params);

    auto pviews = params.views();
    const auto gviews = dense.views();
    auto loss_fn = [&]() { return bce_loss_and_grad(model_forward(ex, params), ex.y).loss; };
    const auto checks = finite_difference_check(loss_fn, pviews, gviews);

    std::printf("%s (d=%d, m=%d, k=%zu):\n", to_string(variant), d, m, ex.tokens.size());
    for (const GroupCheck& c : checks) {
      const bool ok = c.max_rel_err < 1e-4;
      all_ok = all_ok && ok;
      std::printf("  %-12s max rel err %.3e  %s\n", c.name.c_str(), c.max_rel_err,
                  ok ? "ok" : "FAIL");
    }
  }
  std::printf(all_ok ? "gradcheck: all groups < 1e-4\n" : "gradcheck: FAILURES above\n");
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"comment-moderation experiments: GRU classifier with user-aware heads"};
  app.require_subcommand(1);

  // synth
  SyntheticSpec spec;
  std::string synth_out = "corpus.jsonl";
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--out", synth_out, "output corpus path");
  synth->add_option("--n-users", spec.n_users);
  synth->add_option("--n-train", spec.n_train);
  synth->add_option("--n-dev", spec.n_dev);
  synth->add_option("--n-test", spec.n_test);
  synth->add_option("--vocab-size", spec.vocab_size);
  synth->add_option("--abusive-fraction", spec.abusive_fraction);
  synth->add_option("--spread", spec.user_propensity_spread);
  synth->add_option("--seed", spec.seed);

  // stats
  std::string stats_corpus, stats_csv;
  auto* stats_cmd = app.add_subcommand("stats", "per-split label and user-type tables");
  stats_cmd->add_option("--corpus", stats_corpus)->required();
  stats_cmd->add_option("--csv", stats_csv, "also write a CSV summary");

  // train
  std::string train_corpus, train_variant, train_out = "runs", train_config_path, train_seeds;
  TrainConfig cfg;
  int jobs = 0;
  auto* train = app.add_subcommand("train", "train a variant, one model per seed");
  train->add_option("--corpus", train_corpus)->required();
  train->add_option("--variant", train_variant)->required();
  train->add_option("--out", train_out, "output directory");
  train->add_option("--config", train_config_path, "key = value config file");
  train->add_option("--seeds", train_seeds, "comma-separated seeds");
  int opt_d = -1, opt_m = -1, opt_batch = -1, opt_epochs = -1, opt_patience = -1, opt_cap = -1;
  double opt_alpha = -1.0, opt_holdout = -1.0;
  std::string opt_pretrained;
  train->add_option("--d", opt_d, "embedding width");
  train->add_option("--m", opt_m, "GRU hidden width");
  train->add_option("--alpha", opt_alpha, "Adam step size");
  train->add_option("--batch-size", opt_batch);
  train->add_option("--max-epochs", opt_epochs);
  train->add_option("--patience", opt_patience);
  train->add_option("--holdout", opt_holdout, "holdout fraction for early stopping");
  train->add_option("--cap", opt_cap, "token truncation cap");
  train->add_option("--pretrained", opt_pretrained, "pretrained word-embedding file");
  train->add_option("--jobs", jobs, "worker threads for the batch kernels");

  // eval
  std::string eval_corpus, eval_out;
  std::vector<std::string> eval_splits{"test"};
  std::vector<std::string> eval_models;
  bool eval_baselines = false;
  auto* eval_cmd = app.add_subcommand("eval", "AUC report for models and baselines");
  eval_cmd->add_option("--corpus", eval_corpus)->required();
  eval_cmd->add_option("--split", eval_splits, "train, dev, or test (repeatable)");
  eval_cmd->add_option("--model", eval_models, "model artifact (repeat per repetition)");
  eval_cmd->add_flag("--baselines", eval_baselines, "include uBASE and tBASE");
  eval_cmd->add_option("--out", eval_out, "CSV output path");
  eval_cmd->add_option("--jobs", jobs, "worker threads");

  // analyze
  std::string an_corpus, an_ue, an_out = "analysis";
  std::vector<std::string> an_ub, an_tb;
  auto* analyze = app.add_subcommand("analyze", "user-embedding PCA and bias report");
  analyze->add_option("--corpus", an_corpus)->required();
  analyze->add_option("--ue-model", an_ue, "trained ueRNN artifact");
  analyze->add_option("--ub-model", an_ub, "trained ubRNN artifact (repeatable)");
  analyze->add_option("--tb-model", an_tb, "trained tbRNN artifact (repeatable)");
  analyze->add_option("--out-dir", an_out);

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(spec, synth_out);
    if (stats_cmd->parsed()) return cmd_stats(stats_corpus, stats_csv);
    if (train->parsed()) {
      if (!train_config_path.empty()) cfg = parse_train_config(train_config_path);
      if (!train_seeds.empty()) cfg.seeds = parse_seeds(train_seeds);
      if (opt_d > 0) cfg.d = opt_d;
      if (opt_m > 0) cfg.m = opt_m;
      if (opt_alpha > 0) cfg.alpha = opt_alpha;
      if (opt_batch > 0) cfg.batch_size = opt_batch;
      if (opt_epochs > 0) cfg.max_epochs = opt_epochs;
      if (opt_patience > 0) cfg.patience = opt_patience;
      if (opt_holdout > 0) cfg.holdout_fraction = opt_holdout;
      if (opt_cap > 0) cfg.truncation_cap = opt_cap;
      if (!opt_pretrained.empty()) cfg.pretrained_embeddings = opt_pretrained;
      return cmd_train(train_corpus, train_variant, train_out, cfg, jobs);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(eval_corpus, eval_splits, eval_models, eval_baselines, eval_out, jobs);
    }
    if (analyze->parsed()) return cmd_analyze(an_corpus, an_ue, an_ub, an_tb, an_out);
    if (gradcheck->parsed()) return cmd_gradcheck();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
