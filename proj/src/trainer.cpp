#include "commod/trainer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "commod/batch.hpp"
#include "commod/eval.hpp"
#include "commod/rng.hpp"

namespace commod {

namespace {

void scale_gradients(ModelGradients& grads, double factor) {
  for (ParamView& v : grads.views()) {
    for (double& g : v.values) g *= factor;
  }
}

double holdout_auc_or_nan(std::span<const EncodedExample> holdout,
                          const ModelParameters& params) {
  bool has_pos = false, has_neg = false;
  for (const EncodedExample& ex : holdout) {
    (ex.y > 0.5 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> scores(holdout.size());
  std::vector<int> labels(holdout.size());
  score_examples_parallel(holdout, params, scores);
  for (std::size_t i = 0; i < holdout.size(); ++i) labels[i] = holdout[i].y > 0.5 ? 1 : 0;
  return roc_auc(scores, labels);
}

}  // namespace

TrainedModel train_model(const Corpus& corpus, Variant variant, const TrainConfig& config,
                         std::uint64_t seed, const HoldoutEval& holdout_override) {
  if (!is_neural(variant)) throw std::invalid_argument("train_model: baselines are not trained");
  if (config.d <= 0 || config.m <= 0 || config.batch_size <= 0 || config.max_epochs <= 0 ||
      config.patience <= 0 || config.truncation_cap <= 0 || config.alpha <= 0.0) {
    throw std::invalid_argument("train_model: config values must be positive");
  }
  const auto train_view = corpus.split_view(Split::Train);
  if (train_view.empty()) throw std::invalid_argument("train_model: empty training split");

  TrainedModel out;
  out.seed = seed;
  out.artifact.vocab = build_vocabulary(train_view);
  const UserStatsTable stats = compute_user_stats(corpus);
  out.artifact.slots = build_slot_map(corpus, stats);

  std::vector<EncodedExample> all_train;
  all_train.reserve(train_view.size());
  for (const Comment* c : train_view) {
    all_train.push_back(encode_example(*c, out.artifact.vocab, stats, out.artifact.slots,
                                       variant, config.truncation_cap));
  }

  const auto [fit_idx, holdout_idx] =
      holdout_split(all_train.size(), config.holdout_fraction, seed);
  std::vector<EncodedExample> fit, holdout;
  fit.reserve(fit_idx.size());
  holdout.reserve(holdout_idx.size());
  for (std::size_t i : fit_idx) fit.push_back(all_train[i]);
  for (std::size_t i : holdout_idx) holdout.push_back(all_train[i]);

  // One stream per repetition: initialization draws first, then the epoch
  // shuffles, in that order.
  Rng rng(seed);
  ModelParameters params = init_parameters(variant, out.artifact.vocab.size(), config.d,
                                           config.m, out.artifact.slots.n_slots(), rng);
  if (!config.pretrained_embeddings.empty()) {
    load_pretrained_embeddings(config.pretrained_embeddings, out.artifact.vocab,
                               params.embeddings);
  }

  AdamState adam(AdamConfig{config.alpha, config.beta1, config.beta2, config.adam_eps});
  ModelGradients grads(params);

  TrainHistory& hist = out.history;
  double best_loss = std::numeric_limits<double>::infinity();
  ModelParameters best_params = params;
  int bad_epochs = 0;
  hist.stop_reason = "max_epochs";

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(fit);
    double loss_sum = 0.0;
    const std::size_t n = fit.size();
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      std::span<const EncodedExample> batch(fit.data() + start, end - start);
      grads.zero();
      const BatchResult res = config.parallel
                                  ? batch_backward_parallel(batch, params, grads)
                                  : batch_backward_serial(batch, params, grads);
      loss_sum += res.loss_sum;
      scale_gradients(grads, 1.0 / static_cast<double>(res.n));
      auto pv = params.views();
      const auto gv = grads.views();
      adam_step(pv, gv, adam);
    }
    hist.train_loss.push_back(loss_sum / static_cast<double>(n));

    const double h_loss = holdout_override ? holdout_override(epoch, params)
                                           : mean_loss(holdout, params);
    hist.holdout_loss.push_back(h_loss);
    hist.holdout_auc.push_back(holdout_auc_or_nan(holdout, params));

    if (h_loss < best_loss) {
      best_loss = h_loss;
      best_params = params;
      hist.best_epoch = epoch;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs >= config.patience) {
        hist.stop_reason = "early_stop";
        break;
      }
    }
  }

  out.artifact.params = std::move(best_params);
  return out;
}

std::vector<TrainedModel> run_experiment(const Corpus& corpus, Variant variant,
                                         const TrainConfig& config) {
  if (config.seeds.empty()) throw std::invalid_argument("run_experiment: no seeds configured");
  std::vector<TrainedModel> runs;
  runs.reserve(config.seeds.size());
  for (std::uint64_t seed : config.seeds) {
    runs.push_back(train_model(corpus, variant, config, seed));
  }
  return runs;
}

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) seeds.push_back(std::stoull(item));
  }
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  return seeds;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

TrainConfig parse_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  TrainConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + " line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
      if (key == "d") cfg.d = std::stoi(value);
      else if (key == "m") cfg.m = std::stoi(value);
      else if (key == "alpha") cfg.alpha = std::stod(value);
      else if (key == "beta1") cfg.beta1 = std::stod(value);
      else if (key == "beta2") cfg.beta2 = std::stod(value);
      else if (key == "adam_eps") cfg.adam_eps = std::stod(value);
      else if (key == "batch_size") cfg.batch_size = std::stoi(value);
      else if (key == "max_epochs") cfg.max_epochs = std::stoi(value);
      else if (key == "patience") cfg.patience = std::stoi(value);
      else if (key == "holdout_fraction") cfg.holdout_fraction = std::stod(value);
      else if (key == "truncation_cap") cfg.truncation_cap = std::stoi(value);
      else if (key == "seeds") cfg.seeds = parse_seed_list(value);
      else if (key == "parallel") cfg.parallel = (value == "1" || value == "true");
      else if (key == "pretrained_embeddings") cfg.pretrained_embeddings = value;
      else throw std::invalid_argument("unknown key \"" + key + "\"");
    } catch (const std::exception& e) {
      throw std::runtime_error(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

std::string train_config_text(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "d = " << cfg.d << '\n'
      << "m = " << cfg.m << '\n'
      << "alpha = " << cfg.alpha << '\n'
      << "beta1 = " << cfg.beta1 << '\n'
      << "beta2 = " << cfg.beta2 << '\n'
      << "adam_eps = " << cfg.adam_eps << '\n'
      << "batch_size = " << cfg.batch_size << '\n'
      << "max_epochs = " << cfg.max_epochs << '\n'
      << "patience = " << cfg.patience << '\n'
      << "holdout_fraction = " << cfg.holdout_fraction << '\n'
      << "truncation_cap = " << cfg.truncation_cap << '\n';
  out << "seeds = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) out << (i ? "," : "") << cfg.seeds[i];
  out << '\n';
  out << "parallel = " << (cfg.parallel ? "true" : "false") << '\n';
  if (!cfg.pretrained_embeddings.empty()) {
    out << "pretrained_embeddings = " << cfg.pretrained_embeddings << '\n';
  }
  return out.str();
}

}  // namespace commod
