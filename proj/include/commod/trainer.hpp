#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "commod/corpus.hpp"
#include "commod/model.hpp"

namespace commod {

struct TrainConfig {
  int d = 300;
  int m = 128;
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 128;
  int max_epochs = 20;
  int patience = 3;
  double holdout_fraction = 0.02;
  int truncation_cap = 300;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  bool parallel = true;
  std::string pretrained_embeddings;  // optional path
};

TrainConfig parse_train_config(const std::string& path);
std::string train_config_text(const TrainConfig& cfg);

struct TrainHistory {
  std::vector<double> train_loss;    // running mean over the epoch's batches
  std::vector<double> holdout_loss;  // early-stopping metric
  std::vector<double> holdout_auc;   // NaN if the holdout is single-class
  int best_epoch = 0;                // 1-based
  std::string stop_reason;           // "early_stop" or "max_epochs"
};

struct TrainedModel {
  ModelArtifact artifact;
  TrainHistory history;
  std::uint64_t seed = 0;
};

// Optional hook replacing the holdout-loss evaluation; receives the epoch
// (1-based) and the current parameters. Used by tests to script the
// early-stopping trace.
using HoldoutEval = std::function<double(int, const ModelParameters&)>;

TrainedModel train_model(const Corpus& corpus, Variant variant, const TrainConfig& config,
                         std::uint64_t seed, const HoldoutEval& holdout_override = nullptr);

// Independent repetitions, one per config seed (fresh init, fresh shuffles).
std::vector<TrainedModel> run_experiment(const Corpus& corpus, Variant variant,
                                         const TrainConfig& config);

}  // namespace commod
