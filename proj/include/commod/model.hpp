#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "commod/corpus.hpp"
#include "commod/gru.hpp"
#include "commod/la.hpp"
#include "commod/nn.hpp"
#include "commod/rng.hpp"

namespace commod {

enum class Variant { RNN, ueRNN, teRNN, ubRNN, tbRNN, uBASE, tBASE };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);
bool is_neural(Variant v);
bool uses_user_slot(Variant v);   // ueRNN, ubRNN
bool uses_user_type(Variant v);   // teRNN, tbRNN

// Training users with T > 10 get stable slots in order of first appearance
// in the training split; everyone else shares the trailing unknown slot.
struct SlotMap {
  std::unordered_map<std::string, int> user_to_slot;
  std::vector<std::string> slot_user;  // per trained slot; excludes unknown
  int unknown_slot = 0;

  int n_slots() const { return unknown_slot + 1; }
};

SlotMap build_slot_map(const Corpus& corpus, const UserStatsTable& stats);
int resolve_user_slot(const std::string& author, const SlotMap& slots);

constexpr double kUserTableInitRange = 0.05;

// All trainable state of one variant. user_emb/w_v exist for ueRNN/teRNN,
// user_bias for ubRNN/tbRNN (which drop the global head bias b).
struct ModelParameters {
  Variant variant = Variant::RNN;
  Matrix embeddings;   // vocab_size x d
  GruWeights gru;      // d -> m
  Vector w_p;          // m
  double b = 0.0;
  Matrix user_emb;     // n_slots x d (ueRNN) or 4 x d (teRNN)
  Vector w_v;          // d
  Vector user_bias;    // n_slots (ubRNN) or 4 (tbRNN)

  int embed_dim() const { return embeddings.cols; }
  int hidden_dim() const { return gru.hidden_dim(); }
  bool has_global_bias() const;

  // Mutable named views over every trainable group, in a fixed order shared
  // with ModelGradients, Adam and the serializer.
  std::vector<ParamView> views();
};

ModelParameters init_parameters(Variant variant, int vocab_size, int d, int m,
                                int n_slots, Rng& rng);

// Dense gradient mirror of ModelParameters.
struct ModelGradients {
  Variant variant = Variant::RNN;
  Matrix embeddings;
  GruGrads gru;
  Vector w_p;
  double b = 0.0;
  Matrix user_emb;
  Vector w_v;
  Vector user_bias;

  explicit ModelGradients(const ModelParameters& p);
  void zero();
  std::vector<ParamView> views();
};

// One training-ready example: encoded tokens plus the variant's user context
// (slot index, type index, or -1 for plain RNN) and the 0/1 target.
struct EncodedExample {
  std::vector<int> tokens;
  int user_row = -1;
  double y = 0.0;
};

EncodedExample encode_example(const Comment& c, const Vocabulary& vocab,
                              const UserStatsTable& stats, const SlotMap& slots,
                              Variant variant, int truncation_cap = kDefaultTruncationCap);

// sigma(W_p . h + user term); see the per-variant head formulas in README.
double head_forward(Variant variant, std::span<const double> h_final, int user_row,
                    const ModelParameters& p);

double model_forward(const EncodedExample& ex, const ModelParameters& p);

// Compact per-example gradients; embedding and user rows stay sparse.
struct ExampleGradients {
  GruGrads gru;
  SparseRowGrads embed_rows;
  Vector w_p;
  double b = 0.0;
  Vector w_v;
  int user_row = -1;
  Vector user_emb_row;
  double user_bias_g = 0.0;
  double loss = 0.0;

  void clear();
};

// Forward + exact backward for one example; accumulator cleared first.
void model_backward(const EncodedExample& ex, const ModelParameters& p,
                    ExampleGradients& out);

void accumulate(ModelGradients& acc, const ExampleGradients& g, const ModelParameters& p);

// Non-neural baselines.
double ubase_score(const std::string& author, const UserStatsTable& stats);
double tbase_score(UserType t);

// Model artifact: parameters + vocabulary + slot map + variant tag.
struct ModelArtifact {
  ModelParameters params;
  Vocabulary vocab;
  SlotMap slots;
};

void save_model(const std::string& path, const ModelArtifact& artifact);
ModelArtifact load_model(const std::string& path);

// Whitespace-delimited pretrained embeddings, one token then d components per
// line; tokens absent from the file keep their random initialization.
// Returns the number of vocabulary rows overwritten.
int load_pretrained_embeddings(const std::string& path, const Vocabulary& vocab,
                               Matrix& embeddings);

}  // namespace commod
