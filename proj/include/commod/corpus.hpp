#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace commod {

enum class Label { Accept, Reject };
enum class Split { Train, Dev, Test };
enum class UserType { Red, Yellow, Green, Unknown };

const char* to_string(Label l);
const char* to_string(Split s);
const char* to_string(UserType t);
Label label_from_string(const std::string& s);
Split split_from_string(const std::string& s);

constexpr int kNumUserTypes = 4;
inline int type_index(UserType t) { return static_cast<int>(t); }

// One moderated post.
struct Comment {
  std::string id;
  std::string author;
  std::vector<std::string> tokens;
  Label label = Label::Accept;
  Split split = Split::Train;
};

struct Corpus {
  std::vector<Comment> comments;

  std::vector<const Comment*> split_view(Split s) const;
  std::size_t count(Split s) const;
};

// Per-user training statistics: T = number of training comments,
// R = fraction of them rejected (defined when T > 0).
struct UserStats {
  int T = 0;
  double R = 0.0;
  UserType type = UserType::Unknown;
};

struct UserStatsTable {
  std::unordered_map<std::string, UserStats> by_user;

  // Users absent from the training split get T = 0, type Unknown.
  UserStats lookup(const std::string& author) const;
};

struct Vocabulary {
  std::unordered_map<std::string, int> token_to_index;
  int unk_index = 0;

  // Total entry count including the UNK slot.
  int size() const { return static_cast<int>(token_to_index.size()) + 1; }
  int index_of(const std::string& token) const;
};

// Tokenizer: UTF-8 aware, lowercases ASCII and Greek letters, splits on
// whitespace; leading/trailing punctuation runs of a chunk become their own
// tokens.
std::vector<std::string> tokenize(const std::string& text);

// Line-delimited JSON records with fields id, author, text, label, split.
Corpus ingest_corpus(const std::string& path);
Corpus parse_corpus(std::istream& in, const std::string& source_name);
void write_corpus(const Corpus& corpus, const std::string& path);

UserStatsTable compute_user_stats(const Corpus& corpus);
UserType classify_user_type(int T, double R);

Vocabulary build_vocabulary(std::span<const Comment* const> train_comments);
Vocabulary build_vocabulary(const Corpus& corpus);

constexpr int kDefaultTruncationCap = 300;
std::vector<int> encode_comment(const Comment& c, const Vocabulary& v,
                                int truncation_cap = kDefaultTruncationCap);

// Seeded uniform shuffle; holdout gets floor(fraction * n) positions.
// Returns (fit positions, holdout positions); both ascending.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
holdout_split(std::size_t n, double fraction, std::uint64_t seed);

// Desk-scale synthetic corpus with planted text and user signal.
struct SyntheticSpec {
  int n_users = 100;
  int n_train = 5000;
  int n_dev = 1000;
  int n_test = 1000;
  int vocab_size = 250;
  double abusive_fraction = 0.08;
  double user_propensity_spread = 0.9;
  std::uint64_t seed = 2017;
};

Corpus generate_synthetic(const SyntheticSpec& spec);

// Latent per-user rejection propensities used by the generator; exposed so
// tests and analyses can correlate against the planted signal.
std::vector<double> synthetic_propensities(const SyntheticSpec& spec);

}  // namespace commod
