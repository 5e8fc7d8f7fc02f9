#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "commod/corpus.hpp"

using namespace commod;

namespace {

Comment make_comment(const std::string& id, const std::string& author,
                     const std::string& text, Label label, Split split) {
  Comment c;
  c.id = id;
  c.author = author;
  c.tokens = tokenize(text);
  c.label = label;
  c.split = split;
  return c;
}

std::string record(const std::string& id, const std::string& author, const std::string& text,
                   const std::string& label, const std::string& split) {
  return "{\"id\":\"" + id + "\",\"author\":\"" + author + "\",\"text\":\"" + text +
         "\",\"label\":\"" + label + "\",\"split\":\"" + split + "\"}\n";
}

}  // namespace

TEST_CASE("tokenizer lowercases and splits punctuation runs") {
  CHECK(tokenize("Hello World") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("wow!!") == std::vector<std::string>{"wow", "!!"});
  CHECK(tokenize("(nice)") == std::vector<std::string>{"(", "nice", ")"});
  CHECK(tokenize("...") == std::vector<std::string>{"..."});
  CHECK(tokenize("  a\t b\nc ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize("don't") == std::vector<std::string>{"don't"});  // inner punctuation kept
  CHECK(tokenize("") == std::vector<std::string>{});
}

TEST_CASE("tokenizer handles Greek text") {
  CHECK(tokenize("Γεια σου Κόσμε") == std::vector<std::string>{"γεια", "σου", "κόσμε"});
  CHECK(tokenize("«Όχι!»") == std::vector<std::string>{"«", "όχι", "!»"});
}

TEST_CASE("ingestion accepts valid records and keeps split counts") {
  std::stringstream in;
  in << record("c1", "u1", "good game", "accept", "train")
     << record("c2", "u1", "terrible ref", "reject", "dev")
     << record("c3", "u2", "ok", "accept", "test");
  Corpus corpus = parse_corpus(in, "mem");
  CHECK(corpus.comments.size() == 3);
  CHECK(corpus.count(Split::Train) == 1);
  CHECK(corpus.count(Split::Dev) == 1);
  CHECK(corpus.count(Split::Test) == 1);
  CHECK(corpus.comments[0].tokens == std::vector<std::string>{"good", "game"});
}

TEST_CASE("ingestion rejects malformed records with line numbers") {
  SUBCASE("unknown label") {
    std::stringstream in;
    in << record("c1", "u1", "x", "maybe", "train");
    CHECK_THROWS_WITH_AS(parse_corpus(in, "mem"),
                         doctest::Contains("unknown label"), std::runtime_error);
  }
  SUBCASE("missing field") {
    std::stringstream in;
    in << "{\"id\":\"c1\",\"author\":\"u1\",\"text\":\"x\",\"label\":\"accept\"}\n";
    CHECK_THROWS_WITH_AS(parse_corpus(in, "mem"),
                         doctest::Contains("line 1"), std::runtime_error);
  }
  SUBCASE("duplicate id") {
    std::stringstream in;
    in << record("c1", "u1", "x", "accept", "train")
       << record("c1", "u2", "y", "reject", "train");
    CHECK_THROWS_WITH_AS(parse_corpus(in, "mem"),
                         doctest::Contains("duplicate id"), std::runtime_error);
  }
  SUBCASE("unknown split") {
    std::stringstream in;
    in << record("c1", "u1", "x", "accept", "validation");
    CHECK_THROWS_AS(parse_corpus(in, "mem"), std::runtime_error);
  }
}

TEST_CASE("empty comment encodes as a single UNK token") {
  std::stringstream in;
  in << record("c1", "u1", "", "accept", "train")
     << record("c2", "u1", "a a", "accept", "train");
  Corpus corpus = parse_corpus(in, "mem");
  CHECK(corpus.comments[0].tokens.empty());
  Vocabulary vocab = build_vocabulary(corpus);
  CHECK(encode_comment(corpus.comments[0], vocab) == std::vector<int>{vocab.unk_index});
}

TEST_CASE("user stats from the training split") {
  Corpus corpus;
  for (int i = 0; i < 20; ++i) {
    corpus.comments.push_back(make_comment("c" + std::to_string(i), "heavy", "x",
                                           i < 10 ? Label::Reject : Label::Accept,
                                           Split::Train));
  }
  corpus.comments.push_back(make_comment("t1", "testonly", "y", Label::Reject, Split::Test));
  UserStatsTable stats = compute_user_stats(corpus);

  const UserStats heavy = stats.lookup("heavy");
  CHECK(heavy.T == 20);
  CHECK(heavy.R == doctest::Approx(0.5));
  CHECK(heavy.type == UserType::Yellow);

  const UserStats testonly = stats.lookup("testonly");
  CHECK(testonly.T == 0);
  CHECK(testonly.type == UserType::Unknown);

  CHECK(stats.lookup("never_seen").T == 0);
  CHECK(stats.lookup("never_seen").type == UserType::Unknown);
}

TEST_CASE("degenerate single-author corpus") {
  Corpus corpus;
  for (int i = 0; i < 7; ++i) {
    corpus.comments.push_back(
        make_comment("c" + std::to_string(i), "solo", "w", Label::Reject, Split::Train));
  }
  UserStatsTable stats = compute_user_stats(corpus);
  CHECK(stats.lookup("solo").T == 7);
  CHECK(stats.lookup("solo").R == doctest::Approx(1.0));
}

TEST_CASE("user type boundaries") {
  CHECK(classify_user_type(15, 0.70) == UserType::Red);
  CHECK(classify_user_type(10, 0.99) == UserType::Unknown);
  CHECK(classify_user_type(11, 0.33) == UserType::Green);
  CHECK(classify_user_type(11, 0.34) == UserType::Yellow);
  CHECK(classify_user_type(11, 0.66) == UserType::Red);
  CHECK(classify_user_type(11, 0.6599) == UserType::Yellow);
  CHECK(classify_user_type(0, 0.0) == UserType::Unknown);
  CHECK_THROWS_AS(classify_user_type(5, 1.5), std::domain_error);
  CHECK_THROWS_AS(classify_user_type(5, -0.1), std::domain_error);
  CHECK_THROWS_AS(classify_user_type(-1, 0.5), std::domain_error);
}

TEST_CASE("the four types partition the (T, R) grid") {
  for (int T : {0, 1, 9, 10, 11, 12, 100}) {
    for (double R : {0.0, 0.1, 0.33, 0.330001, 0.5, 0.6599, 0.66, 0.67, 1.0}) {
      const UserType t = classify_user_type(T, R);
      int matches = 0;
      matches += (T <= 10) && t == UserType::Unknown;
      matches += (T > 10 && R >= 0.66) && t == UserType::Red;
      matches += (T > 10 && R > 0.33 && R < 0.66) && t == UserType::Yellow;
      matches += (T > 10 && R <= 0.33) && t == UserType::Green;
      CHECK(matches == 1);
    }
  }
}

TEST_CASE("vocabulary applies the min-frequency rule") {
  SUBCASE("a kept, b dropped") {
    Corpus corpus;
    corpus.comments.push_back(make_comment("c1", "u", "a b a", Label::Accept, Split::Train));
    Vocabulary v = build_vocabulary(corpus);
    CHECK(v.token_to_index.size() == 1);
    CHECK(v.token_to_index.count("a") == 1);
    CHECK(v.index_of("b") == v.unk_index);
    CHECK(v.size() == 2);
  }
  SUBCASE("both kept across comments") {
    Corpus corpus;
    corpus.comments.push_back(make_comment("c1", "u", "x x", Label::Accept, Split::Train));
    corpus.comments.push_back(make_comment("c2", "u", "x y y", Label::Accept, Split::Train));
    Vocabulary v = build_vocabulary(corpus);
    CHECK(v.token_to_index.size() == 2);
    CHECK(v.index_of("zzz") == v.unk_index);  // unseen at test time
  }
  SUBCASE("empty train split is rejected") {
    Corpus corpus;
    corpus.comments.push_back(make_comment("c1", "u", "x", Label::Accept, Split::Test));
    CHECK_THROWS_AS(build_vocabulary(corpus), std::invalid_argument);
  }
}

TEST_CASE("vocabulary indices are dense and invertible") {
  Corpus corpus;
  corpus.comments.push_back(make_comment("c1", "u", "a a b b c c d d e e", Label::Accept,
                                         Split::Train));
  Vocabulary v = build_vocabulary(corpus);
  std::set<int> indices;
  for (const auto& [tok, idx] : v.token_to_index) indices.insert(idx);
  CHECK(static_cast<int>(indices.size()) == v.size() - 1);
  CHECK(*indices.begin() == 0);
  CHECK(*indices.rbegin() == v.size() - 2);
  CHECK(v.unk_index == v.size() - 1);

  // encode then decode in-vocabulary tokens is the identity
  std::vector<std::string> inverse(v.size());
  for (const auto& [tok, idx] : v.token_to_index) inverse[idx] = tok;
  const Comment& c = corpus.comments[0];
  const std::vector<int> enc = encode_comment(c, v);
  for (std::size_t i = 0; i < c.tokens.size(); ++i) {
    CHECK(inverse[enc[i]] == c.tokens[i]);
  }
}

TEST_CASE("encoding looks up, truncates, and handles UNK") {
  Vocabulary v;
  v.token_to_index = {{"a", 0}};
  v.unk_index = 1;

  Comment c = make_comment("c1", "u", "a b", Label::Accept, Split::Test);
  CHECK(encode_comment(c, v) == std::vector<int>{0, 1});

  Comment empty = make_comment("c2", "u", "", Label::Accept, Split::Test);
  CHECK(encode_comment(empty, v) == std::vector<int>{1});

  Comment long_comment;
  long_comment.tokens.assign(500, "a");
  CHECK(encode_comment(long_comment, v, 300).size() == 300);
  CHECK(encode_comment(long_comment, v, 300) == std::vector<int>(300, 0));
}

TEST_CASE("holdout split proportions and partition") {
  auto [fit, holdout] = holdout_split(100, 0.02, 7);
  CHECK(holdout.size() == 2);
  CHECK(fit.size() == 98);

  std::set<std::size_t> all(fit.begin(), fit.end());
  for (std::size_t i : holdout) CHECK(all.insert(i).second);  // disjoint
  CHECK(all.size() == 100);

  auto [fit2, holdout2] = holdout_split(100, 0.02, 7);
  CHECK(fit == fit2);
  CHECK(holdout == holdout2);

  auto [fit3, holdout3] = holdout_split(100, 0.02, 8);
  CHECK(holdout != holdout3);  // different seed, different subset

  CHECK_THROWS_AS(holdout_split(10, 0.02, 1), std::invalid_argument);
  CHECK_THROWS_AS(holdout_split(100, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(holdout_split(100, 1.0, 1), std::invalid_argument);
}

TEST_CASE("synthetic generation is deterministic") {
  SyntheticSpec spec;
  spec.n_users = 20;
  spec.n_train = 200;
  spec.n_dev = 40;
  spec.n_test = 40;
  spec.seed = 555;
  Corpus a = generate_synthetic(spec);
  Corpus b = generate_synthetic(spec);
  REQUIRE(a.comments.size() == b.comments.size());
  for (std::size_t i = 0; i < a.comments.size(); ++i) {
    CHECK(a.comments[i].id == b.comments[i].id);
    CHECK(a.comments[i].author == b.comments[i].author);
    CHECK(a.comments[i].tokens == b.comments[i].tokens);
    CHECK(a.comments[i].label == b.comments[i].label);
    CHECK(a.comments[i].split == b.comments[i].split);
  }

  std::set<std::string> ids;
  for (const Comment& c : a.comments) CHECK(ids.insert(c.id).second);
  CHECK(a.count(Split::Train) == 200);
  CHECK(a.count(Split::Dev) == 40);
  CHECK(a.count(Split::Test) == 40);
}

TEST_CASE("zero propensity spread plants no user signal") {
  SyntheticSpec spec;
  spec.user_propensity_spread = 0.0;
  const std::vector<double> p = synthetic_propensities(spec);
  for (double v : p) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("default spec covers all four user types") {
  SyntheticSpec spec;  // frozen defaults
  Corpus corpus = generate_synthetic(spec);
  UserStatsTable stats = compute_user_stats(corpus);
  int count[kNumUserTypes] = {0, 0, 0, 0};
  for (const auto& [user, s] : stats.by_user) count[type_index(s.type)] += 1;
  for (int t = 0; t < kNumUserTypes; ++t) {
    CAPTURE(t);
    CHECK(count[t] >= 1);
  }
}

TEST_CASE("synthetic corpora serialize byte-identically across runs") {
  SyntheticSpec spec;
  spec.n_users = 15;
  spec.n_train = 120;
  spec.n_dev = 20;
  spec.n_test = 20;
  spec.seed = 321;
  write_corpus(generate_synthetic(spec), "/tmp/commod_synth_a.jsonl");
  write_corpus(generate_synthetic(spec), "/tmp/commod_synth_b.jsonl");
  std::ifstream fa("/tmp/commod_synth_a.jsonl", std::ios::binary);
  std::ifstream fb("/tmp/commod_synth_b.jsonl", std::ios::binary);
  std::string a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK_FALSE(a.empty());
  CHECK(a == b);
}

TEST_CASE("corpus writes round-trip through ingestion") {
  SyntheticSpec spec;
  spec.n_users = 10;
  spec.n_train = 50;
  spec.n_dev = 10;
  spec.n_test = 10;
  spec.seed = 9;
  Corpus corpus = generate_synthetic(spec);
  const std::string path = "/tmp/commod_test_corpus.jsonl";
  write_corpus(corpus, path);
  Corpus again = ingest_corpus(path);
  REQUIRE(again.comments.size() == corpus.comments.size());
  for (std::size_t i = 0; i < corpus.comments.size(); ++i) {
    CHECK(again.comments[i].id == corpus.comments[i].id);
    CHECK(again.comments[i].tokens == corpus.comments[i].tokens);
    CHECK(again.comments[i].label == corpus.comments[i].label);
  }
}
