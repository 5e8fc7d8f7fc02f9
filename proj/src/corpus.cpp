#include "commod/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "commod/rng.hpp"

namespace commod {

const char* to_string(Label l) { return l == Label::Accept ? "accept" : "reject"; }

const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    default: return "test";
  }
}

const char* to_string(UserType t) {
  switch (t) {
    case UserType::Red: return "Red";
    case UserType::Yellow: return "Yellow";
    case UserType::Green: return "Green";
    default: return "Unknown";
  }
}

Label label_from_string(const std::string& s) {
  if (s == "accept") return Label::Accept;
  if (s == "reject") return Label::Reject;
  throw std::invalid_argument("unknown label \"" + s + "\"");
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "dev") return Split::Dev;
  if (s == "test") return Split::Test;
  throw std::invalid_argument("unknown split \"" + s + "\"");
}

std::vector<const Comment*> Corpus::split_view(Split s) const {
  std::vector<const Comment*> out;
  for (const Comment& c : comments) {
    if (c.split == s) out.push_back(&c);
  }
  return out;
}

std::size_t Corpus::count(Split s) const {
  std::size_t n = 0;
  for (const Comment& c : comments) n += (c.split == s);
  return n;
}

UserStats UserStatsTable::lookup(const std::string& author) const {
  auto it = by_user.find(author);
  if (it == by_user.end()) return UserStats{0, 0.0, UserType::Unknown};
  return it->second;
}

int Vocabulary::index_of(const std::string& token) const {
  auto it = token_to_index.find(token);
  return it == token_to_index.end() ? unk_index : it->second;
}

namespace {

// Decodes the UTF-8 codepoint at position i; advances i. Invalid bytes are
// treated as single Latin-1 codepoints so tokenization never fails.
char32_t decode_utf8(const std::string& s, std::size_t& i) {
  const unsigned char b0 = static_cast<unsigned char>(s[i]);
  int extra = 0;
  char32_t cp = b0;
  if (b0 >= 0xF0) { extra = 3; cp = b0 & 0x07; }
  else if (b0 >= 0xE0) { extra = 2; cp = b0 & 0x0F; }
  else if (b0 >= 0xC0) { extra = 1; cp = b0 & 0x1F; }
  if (i + extra >= s.size()) extra = 0;
  for (int k = 1; k <= extra; ++k) {
    const unsigned char bk = static_cast<unsigned char>(s[i + k]);
    if ((bk & 0xC0) != 0x80) { extra = k - 1; cp = b0; break; }
    cp = (cp << 6) | (bk & 0x3F);
  }
  i += extra + 1;
  return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// ASCII plus the Greek and Coptic block; other scripts pass through.
char32_t lower_codepoint(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;  // Alpha..Omega
  switch (cp) {
    case 0x386: return 0x3AC;  // accented Alpha
    case 0x388: return 0x3AD;
    case 0x389: return 0x3AE;
    case 0x38A: return 0x3AF;
    case 0x38C: return 0x3CC;
    case 0x38E: return 0x3CD;
    case 0x38F: return 0x3CE;
    case 0x3AA: return 0x3CA;
    case 0x3AB: return 0x3CB;
    default: return cp;
  }
}

bool is_space_cp(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' ||
         cp == U'\v' || cp == 0xA0;
}

bool is_punct_cp(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= U'!' && cp <= U'/') || (cp >= U':' && cp <= U'@') ||
           (cp >= U'[' && cp <= U'`') || (cp >= U'{' && cp <= U'~');
  }
  switch (cp) {
    case 0xAB: case 0xBB:                 // guillemets
    case 0x2018: case 0x2019: case 0x201C: case 0x201D:
    case 0x2013: case 0x2014: case 0x2026:
    case 0x37E: case 0x387:               // Greek question mark, ano teleia
      return true;
    default:
      return false;
  }
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  // Decode, lowercase, and mark classes in one pass.
  std::vector<char32_t> cps;
  cps.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) cps.push_back(lower_codepoint(decode_utf8(text, i)));

  std::vector<std::string> tokens;
  auto emit = [&tokens](std::span<const char32_t> run) {
    if (run.empty()) return;
    std::string t;
    for (char32_t cp : run) encode_utf8(cp, t);
    tokens.push_back(std::move(t));
  };

  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    while (i < n && is_space_cp(cps[i])) ++i;
    std::size_t j = i;
    while (j < n && !is_space_cp(cps[j])) ++j;
    if (j > i) {
      std::span<const char32_t> chunk(cps.data() + i, j - i);
      std::size_t lead = 0;
      while (lead < chunk.size() && is_punct_cp(chunk[lead])) ++lead;
      if (lead == chunk.size()) {
        emit(chunk);  // all punctuation: keep the run as one token
      } else {
        std::size_t tail = chunk.size();
        while (tail > lead && is_punct_cp(chunk[tail - 1])) --tail;
        emit(chunk.subspan(0, lead));
        emit(chunk.subspan(lead, tail - lead));
        emit(chunk.subspan(tail));
      }
    }
    i = j;
  }
  return tokens;
}

namespace {

std::string require_string_field(const nlohmann::json& j, const char* field, int line_no) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": missing field \"" +
                             field + "\"");
  }
  return j[field].get<std::string>();
}

}  // namespace

Corpus parse_corpus(std::istream& in, const std::string& source_name) {
  Corpus corpus;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error(source_name + " line " + std::to_string(line_no) +
                               ": malformed record: " + e.what());
    }
    Comment c;
    try {
      c.id = require_string_field(j, "id", line_no);
      c.author = require_string_field(j, "author", line_no);
      const std::string text = require_string_field(j, "text", line_no);
      c.label = label_from_string(require_string_field(j, "label", line_no));
      c.split = split_from_string(require_string_field(j, "split", line_no));
      c.tokens = tokenize(text);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(source_name + " line " + std::to_string(line_no) + ": " +
                               e.what());
    }
    if (!seen_ids.insert(c.id).second) {
      throw std::runtime_error(source_name + " line " + std::to_string(line_no) +
                               ": duplicate id \"" + c.id + "\"");
    }
    corpus.comments.push_back(std::move(c));
  }
  return corpus;
}

Corpus ingest_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file " + path);
  return parse_corpus(in, path);
}

void write_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus file " + path);
  for (const Comment& c : corpus.comments) {
    nlohmann::json j;
    j["id"] = c.id;
    j["author"] = c.author;
    std::string text;
    for (std::size_t i = 0; i < c.tokens.size(); ++i) {
      if (i) text += ' ';
      text += c.tokens[i];
    }
    j["text"] = text;
    j["label"] = to_string(c.label);
    j["split"] = to_string(c.split);
    out << j.dump() << '\n';
  }
}

UserType classify_user_type(int T, double R) {
  if (T < 0) throw std::domain_error("classify_user_type: negative T");
  if (R < 0.0 || R > 1.0) throw std::domain_error("classify_user_type: R outside [0,1]");
  if (T <= 10) return UserType::Unknown;
  if (R >= 0.66) return UserType::Red;
  if (R > 0.33) return UserType::Yellow;
  return UserType::Green;
}

UserStatsTable compute_user_stats(const Corpus& corpus) {
  UserStatsTable table;
  std::unordered_map<std::string, std::pair<int, int>> counts;  // T, rejected
  for (const Comment& c : corpus.comments) {
    if (c.split == Split::Train) {
      auto& e = counts[c.author];
      e.first += 1;
      e.second += (c.label == Label::Reject);
    }
  }
  for (const Comment& c : corpus.comments) {
    if (c.split != Split::Train && !counts.count(c.author)) {
      table.by_user.emplace(c.author, UserStats{0, 0.0, UserType::Unknown});
    }
  }
  for (const auto& [user, tc] : counts) {
    UserStats s;
    s.T = tc.first;
    s.R = s.T > 0 ? static_cast<double>(tc.second) / s.T : 0.0;
    s.type = classify_user_type(s.T, s.R);
    table.by_user.emplace(user, s);
  }
  return table;
}

Vocabulary build_vocabulary(std::span<const Comment* const> train_comments) {
  if (train_comments.empty()) throw std::invalid_argument("build_vocabulary: empty train split");

  std::unordered_map<std::string, int> freq;
  std::vector<const std::string*> order;  // first-appearance order for dense stable indices
  for (const Comment* c : train_comments) {
    for (const std::string& tok : c->tokens) {
      auto [it, inserted] = freq.try_emplace(tok, 0);
      if (inserted) order.push_back(&it->first);
      it->second += 1;
    }
  }
  Vocabulary v;
  int next = 0;
  for (const std::string* tok : order) {
    if (freq[*tok] >= 2) v.token_to_index.emplace(*tok, next++);
  }
  v.unk_index = next;
  return v;
}

Vocabulary build_vocabulary(const Corpus& corpus) {
  auto train = corpus.split_view(Split::Train);
  return build_vocabulary(train);
}

std::vector<int> encode_comment(const Comment& c, const Vocabulary& v, int truncation_cap) {
  if (truncation_cap <= 0) throw std::invalid_argument("encode_comment: cap must be positive");
  if (c.tokens.empty()) return {v.unk_index};
  std::vector<int> out;
  const std::size_t n = std::min<std::size_t>(c.tokens.size(), truncation_cap);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(v.index_of(c.tokens[i]));
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
holdout_split(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("holdout_split: fraction must be in (0,1)");
  }
  const std::size_t n_holdout = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  if (n_holdout == 0) {
    throw std::invalid_argument("holdout_split: holdout would be empty (n=" + std::to_string(n) + ")");
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  rng.shuffle(perm);

  std::vector<std::size_t> holdout(perm.begin(), perm.begin() + n_holdout);
  std::vector<std::size_t> fit(perm.begin() + n_holdout, perm.end());
  std::sort(holdout.begin(), holdout.end());
  std::sort(fit.begin(), fit.end());
  return {fit, holdout};
}

}  // namespace commod
