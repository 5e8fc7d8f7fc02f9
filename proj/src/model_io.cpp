#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "commod/model.hpp"

namespace commod {

// Artifact layout: magic line, u64 little-endian header length, JSON header
// (variant, dims, vocabulary in index order, slot map, array directory),
// then the raw little-endian doubles of each array in directory order.
namespace {

constexpr char kMagic[8] = {'C', 'M', 'O', 'D', 'E', 'L', '1', '\n'};

std::vector<std::string> vocab_in_index_order(const Vocabulary& vocab) {
  std::vector<std::string> tokens(vocab.token_to_index.size());
  for (const auto& [tok, idx] : vocab.token_to_index) tokens[idx] = tok;
  return tokens;
}

}  // namespace

void save_model(const std::string& path, const ModelArtifact& artifact) {
  ModelArtifact& mutable_artifact = const_cast<ModelArtifact&>(artifact);
  auto views = mutable_artifact.params.views();

  nlohmann::json header;
  header["variant"] = to_string(artifact.params.variant);
  header["d"] = artifact.params.embed_dim();
  header["m"] = artifact.params.hidden_dim();
  header["vocab"] = vocab_in_index_order(artifact.vocab);
  header["unk_index"] = artifact.vocab.unk_index;
  header["slots"] = artifact.slots.slot_user;
  nlohmann::json arrays = nlohmann::json::array();
  for (const ParamView& v : views) {
    arrays.push_back({{"name", v.name}, {"rows", v.rows}, {"cols", v.cols}});
  }
  header["arrays"] = arrays;

  const std::string header_bytes = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = header_bytes.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
  for (const ParamView& v : views) {
    out.write(reinterpret_cast<const char*>(v.values.data()),
              static_cast<std::streamsize>(v.values.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("short write to model file " + path);
}

ModelArtifact load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path);

  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path + ": not a model artifact");
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string header_bytes(len, '\0');
  in.read(header_bytes.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error(path + ": truncated header");

  const nlohmann::json header = nlohmann::json::parse(header_bytes);
  ModelArtifact artifact;
  const Variant variant = variant_from_string(header.at("variant").get<std::string>());
  const int d = header.at("d").get<int>();
  const int m = header.at("m").get<int>();

  const auto tokens = header.at("vocab").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    artifact.vocab.token_to_index.emplace(tokens[i], static_cast<int>(i));
  }
  artifact.vocab.unk_index = header.at("unk_index").get<int>();

  artifact.slots.slot_user = header.at("slots").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < artifact.slots.slot_user.size(); ++i) {
    artifact.slots.user_to_slot.emplace(artifact.slots.slot_user[i], static_cast<int>(i));
  }
  artifact.slots.unknown_slot = static_cast<int>(artifact.slots.slot_user.size());

  ModelParameters& p = artifact.params;
  p.variant = variant;
  p.embeddings = Matrix(artifact.vocab.size(), d);
  p.gru = GruWeights(d, m);
  p.w_p.assign(m, 0.0);
  if (variant == Variant::ueRNN) {
    p.user_emb = Matrix(artifact.slots.n_slots(), d);
    p.w_v.assign(d, 0.0);
  } else if (variant == Variant::teRNN) {
    p.user_emb = Matrix(kNumUserTypes, d);
    p.w_v.assign(d, 0.0);
  } else if (variant == Variant::ubRNN) {
    p.user_bias.assign(artifact.slots.n_slots(), 0.0);
  } else if (variant == Variant::tbRNN) {
    p.user_bias.assign(kNumUserTypes, 0.0);
  }

  auto views = p.views();
  const auto& arrays = header.at("arrays");
  if (arrays.size() != views.size()) throw std::runtime_error(path + ": array directory mismatch");
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& entry = arrays.at(i);
    if (entry.at("name").get<std::string>() != views[i].name ||
        entry.at("rows").get<int>() != views[i].rows ||
        entry.at("cols").get<int>() != views[i].cols) {
      throw std::runtime_error(path + ": unexpected array " + entry.at("name").get<std::string>());
    }
    in.read(reinterpret_cast<char*>(views[i].values.data()),
            static_cast<std::streamsize>(views[i].values.size() * sizeof(double)));
  }
  if (!in) throw std::runtime_error(path + ": truncated parameter data");
  return artifact;
}

int load_pretrained_embeddings(const std::string& path, const Vocabulary& vocab,
                               Matrix& embeddings) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file " + path);
  const int d = embeddings.cols;
  int loaded = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    auto it = vocab.token_to_index.find(token);
    if (it == vocab.token_to_index.end()) continue;  // keep random initialization
    auto row = embeddings.row(it->second);
    for (int i = 0; i < d; ++i) {
      if (!(ls >> row[i])) {
        throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                 ": expected " + std::to_string(d) + " components");
      }
    }
    ++loaded;
  }
  return loaded;
}

}  // namespace commod
