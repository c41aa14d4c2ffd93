#include "editsql/embedding.hpp"

#include <fstream>
#include <sstream>

namespace editsql {

EmbeddingProvider EmbeddingProvider::random(std::size_t dimension,
                                            std::uint64_t seed) {
  EmbeddingProvider p;
  p.mode_ = EmbeddingMode::RANDOM;
  p.dim_ = dimension;
  p.seed_ = seed;
  return p;
}

EmbeddingProvider EmbeddingProvider::from_file(const std::string& path,
                                               std::size_t dimension,
                                               std::uint64_t seed) {
  EmbeddingProvider p;
  p.mode_ = EmbeddingMode::STATIC_FILE;
  p.dim_ = dimension;
  p.seed_ = seed;
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    Tensor v(dimension);
    for (std::size_t i = 0; i < dimension; ++i) {
      if (!(ss >> v[i]))
        throw Error(path + ":" + std::to_string(lineno) +
                    ": expected " + std::to_string(dimension) + " floats");
    }
    p.table_[token] = std::move(v);
  }
  return p;
}

EmbeddingProvider EmbeddingProvider::joint_contextual(std::size_t dimension,
                                                      std::uint64_t seed,
                                                      std::size_t max_length) {
  EmbeddingProvider p;
  p.mode_ = EmbeddingMode::JOINT_CONTEXTUAL;
  p.dim_ = dimension;
  p.seed_ = seed;
  p.max_length_ = max_length;
  return p;
}

Tensor EmbeddingProvider::hashed_vector(std::uint64_t key) const {
  Tensor v(dim_);
  std::uint64_t state = splitmix64(seed_ ^ key);
  for (std::size_t i = 0; i < dim_; ++i) {
    state = splitmix64(state);
    // uniform in [-0.5, 0.5)
    v[i] = static_cast<double>(state >> 11) * (1.0 / 9007199254740992.0) - 0.5;
  }
  return v;
}

Tensor EmbeddingProvider::embed(const std::string& token) const {
  if (mode_ == EmbeddingMode::STATIC_FILE) {
    const auto it = table_.find(token);
    if (it != table_.end()) return it->second;
  }
  return hashed_vector(fnv1a(token));
}

EmbeddingProvider::JointEmbedding EmbeddingProvider::joint_embed(
    const Utterance& utterance, const Schema& schema) const {
  if (mode_ != EmbeddingMode::JOINT_CONTEXTUAL)
    throw Error("joint_embed requires JOINT_CONTEXTUAL mode");
  std::vector<std::string> seq;
  seq.push_back("[CLS]");
  seq.insert(seq.end(), utterance.tokens.begin(), utterance.tokens.end());
  seq.push_back("[SEP]");
  std::vector<std::pair<std::size_t, std::size_t>> header_spans;
  for (const auto& col : schema.columns) {
    const auto words = col.words();
    header_spans.emplace_back(seq.size(), words.size());
    seq.insert(seq.end(), words.begin(), words.end());
    seq.push_back("[SEP]");
  }
  if (seq.size() > max_length_)
    throw Error("joint sequence length " + std::to_string(seq.size()) +
                " exceeds provider maximum " + std::to_string(max_length_));

  // deterministic context-sensitive states: each position is keyed by the
  // token, its neighbors, and its offset
  auto state_at = [&](std::size_t i) {
    std::uint64_t key = fnv1a(seq[i]);
    key = splitmix64(key ^ (i > 0 ? fnv1a(seq[i - 1]) : 0x1ULL));
    key = splitmix64(key ^ (i + 1 < seq.size() ? fnv1a(seq[i + 1]) : 0x2ULL));
    key = splitmix64(key ^ static_cast<std::uint64_t>(i));
    return hashed_vector(key);
  };

  JointEmbedding out;
  out.sequence_length = seq.size();
  for (std::size_t j = 0; j < utterance.tokens.size(); ++j)
    out.utterance_tokens.push_back(state_at(1 + j));
  for (const auto& [start, len] : header_spans) {
    std::vector<Tensor> words;
    for (std::size_t k = 0; k < len; ++k) words.push_back(state_at(start + k));
    out.header_words.push_back(std::move(words));
  }
  return out;
}

}  // namespace editsql
