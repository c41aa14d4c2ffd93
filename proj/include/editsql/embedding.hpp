#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "editsql/corpus.hpp"
#include "editsql/tensor.hpp"

namespace editsql {

enum class EmbeddingMode { RANDOM, STATIC_FILE, JOINT_CONTEXTUAL };

// Token-embedding source for the encoder's first layer. RANDOM draws a
// deterministic per-token vector keyed by (seed, token). STATIC_FILE reads
// word-vector text format (token then `dim` floats per line), falling back
// to the RANDOM scheme for unseen tokens. JOINT_CONTEXTUAL runs the
// [CLS] utterance [SEP] header [SEP] ... layout through a deterministic
// context-sensitive stub standing in for a pretrained contextual encoder.
class EmbeddingProvider {
 public:
  static EmbeddingProvider random(std::size_t dimension, std::uint64_t seed);
  static EmbeddingProvider from_file(const std::string& path,
                                     std::size_t dimension, std::uint64_t seed);
  static EmbeddingProvider joint_contextual(std::size_t dimension,
                                            std::uint64_t seed,
                                            std::size_t max_length = 512);

  EmbeddingMode mode() const { return mode_; }
  std::size_t dimension() const { return dim_; }
  std::size_t max_length() const { return max_length_; }

  Tensor embed(const std::string& token) const;

  struct JointEmbedding {
    std::vector<Tensor> utterance_tokens;          // one per utterance token
    std::vector<std::vector<Tensor>> header_words;  // per header, per word
    std::size_t sequence_length = 0;
  };
  // Layout: [CLS], X_i, [SEP], c_1, [SEP], ..., c_m, [SEP]
  JointEmbedding joint_embed(const Utterance& utterance,
                             const Schema& schema) const;

 private:
  EmbeddingMode mode_ = EmbeddingMode::RANDOM;
  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  std::size_t max_length_ = 512;
  std::map<std::string, Tensor> table_;  // STATIC_FILE entries

  Tensor hashed_vector(std::uint64_t key) const;
};

}  // namespace editsql
