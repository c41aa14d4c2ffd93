#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "editsql/tensor.hpp"

namespace editsql {

// Dimensions of all learned tensors; everything else is derived from these.
struct ModelConfig {
  std::size_t embedding_dim = 50;
  std::size_t hidden_size = 16;   // per direction; bi-states are 2x
  std::uint64_t seed = 1;
  double init_range = 0.1;
  bool editing_enabled = true;
  bool feed_interaction_state = false;  // ablation: concat h_I into c_turn
  std::size_t max_decode_len = 200;
  int turn_window = -1;  // <0: attend over all previous turns

  std::size_t bi() const { return 2 * hidden_size; }
  std::size_t context_dim() const { return 3 * bi(); }
  std::size_t decoder_hidden() const { return bi(); }
  std::size_t decoder_input() const { return bi() + context_dim(); }
  std::size_t output_dim() const { return decoder_hidden(); }
};

// Named parameter store with gradient buffers. Registration order is fixed
// and recorded in a shape manifest; checkpoints validate against it.
class ModelParams {
 public:
  explicit ModelParams(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  const Tensor& value(const std::string& name) const;
  Tensor& value_mut(const std::string& name);
  Tensor& grad(const std::string& name);
  const std::vector<std::string>& names() const { return order_; }

  void zero_grads();
  double grad_norm() const;
  void clip_grads(double max_norm);
  void scale_grads(double factor);

  std::map<std::string, std::pair<std::size_t, std::size_t>> manifest() const;

  void save(const std::string& path) const;
  static ModelParams load(const std::string& path);

 private:
  struct Entry {
    Tensor value;
    Tensor grad;
  };
  void add(const std::string& name, std::size_t rows, std::size_t cols);
  void init_uniform();

  ModelConfig config_;
  std::vector<std::string> order_;
  std::map<std::string, Entry> entries_;
};

// LSTM parameter name helpers ("<stem>.W", "<stem>.b"); gates are packed
// [input; forget; cell; output] over rows.
std::string lstm_w(const std::string& stem);
std::string lstm_b(const std::string& stem);

}  // namespace editsql
