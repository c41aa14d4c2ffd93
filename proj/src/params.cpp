#include "editsql/params.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "editsql/sql_lang.hpp"

namespace editsql {

using nlohmann::json;

std::string lstm_w(const std::string& stem) { return stem + ".W"; }
std::string lstm_b(const std::string& stem) { return stem + ".b"; }

namespace {
constexpr int kCheckpointVersion = 1;
}

ModelParams::ModelParams(const ModelConfig& config) : config_(config) {
  const std::size_t e = config.embedding_dim;
  const std::size_t h = config.hidden_size;
  const std::size_t B = config.bi();
  const std::size_t C = config.context_dim();
  const std::size_t HD = config.decoder_hidden();
  const std::size_t O = config.output_dim();
  const std::size_t K = sql_keywords().size();
  if (e == 0 || h == 0) throw Error("model dimensions must be positive");

  auto lstm = [&](const std::string& stem, std::size_t in, std::size_t hid) {
    add(lstm_w(stem), 4 * hid, in + hid);
    add(lstm_b(stem), 4 * hid, 1);
  };

  add("kw_embed", K, B);
  lstm("utt1.fwd", e, h);
  lstm("utt1.bwd", e, h);
  lstm("utt2.fwd", 2 * B, h);
  lstm("utt2.bwd", 2 * B, h);
  lstm("hdr1.fwd", e, h);
  lstm("hdr1.bwd", e, h);
  lstm("hdr2.fwd", 2 * B, h);
  lstm("hdr2.bwd", 2 * B, h);
  lstm("inter", B, B);
  lstm("prevq.fwd", B, h);
  lstm("prevq.bwd", B, h);
  lstm("dec.l1", B + C, HD);
  lstm("dec.l2", HD, HD);
  // bilinear attention weights, stored so that matvec(W, query) yields the
  // key-space vector
  add("W_turn_att", B, B);
  add("W_column_att", B, HD);
  add("W_utterance_att", B, HD);
  add("W_query_att", B, HD);
  add("W_o", O, HD + C);
  add("W_SQL", K, O);
  add("b_SQL", K, 1);
  add("W_column", B, O);
  add("W_table", B, O);
  add("W_prev_SQL", B, O);
  add("W_copy", C, 1);
  add("b_copy", 1, 1);
  if (config.feed_interaction_state) add("W_init_hI", HD, 2 * B);

  init_uniform();
}

void ModelParams::add(const std::string& name, std::size_t rows,
                      std::size_t cols) {
  if (entries_.count(name)) throw Error("duplicate parameter: " + name);
  order_.push_back(name);
  entries_[name] = {Tensor(rows, cols), Tensor(rows, cols)};
}

void ModelParams::init_uniform() {
  std::mt19937_64 rng(config_.seed);
  std::uniform_real_distribution<double> dist(-config_.init_range,
                                              config_.init_range);
  for (const auto& name : order_)
    for (double& x : entries_[name].value.v) x = dist(rng);
}

const Tensor& ModelParams::value(const std::string& name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw Error("unknown parameter: " + name);
  return it->second.value;
}

Tensor& ModelParams::value_mut(const std::string& name) {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw Error("unknown parameter: " + name);
  return it->second.value;
}

Tensor& ModelParams::grad(const std::string& name) {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw Error("unknown parameter: " + name);
  return it->second.grad;
}

void ModelParams::zero_grads() {
  for (auto& [name, e] : entries_) e.grad.zero();
}

double ModelParams::grad_norm() const {
  double acc = 0.0;
  for (const auto& [name, e] : entries_)
    for (double x : e.grad.v) acc += x * x;
  return std::sqrt(acc);
}

void ModelParams::clip_grads(double max_norm) {
  const double norm = grad_norm();
  if (norm > max_norm && norm > 0.0) scale_grads(max_norm / norm);
}

void ModelParams::scale_grads(double factor) {
  for (auto& [name, e] : entries_)
    for (double& x : e.grad.v) x *= factor;
}

std::map<std::string, std::pair<std::size_t, std::size_t>>
ModelParams::manifest() const {
  std::map<std::string, std::pair<std::size_t, std::size_t>> m;
  for (const auto& [name, e] : entries_)
    m[name] = {e.value.rows, e.value.cols};
  return m;
}

void ModelParams::save(const std::string& path) const {
  json j;
  j["version"] = kCheckpointVersion;
  j["config"] = {{"embedding_dim", config_.embedding_dim},
                 {"hidden_size", config_.hidden_size},
                 {"seed", config_.seed},
                 {"init_range", config_.init_range},
                 {"editing_enabled", config_.editing_enabled},
                 {"feed_interaction_state", config_.feed_interaction_state},
                 {"max_decode_len", config_.max_decode_len},
                 {"turn_window", config_.turn_window}};
  j["keyword_vocab_size"] = sql_keywords().size();
  json manifest = json::object();
  json tensors = json::object();
  for (const auto& name : order_) {
    const Tensor& t = entries_.at(name).value;
    manifest[name] = {t.rows, t.cols};
    tensors[name] = t.v;
  }
  j["manifest"] = manifest;
  j["tensors"] = tensors;
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint: " + path);
  out << j.dump() << '\n';
}

ModelParams ModelParams::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("malformed checkpoint " + path + ": " + e.what());
  }
  if (j.value("version", -1) != kCheckpointVersion)
    throw Error("checkpoint " + path + ": unsupported version");
  if (j.value("keyword_vocab_size", std::size_t(0)) != sql_keywords().size())
    throw Error("checkpoint " + path +
                ": keyword vocabulary does not match this build");
  const auto& c = j.at("config");
  ModelConfig cfg;
  cfg.embedding_dim = c.at("embedding_dim").get<std::size_t>();
  cfg.hidden_size = c.at("hidden_size").get<std::size_t>();
  cfg.seed = c.at("seed").get<std::uint64_t>();
  cfg.init_range = c.at("init_range").get<double>();
  cfg.editing_enabled = c.at("editing_enabled").get<bool>();
  cfg.feed_interaction_state = c.at("feed_interaction_state").get<bool>();
  cfg.max_decode_len = c.at("max_decode_len").get<std::size_t>();
  cfg.turn_window = c.at("turn_window").get<int>();
  ModelParams p(cfg);
  for (const auto& name : p.order_) {
    Tensor& t = p.entries_.at(name).value;
    const auto& m = j.at("manifest").at(name);
    if (m.at(0).get<std::size_t>() != t.rows ||
        m.at(1).get<std::size_t>() != t.cols)
      throw Error("checkpoint " + path + ": shape mismatch for '" + name +
                  "' (manifest disagrees with this build)");
    const auto& vals = j.at("tensors").at(name);
    if (vals.size() != t.size())
      throw Error("checkpoint " + path + ": tensor size mismatch for '" +
                  name + "'");
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = vals[i].get<double>();
  }
  return p;
}

}  // namespace editsql
