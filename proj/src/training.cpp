#include "editsql/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "editsql/interaction.hpp"
#include "editsql/sql_lang.hpp"

namespace editsql {

void TrainConfig::validate() const {
  if (batch_size == 0 || max_epochs == 0) throw Error("config values must be positive");
  if (initial_lr <= 0.0) throw Error("initial_lr must be positive");
  if (lr_decay_factor <= 0.0 || lr_decay_factor >= 1.0)
    throw Error("lr_decay_factor must lie in (0, 1)");
}

double sequence_loss(const std::vector<OutputDistribution>& distributions,
                     const SqlTokenSeq& gold, const OutputVocab& vocab) {
  if (distributions.size() != gold.size() + 1)
    throw Error("sequence_loss: need one distribution per gold token plus EOS");
  double total = 0.0;
  for (std::size_t i = 0; i < distributions.size(); ++i) {
    const SqlToken& tok =
        i < gold.size() ? gold.tokens[i] : vocab.entries[OutputVocab::kEos];
    const auto it = distributions[i].per_surface_token.find(tok.surface_key());
    if (it == distributions[i].per_surface_token.end())
      throw Error("gold token '" + tok.text + "' absent from the distribution");
    total -= std::log(it->second);
  }
  return total / static_cast<double>(distributions.size());
}

namespace {

std::vector<Tape::Var> flatten_token_states(
    const std::vector<std::vector<Tape::Var>>& history,
    const std::vector<Tape::Var>& current) {
  std::vector<Tape::Var> out;
  for (const auto& turn : history)
    out.insert(out.end(), turn.begin(), turn.end());
  out.insert(out.end(), current.begin(), current.end());
  return out;
}

// shared per-turn setup for training and inference
struct TurnContext {
  UtteranceEncoding utt;
  ColumnEncoding cols;
  Tape::Var c_turn;
  DecoderInputs inputs;
};

TurnContext make_turn_context(Graph& g, const InteractionState& state,
                              const Utterance& u, const Schema& schema,
                              const EmbeddingProvider& provider,
                              const SqlTokenSeq* prev_query) {
  TurnContext tc;
  auto enc = encode_utterance_table(g, u, schema, provider);
  tc.utt = std::move(enc.first);
  tc.cols = std::move(enc.second);
  tc.c_turn = turn_attention(g, tc.utt.final_state, state.history_utterances,
                             g.cfg().turn_window);
  tc.inputs.columns = &tc.cols;
  tc.inputs.table_embeds = table_embeddings(g, schema, tc.cols);
  tc.inputs.all_token_states =
      flatten_token_states(state.history_token_states, tc.utt.token_states);
  tc.inputs.prev_query = prev_query;
  tc.inputs.editing = g.cfg().editing_enabled && prev_query != nullptr &&
                      !prev_query->empty();
  if (tc.inputs.editing)
    tc.inputs.prev_query_states = encode_prev_query(
        g, *prev_query, schema, tc.cols, tc.inputs.table_embeds);
  return tc;
}

// teacher-forced per-turn loss: mean over gold tokens plus EOS
Tape::Var turn_loss(Graph& g, TurnContext& tc, const SqlTokenSeq& gold,
                    const OutputVocab& vocab) {
  Tape& t = g.tape;
  DecoderState state = decoder_initial(g, tc.c_turn);
  std::vector<Tape::Var> neglogs;
  SqlToken prev_tok = vocab.entries[OutputVocab::kBos];
  for (std::size_t k = 0; k <= gold.size(); ++k) {
    const Tape::Var q =
        decoder_token_embedding(g, prev_tok, tc.cols, tc.inputs.table_embeds);
    StepOutput step = decoder_step(g, state, q, tc.inputs);
    const SqlToken& target =
        k < gold.size() ? gold.tokens[k] : vocab.entries[OutputVocab::kEos];
    const Tape::Var mass = gold_token_mass(g, step, vocab, tc.inputs, target);
    neglogs.push_back(t.neg(t.log_of(mass)));
    prev_tok = target;
  }
  return t.scalar_mul(t.add_scalars(neglogs),
                      1.0 / static_cast<double>(neglogs.size()));
}

}  // namespace

std::pair<Tape::Var, std::size_t> interaction_loss(
    Graph& g, const Interaction& interaction, const Schema& schema,
    const EmbeddingProvider& provider) {
  const OutputVocab vocab = OutputVocab::build(schema);
  InteractionState state = initial_interaction_state(g);
  std::vector<Tape::Var> losses;
  const SqlTokenSeq* prev_gold = nullptr;
  for (const auto& [u, gold] : interaction.turns) {
    TurnContext tc = make_turn_context(g, state, u, schema, provider, prev_gold);
    losses.push_back(turn_loss(g, tc, gold, vocab));
    state = advance(g, state, tc.utt.final_state, tc.utt.token_states, gold);
    prev_gold = &state.history_queries.back();
  }
  return {g.tape.add_scalars(losses), losses.size()};
}

namespace {

class AdamOptimizer {
 public:
  AdamOptimizer(ModelParams& params, double lr)
      : params_(params), lr_(lr) {
    for (const auto& name : params.names()) {
      const Tensor& v = params.value(name);
      m_[name] = Tensor(v.rows, v.cols);
      v_[name] = Tensor(v.rows, v.cols);
    }
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, t_);
    const double bc2 = 1.0 - std::pow(kBeta2, t_);
    for (const auto& name : params_.names()) {
      Tensor& value = params_.value_mut(name);
      const Tensor& g = params_.grad(name);
      Tensor& m = m_[name];
      Tensor& v = v_[name];
      for (std::size_t i = 0; i < value.size(); ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
        value[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kEps);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  ModelParams& params_;
  double lr_;
  int t_ = 0;
  std::map<std::string, Tensor> m_, v_;
};

double dataset_loss(ModelParams& params, const std::vector<Interaction>& data,
                    const SchemaMap& schemas, const EmbeddingProvider& provider) {
  double total = 0.0;
  std::size_t turns = 0;
  for (const auto& it : data) {
    Graph g(params, /*with_grads=*/false);
    const auto [loss, n] = interaction_loss(g, it, schemas.at(it.db_id), provider);
    total += g.tape.value(loss)[0];
    turns += n;
  }
  return turns == 0 ? 0.0 : total / static_cast<double>(turns);
}

}  // namespace

std::pair<ModelParams, TrainReport> fit(const TrainConfig& config,
                                        const std::vector<Interaction>& train,
                                        const std::vector<Interaction>& dev,
                                        const SchemaMap& schemas,
                                        const EmbeddingProvider& provider) {
  config.validate();
  if (train.empty()) throw Error("fit: empty training set");
  const auto t0 = std::chrono::steady_clock::now();
  ModelParams params(config.model);
  AdamOptimizer adam(params, config.initial_lr);
  TrainReport report;
  std::mt19937_64 shuffle_rng(config.model.seed ^ 0x5eedULL);

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  double prev_val_loss = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double train_total = 0.0;
    std::size_t train_turns = 0;
    std::size_t batch_turns = 0;
    params.zero_grads();
    auto flush = [&] {
      if (batch_turns == 0) return;
      params.scale_grads(1.0 / static_cast<double>(batch_turns));
      params.clip_grads(config.grad_clip_norm);
      adam.step();
      params.zero_grads();
      batch_turns = 0;
    };
    for (const std::size_t idx : order) {
      const Interaction& it = train[idx];
      Graph g(params, /*with_grads=*/true);
      const auto [loss, n] =
          interaction_loss(g, it, schemas.at(it.db_id), provider);
      const double loss_val = g.tape.value(loss)[0];
      if (!std::isfinite(loss_val))
        throw Error("training diverged: non-finite loss at epoch " +
                    std::to_string(epoch + 1) + ", interaction '" +
                    it.interaction_id + "'");
      g.tape.backward(loss);
      train_total += loss_val;
      train_turns += n;
      batch_turns += n;
      if (batch_turns >= config.batch_size) flush();
    }
    flush();

    const double train_loss =
        train_turns == 0 ? 0.0 : train_total / static_cast<double>(train_turns);
    const double val_loss =
        dev.empty() ? train_loss : dataset_loss(params, dev, schemas, provider);
    double val_qm = 0.0;
    if (!dev.empty())
      val_qm = evaluate(params, dev, schemas, provider, config.eval_prev_mode)
                   .question_match;
    report.train_loss.push_back(train_loss);
    report.validation_loss.push_back(val_loss);
    report.validation_question_match.push_back(val_qm);
    report.learning_rate.push_back(adam.lr());
    if (val_loss > prev_val_loss)
      adam.set_lr(adam.lr() * config.lr_decay_factor);
    prev_val_loss = val_loss;
    if (!config.checkpoint_dir.empty())
      params.save(config.checkpoint_dir + "/epoch_" +
                  std::to_string(epoch + 1) + ".ckpt.json");
  }
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return {std::move(params), std::move(report)};
}

std::vector<std::vector<SqlTokenSeq>> predict(
    ModelParams& params, const std::vector<Interaction>& data,
    const SchemaMap& schemas, const EmbeddingProvider& provider,
    PrevQueryMode mode) {
  std::vector<std::vector<SqlTokenSeq>> out;
  for (const auto& it : data) {
    const Schema& schema = schemas.at(it.db_id);
    const OutputVocab vocab = OutputVocab::build(schema);
    Graph g(params, /*with_grads=*/false);
    InteractionState state = initial_interaction_state(g);
    std::vector<SqlTokenSeq> preds;
    const SqlTokenSeq* prev = nullptr;
    for (const auto& [u, gold] : it.turns) {
      TurnContext tc = make_turn_context(g, state, u, schema, provider, prev);
      DecodeResult r =
          decode_greedy(g, tc.c_turn, schema, vocab, tc.inputs,
                        params.config().max_decode_len);
      preds.push_back(r.tokens);
      const SqlTokenSeq& carried =
          mode == PrevQueryMode::GOLD ? gold : preds.back();
      state = advance(g, state, tc.utt.final_state, tc.utt.token_states, carried);
      prev = &state.history_queries.back();
    }
    out.push_back(std::move(preds));
  }
  return out;
}

EvalReport score_predictions(const std::vector<std::vector<SqlTokenSeq>>& preds,
                             const std::vector<std::vector<SqlTokenSeq>>& golds) {
  EvalReport r;
  std::vector<SqlTokenSeq> flat_p, flat_g;
  struct Acc {
    std::size_t n = 0, hit = 0;
  };
  std::map<std::string, Acc> by_turn, by_hardness;
  if (preds.size() != golds.size())
    throw Error("score_predictions: grouping mismatch");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].size() != golds[i].size())
      throw Error("score_predictions: grouping mismatch at interaction " +
                  std::to_string(i));
    for (std::size_t t = 0; t < preds[i].size(); ++t) {
      flat_p.push_back(preds[i][t]);
      flat_g.push_back(golds[i][t]);
      const bool hit = exact_set_match(preds[i][t], golds[i][t]);
      const std::string turn_name = t < 3 ? std::to_string(t + 1) : "4+";
      auto& ta = by_turn[turn_name];
      ++ta.n;
      ta.hit += hit;
      std::string h = "undecomposable";
      try {
        h = hardness(decompose(golds[i][t]));
      } catch (const Error&) {
      }
      auto& ha = by_hardness[h];
      ++ha.n;
      ha.hit += hit;
    }
  }
  r.question_match = question_match(flat_p, flat_g);
  r.interaction_match = interaction_match(preds, golds);
  for (const char* name : {"1", "2", "3", "4+"}) {
    const auto it = by_turn.find(name);
    if (it == by_turn.end()) continue;
    r.per_turn.push_back({name, it->second.n,
                          static_cast<double>(it->second.hit) /
                              static_cast<double>(it->second.n)});
  }
  for (const char* name : {"easy", "medium", "hard", "extra", "undecomposable"}) {
    const auto it = by_hardness.find(name);
    if (it == by_hardness.end()) continue;
    r.per_hardness.push_back({name, it->second.n,
                              static_cast<double>(it->second.hit) /
                                  static_cast<double>(it->second.n)});
  }
  return r;
}

EvalReport evaluate(ModelParams& params, const std::vector<Interaction>& data,
                    const SchemaMap& schemas, const EmbeddingProvider& provider,
                    PrevQueryMode mode) {
  const auto preds = predict(params, data, schemas, provider, mode);
  std::vector<std::vector<SqlTokenSeq>> golds;
  for (const auto& it : data) {
    std::vector<SqlTokenSeq> g;
    for (const auto& [u, q] : it.turns) g.push_back(q);
    golds.push_back(std::move(g));
  }
  return score_predictions(preds, golds);
}

double gradient_check_max_rel_err(ModelParams& params,
                                  const Interaction& interaction,
                                  const Schema& schema,
                                  const EmbeddingProvider& provider,
                                  double step) {
  auto loss_value = [&]() {
    Graph g(params, /*with_grads=*/false);
    const auto [loss, n] = interaction_loss(g, interaction, schema, provider);
    return g.tape.value(loss)[0] / static_cast<double>(n);
  };
  params.zero_grads();
  {
    Graph g(params, /*with_grads=*/true);
    const auto [loss, n] = interaction_loss(g, interaction, schema, provider);
    const Tape::Var scaled =
        g.tape.scalar_mul(loss, 1.0 / static_cast<double>(n));
    g.tape.backward(scaled);
  }
  double max_rel = 0.0;
  for (const auto& name : params.names()) {
    Tensor& value = params.value_mut(name);
    const Tensor& grad = params.grad(name);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + step;
      const double up = loss_value();
      value[i] = saved - step;
      const double down = loss_value();
      value[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
      max_rel = std::max(max_rel, std::abs(fd - grad[i]) / denom);
    }
  }
  return max_rel;
}

}  // namespace editsql
