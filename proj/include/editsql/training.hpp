#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "editsql/corpus.hpp"
#include "editsql/decoder.hpp"
#include "editsql/embedding.hpp"
#include "editsql/params.hpp"

namespace editsql {

enum class PrevQueryMode { GOLD, PREDICTED };

struct TrainConfig {
  ModelConfig model;
  std::size_t batch_size = 16;   // turn-level batching
  double initial_lr = 0.001;
  double lr_decay_factor = 0.8;  // applied when validation loss increases
  std::size_t max_epochs = 10;
  double grad_clip_norm = 5.0;
  PrevQueryMode eval_prev_mode = PrevQueryMode::PREDICTED;
  std::string checkpoint_dir;    // empty: no checkpoints written

  void validate() const;
};

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  std::vector<double> validation_question_match;
  std::vector<double> learning_rate;
  double wall_clock_seconds = 0.0;
};

struct EvalReport {
  double question_match = 0.0;
  double interaction_match = 0.0;
  struct Bucket {
    std::string name;
    std::size_t count = 0;
    double question_match = 0.0;
  };
  std::vector<Bucket> per_turn;      // 1, 2, 3, 4+
  std::vector<Bucket> per_hardness;  // easy, medium, hard, extra
};

// Mean negative log aggregated probability of the gold surface tokens
// (one distribution per gold token plus EOS). Double-valued view used by
// tests; training uses the tape-node path inside fit().
double sequence_loss(const std::vector<OutputDistribution>& distributions,
                     const SqlTokenSeq& gold, const OutputVocab& vocab);

// Builds the full teacher-forced graph for one interaction and returns the
// sum of per-turn mean losses plus the turn count. Editing uses the gold
// previous query.
std::pair<Tape::Var, std::size_t> interaction_loss(
    Graph& g, const Interaction& interaction, const Schema& schema,
    const EmbeddingProvider& provider);

std::pair<ModelParams, TrainReport> fit(const TrainConfig& config,
                                        const std::vector<Interaction>& train,
                                        const std::vector<Interaction>& dev,
                                        const SchemaMap& schemas,
                                        const EmbeddingProvider& provider);

// Greedy decoding over a dataset; PREDICTED mode feeds the model's own
// previous output as the editing source.
std::vector<std::vector<SqlTokenSeq>> predict(
    ModelParams& params, const std::vector<Interaction>& data,
    const SchemaMap& schemas, const EmbeddingProvider& provider,
    PrevQueryMode mode);

EvalReport score_predictions(const std::vector<std::vector<SqlTokenSeq>>& preds,
                             const std::vector<std::vector<SqlTokenSeq>>& golds);

EvalReport evaluate(ModelParams& params, const std::vector<Interaction>& data,
                    const SchemaMap& schemas, const EmbeddingProvider& provider,
                    PrevQueryMode mode);

// Central-difference gradient verification of the full model on one
// interaction; returns the maximum relative error over all parameters.
double gradient_check_max_rel_err(ModelParams& params,
                                  const Interaction& interaction,
                                  const Schema& schema,
                                  const EmbeddingProvider& provider,
                                  double step = 1e-4);

}  // namespace editsql
