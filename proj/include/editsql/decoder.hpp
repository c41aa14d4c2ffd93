#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "editsql/encoder.hpp"
#include "editsql/graph.hpp"
#include "editsql/sql_tokens.hpp"

namespace editsql {

// Per-schema output space: the closed keyword vocabulary, the schema's
// table names, then its column headers, in enumeration order.
struct OutputVocab {
  std::vector<SqlToken> entries;
  std::size_t num_keywords = 0;
  std::size_t num_tables = 0;
  std::size_t num_columns = 0;

  static constexpr std::size_t kBos = 0;
  static constexpr std::size_t kEos = 1;
  static constexpr std::size_t kValue = 2;

  static OutputVocab build(const Schema& schema);
  std::size_t size() const { return entries.size(); }
  // -1 when the token is not representable
  int index_of(const SqlToken& token) const;

 private:
  std::map<std::string, std::size_t> by_key_;
};

// Everything a decoding step attends to.
struct DecoderInputs {
  const ColumnEncoding* columns = nullptr;
  std::vector<Tape::Var> table_embeds;          // one per schema table
  std::vector<Tape::Var> all_token_states;      // h^E across every turn
  std::vector<Tape::Var> prev_query_states;     // h^Q, empty at turn 1
  const SqlTokenSeq* prev_query = nullptr;
  bool editing = false;
};

// Mean of each table's column header states; the decoder's embedding and
// scoring vector for table-name tokens.
std::vector<Tape::Var> table_embeddings(Graph& g, const Schema& schema,
                                        const ColumnEncoding& columns);

// bi-LSTM over the previous query; token inputs are keyword embeddings or
// the current turn's column/table encodings.
std::vector<Tape::Var> encode_prev_query(Graph& g, const SqlTokenSeq& query,
                                         const Schema& schema,
                                         const ColumnEncoding& columns,
                                         const std::vector<Tape::Var>& table_embeds);

struct DecoderState {
  LstmState l1, l2;
  std::size_t k = 0;
  Tape::Var c_prev = Tape::kNone;  // context vector fed to the next step
};

struct StepOutput {
  Tape::Var c = Tape::kNone;            // [c_column; c_token; c_query]
  Tape::Var o = Tape::kNone;            // tanh([h_D; c] W_o)
  Tape::Var base_scores = Tape::kNone;  // [m_SQL; m_table; m_column]
  Tape::Var base_probs = Tape::kNone;
  Tape::Var p_copy = Tape::kNone;       // editing only
  Tape::Var prev_probs = Tape::kNone;   // editing only, P_prev_SQL
  bool editing = false;
};

DecoderState decoder_initial(Graph& g, Tape::Var c_turn,
                             std::optional<Tape::Var> h_I = std::nullopt);

Tape::Var decoder_token_embedding(Graph& g, const SqlToken& token,
                                  const ColumnEncoding& columns,
                                  const std::vector<Tape::Var>& table_embeds);

StepOutput decoder_step(Graph& g, DecoderState& state, Tape::Var q_embed,
                        const DecoderInputs& in);

// Tape node for the aggregated probability of one gold token
// (copy/insert mixture; plain base probability when editing is off).
Tape::Var gold_token_mass(Graph& g, const StepOutput& step,
                          const OutputVocab& vocab, const DecoderInputs& in,
                          const SqlToken& gold);

// Plain-double views of one step's distribution, for decoding and tests.
struct OutputDistribution {
  std::vector<double> per_entry;  // aggregated, aligned with vocab entries
  std::map<std::string, double> per_surface_token;
  double p_copy = 0.0;
  std::vector<double> prev_positions;
  bool editing = false;
};

OutputDistribution aggregate_distribution(const Graph& g, const StepOutput& step,
                                          const OutputVocab& vocab,
                                          const DecoderInputs& in);

struct DecodeResult {
  SqlTokenSeq tokens;
  bool truncated = false;
};

DecodeResult decode_greedy(Graph& g, Tape::Var c_turn, const Schema& schema,
                           const OutputVocab& vocab, DecoderInputs in,
                           std::size_t max_len,
                           std::optional<Tape::Var> h_I = std::nullopt);

}  // namespace editsql
