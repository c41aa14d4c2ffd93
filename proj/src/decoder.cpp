#include "editsql/decoder.hpp"

#include <algorithm>

#include "editsql/sql_lang.hpp"

namespace editsql {

OutputVocab OutputVocab::build(const Schema& schema) {
  OutputVocab v;
  const auto& kws = sql_keywords();
  for (std::size_t i = 0; i < kws.size(); ++i) {
    if (i == kEos) v.entries.push_back(SqlToken::eos());
    else if (i == kValue) v.entries.push_back(SqlToken::value());
    else v.entries.push_back(SqlToken::keyword(kws[i]));
  }
  v.num_keywords = v.entries.size();
  for (std::size_t t = 0; t < schema.tables.size(); ++t)
    v.entries.push_back(SqlToken::table(schema.tables[t], static_cast<int>(t)));
  v.num_tables = schema.tables.size();
  for (const auto& col : schema.columns) {
    const std::string rendered =
        col.is_star ? "*"
                    : schema.tables[col.table_index] + "." + col.original_column;
    v.entries.push_back(SqlToken::column(rendered, col.column_id));
  }
  v.num_columns = schema.columns.size();
  for (std::size_t i = 0; i < v.entries.size(); ++i)
    v.by_key_[v.entries[i].surface_key()] = i;
  return v;
}

int OutputVocab::index_of(const SqlToken& token) const {
  const auto it = by_key_.find(token.surface_key());
  return it == by_key_.end() ? -1 : static_cast<int>(it->second);
}

std::vector<Tape::Var> table_embeddings(Graph& g, const Schema& schema,
                                        const ColumnEncoding& columns) {
  std::vector<Tape::Var> out;
  for (std::size_t t = 0; t < schema.tables.size(); ++t) {
    std::vector<Tape::Var> members;
    for (const auto& col : schema.columns)
      if (col.table_index == static_cast<int>(t))
        members.push_back(columns.header_states[col.column_id]);
    if (members.empty())
      out.push_back(columns.header_states[0]);  // degenerate: star only
    else
      out.push_back(g.tape.average(members));
  }
  return out;
}

Tape::Var decoder_token_embedding(Graph& g, const SqlToken& token,
                                  const ColumnEncoding& columns,
                                  const std::vector<Tape::Var>& table_embeds) {
  switch (token.kind) {
    case SqlTokenKind::COLUMN:
      if (token.column_id < 0 ||
          token.column_id >= static_cast<int>(columns.header_states.size()))
        throw Error("token references column " + std::to_string(token.column_id) +
                    " outside the current schema");
      return columns.header_states[token.column_id];
    case SqlTokenKind::TABLE:
      if (token.table_id < 0 ||
          token.table_id >= static_cast<int>(table_embeds.size()))
        throw Error("token references table outside the current schema");
      return table_embeds[token.table_id];
    case SqlTokenKind::VALUE:
      return g.row("kw_embed", OutputVocab::kValue);
    case SqlTokenKind::EOS:
      return g.row("kw_embed", OutputVocab::kEos);
    case SqlTokenKind::KEYWORD: {
      const auto& kws = sql_keywords();
      const auto it = std::find(kws.begin(), kws.end(), token.text);
      if (it == kws.end())
        throw Error("keyword '" + token.text + "' not in the output vocabulary");
      return g.row("kw_embed", static_cast<std::size_t>(it - kws.begin()));
    }
  }
  throw Error("unreachable token kind");
}

std::vector<Tape::Var> encode_prev_query(Graph& g, const SqlTokenSeq& query,
                                         const Schema& schema,
                                         const ColumnEncoding& columns,
                                         const std::vector<Tape::Var>& table_embeds) {
  (void)schema;
  if (query.empty()) return {};
  std::vector<Tape::Var> inputs;
  for (const auto& tok : query.tokens)
    inputs.push_back(decoder_token_embedding(g, tok, columns, table_embeds));
  return bilstm(g, "prevq.fwd", "prevq.bwd", inputs).states;
}

DecoderState decoder_initial(Graph& g, Tape::Var c_turn,
                             std::optional<Tape::Var> h_I) {
  Tape& t = g.tape;
  const std::size_t HD = g.cfg().decoder_hidden();
  DecoderState s;
  s.l1 = lstm_initial(g, HD);
  s.l2 = lstm_initial(g, HD);
  if (g.cfg().feed_interaction_state && h_I) {
    s.l1.h = t.matvec(g.p("W_init_hI"), t.concat({c_turn, *h_I}));
  } else {
    if (t.value(c_turn).size() != HD)
      throw Error("decoder_initial: c_turn dimension mismatch");
    s.l1.h = c_turn;
  }
  s.c_prev = t.zeros(g.cfg().context_dim());
  return s;
}

namespace {

// attention context: bilinear scores, softmax,
// weighted sum over the keys
Tape::Var attended_context(Graph& g, const std::string& w_name, Tape::Var h_D,
                           const std::vector<Tape::Var>& keys) {
  Tape& t = g.tape;
  const Tape::Var q = t.matvec(g.p(w_name), h_D);
  const Tape::Var alpha = g.attention_softmax(t.dots(q, keys));
  return t.weighted_sum(alpha, keys);
}

}  // namespace

StepOutput decoder_step(Graph& g, DecoderState& state, Tape::Var q_embed,
                        const DecoderInputs& in) {
  Tape& t = g.tape;
  if (in.editing && (in.prev_query == nullptr || in.prev_query_states.empty()))
    throw Error("editing enabled without a previous query (disable at turn 1)");

  const Tape::Var x = t.concat({q_embed, state.c_prev});
  state.l1 = lstm_step(g, "dec.l1", x, state.l1);
  state.l2 = lstm_step(g, "dec.l2", state.l1.h, state.l2);
  const Tape::Var h_D = state.l2.h;

  StepOutput out;
  out.editing = in.editing;
  const Tape::Var c_column =
      attended_context(g, "W_column_att", h_D, in.columns->header_states);
  const Tape::Var c_token =
      attended_context(g, "W_utterance_att", h_D, in.all_token_states);
  const Tape::Var c_query =
      in.editing ? attended_context(g, "W_query_att", h_D, in.prev_query_states)
                 : t.zeros(g.cfg().bi());
  out.c = t.concat({c_column, c_token, c_query});

  out.o = t.tanh_of(t.matvec(g.p("W_o"), t.concat({h_D, out.c})));
  const Tape::Var m_sql = t.add(t.matvec(g.p("W_SQL"), out.o), g.p("b_SQL"));
  const Tape::Var u = t.matvec(g.p("W_column"), out.o);
  std::vector<Tape::Var> score_parts = {m_sql};
  if (!in.table_embeds.empty()) {
    const Tape::Var ut = t.matvec(g.p("W_table"), out.o);
    score_parts.push_back(t.dots(ut, in.table_embeds));
  }
  score_parts.push_back(t.dots(u, in.columns->header_states));
  out.base_scores = t.concat(score_parts);
  out.base_probs = t.softmax(out.base_scores);

  if (in.editing) {
    out.p_copy =
        t.sigmoid_of(t.add(t.dot(out.c, g.p("W_copy")), g.p("b_copy")));
    const Tape::Var uq = t.matvec(g.p("W_prev_SQL"), out.o);
    out.prev_probs = g.attention_softmax(t.dots(uq, in.prev_query_states));
  }
  state.k += 1;
  state.c_prev = out.c;
  return out;
}

Tape::Var gold_token_mass(Graph& g, const StepOutput& step,
                          const OutputVocab& vocab, const DecoderInputs& in,
                          const SqlToken& gold) {
  Tape& t = g.tape;
  const int idx = vocab.index_of(gold);
  if (idx < 0)
    throw Error("gold token '" + gold.text +
                "' is absent from the output vocabulary");
  const Tape::Var base_mass = t.pick(step.base_probs, static_cast<std::size_t>(idx));
  if (!step.editing) return base_mass;
  std::vector<std::size_t> positions;
  const std::string key = gold.surface_key();
  for (std::size_t j = 0; j < in.prev_query->tokens.size(); ++j)
    if (in.prev_query->tokens[j].surface_key() == key) positions.push_back(j);
  const Tape::Var copy_mass = t.gather_sum(step.prev_probs, positions);
  return t.add(t.mul(step.p_copy, copy_mass),
               t.mul(t.one_minus(step.p_copy), base_mass));
}

OutputDistribution aggregate_distribution(const Graph& g, const StepOutput& step,
                                          const OutputVocab& vocab,
                                          const DecoderInputs& in) {
  OutputDistribution d;
  d.editing = step.editing;
  const Tensor& base = g.tape.value(step.base_probs);
  d.per_entry.assign(base.v.begin(), base.v.end());
  if (step.editing) {
    d.p_copy = g.tape.value(step.p_copy)[0];
    const Tensor& prev = g.tape.value(step.prev_probs);
    d.prev_positions.assign(prev.v.begin(), prev.v.end());
    const double p_insert = 1.0 - d.p_copy;
    for (double& p : d.per_entry) p *= p_insert;
    for (std::size_t j = 0; j < in.prev_query->tokens.size(); ++j) {
      const int idx = vocab.index_of(in.prev_query->tokens[j]);
      if (idx < 0)
        throw Error("previous query token outside the output vocabulary");
      d.per_entry[idx] += d.p_copy * d.prev_positions[j];
    }
  }
  for (std::size_t i = 0; i < vocab.size(); ++i)
    d.per_surface_token[vocab.entries[i].surface_key()] += d.per_entry[i];
  return d;
}

DecodeResult decode_greedy(Graph& g, Tape::Var c_turn, const Schema& schema,
                           const OutputVocab& vocab, DecoderInputs in,
                           std::size_t max_len,
                           std::optional<Tape::Var> h_I) {
  if (max_len < 1) throw Error("decode_greedy: max_len must be >= 1");
  DecoderState state = decoder_initial(g, c_turn, h_I);
  DecodeResult result;
  result.tokens.schema_ref = schema.db_id;
  SqlToken prev_tok = vocab.entries[OutputVocab::kBos];
  for (std::size_t k = 0; k < max_len; ++k) {
    const Tape::Var q =
        decoder_token_embedding(g, prev_tok, *in.columns, in.table_embeds);
    const StepOutput step = decoder_step(g, state, q, in);
    const OutputDistribution dist = aggregate_distribution(g, step, vocab, in);
    // argmax with ties broken by enumeration order
    std::size_t best = 0;
    for (std::size_t i = 1; i < dist.per_entry.size(); ++i)
      if (dist.per_entry[i] > dist.per_entry[best]) best = i;
    if (best == OutputVocab::kEos) return result;
    prev_tok = vocab.entries[best];
    result.tokens.tokens.push_back(prev_tok);
  }
  result.truncated = true;
  return result;
}

}  // namespace editsql
