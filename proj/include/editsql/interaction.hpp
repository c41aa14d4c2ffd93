#pragma once

#include <vector>

#include "editsql/graph.hpp"
#include "editsql/sql_tokens.hpp"

namespace editsql {

// Discourse state carried across turns. Immutable value: advance() returns
// a new state. All vars live on the interaction's graph.
struct InteractionState {
  LstmState h_I;  // uni-directional interaction encoder state
  std::vector<Tape::Var> history_utterances;            // h^U per turn
  std::vector<std::vector<Tape::Var>> history_token_states;  // h^E per turn
  std::vector<SqlTokenSeq> history_queries;  // gold or predicted per mode

  std::size_t turns() const { return history_utterances.size(); }
};

InteractionState initial_interaction_state(Graph& g);

InteractionState advance(Graph& g, const InteractionState& state,
                         Tape::Var h_U, std::vector<Tape::Var> token_states,
                         SqlTokenSeq query);

// Turn attention: c_turn = h_U_t + sum_i alpha_i h_U_i over previous
// turns; with empty history c_turn == h_U_t. window < 0 attends over every
// previous turn, otherwise only the most recent `window` turns.
Tape::Var turn_attention(Graph& g, Tape::Var h_U_t,
                         const std::vector<Tape::Var>& history,
                         int window = -1);

}  // namespace editsql
