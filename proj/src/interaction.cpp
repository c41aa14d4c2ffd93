#include "editsql/interaction.hpp"

namespace editsql {

InteractionState initial_interaction_state(Graph& g) {
  InteractionState s;
  s.h_I = lstm_initial(g, g.cfg().bi());  // h_I_0 is the zero vector
  return s;
}

InteractionState advance(Graph& g, const InteractionState& state,
                         Tape::Var h_U, std::vector<Tape::Var> token_states,
                         SqlTokenSeq query) {
  if (g.tape.value(h_U).size() != g.cfg().bi())
    throw Error("advance: utterance encoding dimension mismatch");
  InteractionState next = state;
  next.h_I = lstm_step(g, "inter", h_U, state.h_I);
  next.history_utterances.push_back(h_U);
  next.history_token_states.push_back(std::move(token_states));
  next.history_queries.push_back(std::move(query));
  return next;
}

Tape::Var turn_attention(Graph& g, Tape::Var h_U_t,
                         const std::vector<Tape::Var>& history, int window) {
  if (history.empty()) return h_U_t;
  std::vector<Tape::Var> attended(history.begin(), history.end());
  if (window >= 0 && attended.size() > static_cast<std::size_t>(window))
    attended.erase(attended.begin(), attended.end() - window);
  if (attended.empty()) return h_U_t;
  Tape& t = g.tape;
  const Tape::Var query = t.matvec(g.p("W_turn_att"), h_U_t);
  // scores transpose through W_turn_att: s_i = h_U_t W h_U_i
  std::vector<Tape::Var> keys = attended;
  const Tape::Var alpha = g.attention_softmax(t.dots(query, keys));
  return t.add(h_U_t, t.weighted_sum(alpha, attended));
}

}  // namespace editsql
