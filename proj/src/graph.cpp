#include "editsql/graph.hpp"

namespace editsql {

Tape::Var Graph::p(const std::string& name) {
  const auto it = cache_.find(name);
  if (it != cache_.end()) return it->second;
  const Tape::Var v = tape.param(&params_.value(name),
                                 with_grads_ ? &params_.grad(name) : nullptr);
  cache_.emplace(name, v);
  return v;
}

Tape::Var Graph::row(const std::string& name, std::size_t r) {
  const Tensor& t = params_.value(name);
  if (r >= t.rows) throw Error("row out of range for parameter " + name);
  return tape.slice(p(name), r * t.cols, t.cols);
}

Tape::Var Graph::attention_softmax(Tape::Var scores) {
  const Tape::Var out = tape.softmax(scores);
  attention_log_.push_back(tape.value(out));
  return out;
}

LstmState lstm_initial(Graph& g, std::size_t hidden) {
  return {g.tape.zeros(hidden), g.tape.zeros(hidden)};
}

LstmState lstm_step(Graph& g, const std::string& stem, Tape::Var x,
                    const LstmState& prev) {
  Tape& t = g.tape;
  const Tape::Var gates =
      t.add(t.matvec(g.p(lstm_w(stem)), t.concat({x, prev.h})),
            g.p(lstm_b(stem)));
  const std::size_t H = t.value(prev.h).size();
  const Tape::Var i = t.sigmoid_of(t.slice(gates, 0, H));
  const Tape::Var f = t.sigmoid_of(t.slice(gates, H, H));
  const Tape::Var gc = t.tanh_of(t.slice(gates, 2 * H, H));
  const Tape::Var o = t.sigmoid_of(t.slice(gates, 3 * H, H));
  LstmState next;
  next.c = t.add(t.cmult(i, gc), t.cmult(f, prev.c));
  next.h = t.cmult(o, t.tanh_of(next.c));
  return next;
}

BiLstmOut bilstm(Graph& g, const std::string& fwd_stem,
                 const std::string& bwd_stem,
                 const std::vector<Tape::Var>& inputs) {
  if (inputs.empty()) throw Error("bilstm: empty input sequence");
  const std::size_t H = g.params().value(lstm_b(fwd_stem)).rows / 4;
  std::vector<Tape::Var> fwd, bwd(inputs.size());
  LstmState s = lstm_initial(g, H);
  for (const Tape::Var x : inputs) {
    s = lstm_step(g, fwd_stem, x, s);
    fwd.push_back(s.h);
  }
  const Tape::Var fwd_last = s.h;
  s = lstm_initial(g, H);
  for (std::size_t i = inputs.size(); i-- > 0;) {
    s = lstm_step(g, bwd_stem, inputs[i], s);
    bwd[i] = s.h;
  }
  BiLstmOut out;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    out.states.push_back(g.tape.concat({fwd[i], bwd[i]}));
  out.summary = g.tape.concat({fwd_last, s.h});
  return out;
}

}  // namespace editsql
