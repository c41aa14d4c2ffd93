#pragma once

#include <map>
#include <string>
#include <vector>

#include "editsql/params.hpp"
#include "editsql/tape.hpp"

namespace editsql {

// One computation graph over a parameter store. Training builds a graph per
// interaction and calls tape.backward; inference builds the same graph and
// skips it.
class Graph {
 public:
  Graph(ModelParams& params, bool with_grads)
      : params_(params), with_grads_(with_grads) {}

  Tape tape;

  ModelParams& params() { return params_; }
  const ModelConfig& cfg() const { return params_.config(); }

  // cached tape node for a named parameter
  Tape::Var p(const std::string& name);
  // row of a parameter matrix (e.g. one keyword embedding)
  Tape::Var row(const std::string& name, std::size_t r);

  // softmax that also records its value for the normalization test suite
  Tape::Var attention_softmax(Tape::Var scores);
  const std::vector<Tensor>& attention_log() const { return attention_log_; }

 private:
  ModelParams& params_;
  bool with_grads_;
  std::map<std::string, Tape::Var> cache_;
  std::vector<Tensor> attention_log_;
};

struct LstmState {
  Tape::Var h = Tape::kNone;
  Tape::Var c = Tape::kNone;
};

LstmState lstm_initial(Graph& g, std::size_t hidden);
// One step of the packed-gate LSTM cell "<stem>.W"/"<stem>.b".
LstmState lstm_step(Graph& g, const std::string& stem, Tape::Var x,
                    const LstmState& prev);

// Bidirectional pass; returns per-position [fwd;bwd] states and the summary
// [last fwd; last bwd].
struct BiLstmOut {
  std::vector<Tape::Var> states;
  Tape::Var summary = Tape::kNone;
};
BiLstmOut bilstm(Graph& g, const std::string& fwd_stem,
                 const std::string& bwd_stem,
                 const std::vector<Tape::Var>& inputs);

}  // namespace editsql
