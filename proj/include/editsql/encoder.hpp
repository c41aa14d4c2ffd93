#pragma once

#include <vector>

#include "editsql/corpus.hpp"
#include "editsql/embedding.hpp"
#include "editsql/graph.hpp"

namespace editsql {

struct UtteranceEncoding {
  std::vector<Tape::Var> token_states;  // h^E per token, dim 2*hidden
  Tape::Var final_state = Tape::kNone;  // h^U, the last token's state
};

struct ColumnEncoding {
  std::vector<Tape::Var> header_states;  // h^C per header, star included
};

// Two-layer recurrent utterance and column-header encoders coupled by
// co-attention over the first-layer representations. Self-attention among
// headers is single-head scaled dot-product.
std::pair<UtteranceEncoding, ColumnEncoding> encode_utterance_table(
    Graph& g, const Utterance& utterance, const Schema& schema,
    const EmbeddingProvider& provider);

}  // namespace editsql
