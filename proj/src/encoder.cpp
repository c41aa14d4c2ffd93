#include "editsql/encoder.hpp"

#include <cmath>

namespace editsql {

std::pair<UtteranceEncoding, ColumnEncoding> encode_utterance_table(
    Graph& g, const Utterance& utterance, const Schema& schema,
    const EmbeddingProvider& provider) {
  if (utterance.tokens.empty())
    throw Error("encode_utterance_table: empty utterance");
  if (schema.columns.empty())
    throw Error("encode_utterance_table: schema has no columns");
  Tape& t = g.tape;

  // first-layer input embeddings
  std::vector<Tape::Var> utt_embeds;
  std::vector<std::vector<Tape::Var>> header_word_embeds;
  if (provider.mode() == EmbeddingMode::JOINT_CONTEXTUAL) {
    const auto joint = provider.joint_embed(utterance, schema);
    for (const auto& v : joint.utterance_tokens)
      utt_embeds.push_back(t.constant(v));
    for (const auto& words : joint.header_words) {
      std::vector<Tape::Var> ws;
      for (const auto& v : words) ws.push_back(t.constant(v));
      header_word_embeds.push_back(std::move(ws));
    }
  } else {
    for (const auto& tok : utterance.tokens)
      utt_embeds.push_back(t.constant(provider.embed(tok)));
    for (const auto& col : schema.columns) {
      std::vector<Tape::Var> ws;
      for (const auto& w : col.words()) ws.push_back(t.constant(provider.embed(w)));
      header_word_embeds.push_back(std::move(ws));
    }
  }

  // first layers
  const BiLstmOut utt1 = bilstm(g, "utt1.fwd", "utt1.bwd", utt_embeds);
  std::vector<Tape::Var> header_summaries;  // first-layer [fwd_last; bwd_last]
  for (const auto& words : header_word_embeds)
    header_summaries.push_back(bilstm(g, "hdr1.fwd", "hdr1.bwd", words).summary);

  // utterance side: dot-product attention over header summaries
  std::vector<Tape::Var> utt2_in;
  for (const Tape::Var hs : utt1.states) {
    const Tape::Var alpha = g.attention_softmax(t.dots(hs, header_summaries));
    const Tape::Var ctx = t.weighted_sum(alpha, header_summaries);
    utt2_in.push_back(t.concat({hs, ctx}));
  }
  const BiLstmOut utt2 = bilstm(g, "utt2.fwd", "utt2.bwd", utt2_in);

  // table side: scaled dot-product self-attention among headers, plus
  // attention over first-layer utterance states
  const double scale = 1.0 / std::sqrt(static_cast<double>(g.cfg().bi()));
  ColumnEncoding cols;
  for (const Tape::Var hs : header_summaries) {
    const Tape::Var self_scores =
        t.scalar_mul(t.dots(hs, header_summaries), scale);
    const Tape::Var self_ctx =
        t.weighted_sum(g.attention_softmax(self_scores), header_summaries);
    const Tape::Var utt_alpha = g.attention_softmax(t.dots(hs, utt1.states));
    const Tape::Var utt_ctx = t.weighted_sum(utt_alpha, utt1.states);
    // second layer over the single fused vector for this header
    cols.header_states.push_back(
        bilstm(g, "hdr2.fwd", "hdr2.bwd", {t.concat({self_ctx, utt_ctx})})
            .summary);
  }

  UtteranceEncoding utt;
  utt.token_states = utt2.states;
  utt.final_state = utt2.states.back();
  return {std::move(utt), std::move(cols)};
}

}  // namespace editsql
