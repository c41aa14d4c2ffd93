#pragma once

#include <string>
#include <vector>

#include "editsql/corpus.hpp"
#include "editsql/sql_tokens.hpp"

namespace editsql {

enum class EditOpKind { COPY, INSERT, DELETE };

struct EditBlock {
  EditOpKind kind;
  std::vector<SqlToken> tokens;
};

// COPY/DELETE payloads concatenate to the source; COPY/INSERT to the target.
// Adjacent blocks never share a kind.
struct EditScript {
  std::vector<EditBlock> ops;

  std::size_t copy_blocks() const;
  std::size_t insert_blocks() const;
  std::size_t tokens_copied() const;
  std::size_t tokens_inserted() const;
};

// Subsequence-alignment diff: COPY blocks cover a longest common
// subsequence, so the copied-token total is symmetric in the arguments.
// Matches are taken as early as possible in the source.
EditScript diff(const SqlTokenSeq& prev, const SqlTokenSeq& cur);

// Inverse of diff: replay the script against prev and return the target.
SqlTokenSeq apply(const EditScript& script, const SqlTokenSeq& prev);

struct TurnEditStats {
  int turn_index = 0;  // 1, 2, 3; 4 means the "4+" bucket
  double avg_query_length = 0.0;
  double avg_copy_ops = 0.0;
  double avg_insert_ops = 0.0;
  double avg_tokens_copied = 0.0;
  double avg_tokens_inserted = 0.0;
  std::size_t sample_count = 0;
};

// Per-turn copy/insert averages over gold queries; turn 1 counts every token
// as inserted, turns >= 4 share one bucket.
std::vector<TurnEditStats> turn_edit_stats(
    const std::vector<Interaction>& interactions);

struct Segment {
  std::string label;  // SELECT, FROM, GROUP_BY, ORDER_BY, HAVING,
                      // WHERE_CONDITION, LIMIT
  std::vector<SqlToken> tokens;
  std::size_t start = 0;  // span offset in the source query
};

// Clause segments plus one segment per WHERE condition; spans are disjoint
// and in source order. Undecomposable input yields an empty list.
std::vector<Segment> extract_segments(const SqlTokenSeq& seq);

}  // namespace editsql
