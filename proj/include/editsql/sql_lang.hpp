#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "editsql/corpus.hpp"
#include "editsql/sql_tokens.hpp"

namespace editsql {

struct ParseError : Error {
  using Error::Error;
};

// Closed keyword vocabulary (uppercase), including BOS/EOS/value sentinels
// and the small numbers that appear as LIMIT arguments.
const std::vector<std::string>& sql_keywords();
bool is_sql_keyword(const std::string& upper);

// Tokenize raw SQL against a schema. Aliases (FROM t AS T1) are resolved and
// dropped; column references become COLUMN tokens carrying the column_id;
// string/number literals become VALUE tokens.
SqlTokenSeq tokenize_sql(const std::string& raw, const Schema& schema);

// Token-to-text; tokenize_sql(render(seq)) == seq.
std::string render(const SqlTokenSeq& seq);
std::string render(const SqlToken& tok);

struct ClauseSet {
  std::multiset<std::string> select_items;
  bool select_distinct = false;
  std::multiset<std::string> from_tables;
  std::multiset<std::string> join_conditions;  // ON conds, operand-sorted
  // (connective, canonical condition); first conjunct's connective is "AND"
  std::multiset<std::pair<std::string, std::string>> where_conjuncts;
  std::multiset<std::string> group_by;
  std::vector<std::pair<std::string, std::string>> order_by;  // (expr, dir)
  std::multiset<std::pair<std::string, std::string>> having;
  std::optional<std::string> limit;
  // (operator, left, right) for UNION/INTERSECT/EXCEPT
  struct SetOp;
  std::shared_ptr<SetOp> set_op;

  bool has_subquery = false;  // any nested SELECT anywhere

  // Deterministic serialization used for nested-subquery canonical forms.
  std::string canonical() const;
};

struct ClauseSet::SetOp {
  std::string op;
  ClauseSet left;
  ClauseSet right;
};

struct DecompositionError : Error {
  using Error::Error;
};

ClauseSet decompose(const SqlTokenSeq& seq);

// Clause-level, order- and value-insensitive equality (exact set match).
bool exact_set_match(const ClauseSet& pred, const ClauseSet& gold);
// Convenience: decompose both; a failed pred decomposition scores false.
bool exact_set_match(const SqlTokenSeq& pred, const SqlTokenSeq& gold);

// Subset of {WHERE, AGG, GROUP, ORDER, HAVING, SET, JOIN, Nested}.
std::set<std::string> component_flags(const ClauseSet& c);

// Coarse 4-bucket difficulty heuristic (easy/medium/hard/extra) based on
// component counts; documented in the README, not the official classifier.
std::string hardness(const ClauseSet& c);

double question_match(const std::vector<SqlTokenSeq>& preds,
                      const std::vector<SqlTokenSeq>& golds);
double interaction_match(const std::vector<std::vector<SqlTokenSeq>>& preds,
                         const std::vector<std::vector<SqlTokenSeq>>& golds);

}  // namespace editsql
