#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "editsql/sql_tokens.hpp"
#include "editsql/tensor.hpp"

namespace editsql {

// A schema column presented as the word sequence "table name . column name".
// The star column is header 0 with words {"*"} and no table.
struct ColumnHeader {
  int column_id = 0;
  int table_index = -1;  // index into Schema::tables, -1 for star
  std::vector<std::string> table_name;   // word list, empty for star
  std::vector<std::string> column_name;  // word list
  std::vector<std::string> natural_name;  // dataset's NL name, when present
  std::string original_column;            // lowercased original name
  bool is_star = false;

  std::vector<std::string> words() const;
};

struct Schema {
  std::string db_id;
  std::vector<std::string> tables;           // original (lowercased) names
  std::vector<ColumnHeader> columns;         // includes the star header
  std::vector<std::pair<int, int>> foreign_keys;

  // column_id of "table.column", -1 when absent
  int find_column(const std::string& table, const std::string& column) const;
  int find_table(const std::string& table) const;
  // columns with the given name across all tables
  std::vector<int> columns_named(const std::string& column) const;
  void validate() const;
};

struct Utterance {
  int turn_index = 1;  // 1-based
  std::vector<std::string> tokens;
};

struct Interaction {
  std::string interaction_id;
  std::string db_id;
  std::vector<std::pair<Utterance, SqlTokenSeq>> turns;
  std::optional<std::string> final_goal;
};

struct CorpusStats {
  std::size_t num_interactions = 0;
  std::size_t num_questions = 0;
  double avg_turns = 0.0;
  double avg_question_length = 0.0;
  std::size_t question_vocab_size = 0;
  std::map<std::string, double> clause_frequencies;  // percentages
};

using SchemaMap = std::map<std::string, Schema>;

// Lowercase and split on whitespace/punctuation; numbers stay whole tokens.
std::vector<std::string> tokenize_utterance(const std::string& text);
// stu_fname -> {"stu", "fname"}
std::vector<std::string> split_name_words(const std::string& name);

ColumnHeader build_column_header(const std::vector<std::string>& table_name,
                                 const std::vector<std::string>& column_name);

SchemaMap load_schemas(const std::string& path);
std::vector<Interaction> load_interactions(const std::string& path,
                                           const SchemaMap& schemas);
// Inverse of load_interactions for the documented JSON layout.
void save_interactions(const std::string& path,
                       const std::vector<Interaction>& interactions,
                       const SchemaMap& schemas);

CorpusStats corpus_stats(const std::vector<Interaction>& interactions);

}  // namespace editsql
