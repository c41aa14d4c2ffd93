#pragma once

#include <string>
#include <vector>

namespace editsql {

enum class SqlTokenKind { KEYWORD, TABLE, COLUMN, VALUE, EOS };

// One token of a tokenized SQL query. Keywords are uppercase-normalized and
// drawn from the closed vocabulary in sql_lang; table names extend that
// vocabulary per schema, as column names do. Column
// references are resolved to schema column ids at tokenization time; all
// literals collapse to a single VALUE placeholder.
struct SqlToken {
  SqlTokenKind kind = SqlTokenKind::KEYWORD;
  std::string text;     // KEYWORD: uppercase; TABLE: table name; COLUMN:
                        // "table.column" or "*"; VALUE: "value"
  int column_id = -1;   // valid iff kind == COLUMN
  int table_id = -1;    // valid iff kind == TABLE

  bool operator==(const SqlToken& o) const {
    return kind == o.kind && text == o.text && column_id == o.column_id &&
           table_id == o.table_id;
  }

  // Identity used for diffing and for aggregating output probabilities.
  std::string surface_key() const;

  static SqlToken keyword(std::string text);
  static SqlToken table(std::string name, int table_id);
  static SqlToken column(std::string rendered, int column_id);
  static SqlToken value();
  static SqlToken eos();
};

struct SqlTokenSeq {
  std::vector<SqlToken> tokens;
  std::string schema_ref;  // db_id

  bool operator==(const SqlTokenSeq& o) const {
    return tokens == o.tokens && schema_ref == o.schema_ref;
  }
  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

}  // namespace editsql
