#include "editsql/sql_tokens.hpp"

namespace editsql {

std::string SqlToken::surface_key() const {
  switch (kind) {
    case SqlTokenKind::KEYWORD:
      return "kw:" + text;
    case SqlTokenKind::TABLE:
      return "tab:" + std::to_string(table_id);
    case SqlTokenKind::COLUMN:
      return "col:" + std::to_string(column_id);
    case SqlTokenKind::VALUE:
      return "value";
    case SqlTokenKind::EOS:
      return "eos";
  }
  return "?";
}

SqlToken SqlToken::keyword(std::string text) {
  SqlToken t;
  t.kind = SqlTokenKind::KEYWORD;
  t.text = std::move(text);
  return t;
}

SqlToken SqlToken::table(std::string name, int table_id) {
  SqlToken t;
  t.kind = SqlTokenKind::TABLE;
  t.text = std::move(name);
  t.table_id = table_id;
  return t;
}

SqlToken SqlToken::column(std::string rendered, int column_id) {
  SqlToken t;
  t.kind = SqlTokenKind::COLUMN;
  t.text = std::move(rendered);
  t.column_id = column_id;
  return t;
}

SqlToken SqlToken::value() {
  SqlToken t;
  t.kind = SqlTokenKind::VALUE;
  t.text = "value";
  return t;
}

SqlToken SqlToken::eos() {
  SqlToken t;
  t.kind = SqlTokenKind::EOS;
  t.text = "<eos>";
  return t;
}

}  // namespace editsql
