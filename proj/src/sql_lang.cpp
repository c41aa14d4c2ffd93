#include "editsql/sql_lang.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <unordered_set>

namespace editsql {

namespace {

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

const std::unordered_set<std::string>& keyword_set() {
  static const std::unordered_set<std::string> kw = [] {
    std::unordered_set<std::string> s;
    for (const auto& k : sql_keywords()) s.insert(k);
    return s;
  }();
  return kw;
}

// ---------------------------------------------------------------- lexing

enum class LexKind { WORD, QUALIFIED, NUMBER, STRING, PUNCT };

struct Lexeme {
  LexKind kind;
  std::string text;        // lowercased for words; raw for others
  std::string qualifier;   // QUALIFIED: part before the dot
};

std::vector<Lexeme> lex(const std::string& raw) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  const std::size_t n = raw.size();
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(raw[i]);
    if (std::isspace(c) || c == ';') {
      ++i;
    } else if (c == '\'' || c == '"') {
      const char quote = raw[i];
      std::size_t j = i + 1;
      while (j < n && raw[j] != quote) ++j;
      if (j >= n) throw ParseError("unbalanced quote in SQL: " + raw);
      out.push_back({LexKind::STRING, raw.substr(i + 1, j - i - 1), ""});
      i = j + 1;
    } else if (std::isdigit(c) ||
               (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(raw[i + 1])))) {
      std::size_t j = i;
      while (j < n && (std::isdigit(static_cast<unsigned char>(raw[j])) || raw[j] == '.')) ++j;
      out.push_back({LexKind::NUMBER, raw.substr(i, j - i), ""});
      i = j;
    } else if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(raw[j])) || raw[j] == '_')) ++j;
      std::string word = lower(raw.substr(i, j - i));
      i = j;
      // qualified reference: name.name or name.*
      if (i < n && raw[i] == '.') {
        ++i;
        if (i < n && raw[i] == '*') {
          out.push_back({LexKind::QUALIFIED, "*", word});
          ++i;
        } else {
          std::size_t k = i;
          while (k < n && (std::isalnum(static_cast<unsigned char>(raw[k])) || raw[k] == '_')) ++k;
          if (k == i) throw ParseError("dangling '.' after '" + word + "'");
          out.push_back({LexKind::QUALIFIED, lower(raw.substr(i, k - i)), word});
          i = k;
        }
      } else {
        out.push_back({LexKind::WORD, word, ""});
      }
    } else {
      // multi-char comparison operators first
      if (i + 1 < n) {
        const std::string two = raw.substr(i, 2);
        if (two == "<=" || two == ">=" || two == "!=" || two == "<>") {
          out.push_back({LexKind::PUNCT, two == "<>" ? "!=" : two, ""});
          i += 2;
          continue;
        }
      }
      out.push_back({LexKind::PUNCT, std::string(1, raw[i]), ""});
      ++i;
    }
  }
  return out;
}

bool is_clause_boundary(const std::string& up) {
  static const std::unordered_set<std::string> b = {
      "WHERE", "GROUP", "ORDER", "HAVING", "LIMIT",
      "UNION", "INTERSECT", "EXCEPT", "SELECT"};
  return b.count(up) > 0;
}

}  // namespace

const std::vector<std::string>& sql_keywords() {
  static const std::vector<std::string> kw = [] {
    std::vector<std::string> v = {
        "<bos>", "<eos>", "value",
        "SELECT", "FROM", "WHERE", "GROUP", "ORDER", "BY", "HAVING", "LIMIT",
        "AND", "OR", "NOT", "IN", "LIKE", "BETWEEN", "IS", "NULL", "EXISTS",
        "UNION", "INTERSECT", "EXCEPT", "JOIN", "ON", "DISTINCT",
        "COUNT", "SUM", "AVG", "MIN", "MAX", "ASC", "DESC",
        "(", ")", ",", "=", "!=", "<", ">", "<=", ">=", "+", "-", "/"};
    for (int i = 0; i <= 20; ++i) v.push_back(std::to_string(i));
    v.push_back("100");
    return v;
  }();
  return kw;
}

bool is_sql_keyword(const std::string& up) { return keyword_set().count(up) > 0; }

// -------------------------------------------------------------- tokenize

SqlTokenSeq tokenize_sql(const std::string& raw, const Schema& schema) {
  const std::vector<Lexeme> lx = lex(raw);

  // pass 0: assign each lexeme to a SELECT scope so bare columns resolve
  // against the FROM tables of their own (or an enclosing) query block;
  // set-operation operands are sibling scopes, not one shared scope
  std::vector<int> scope_of(lx.size(), -1);
  std::vector<int> scope_parent;  // scope id -> parent scope id (-1 at top)
  {
    struct Open {
      int id;
      int depth;
    };
    std::vector<Open> stack;
    int depth = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const Lexeme& l = lx[i];
      if (l.kind == LexKind::PUNCT) {
        if (l.text == "(") ++depth;
        if (l.text == ")") {
          --depth;
          while (!stack.empty() && stack.back().depth > depth) stack.pop_back();
        }
      } else if (l.kind == LexKind::WORD && upper(l.text) == "SELECT") {
        if (!stack.empty() && stack.back().depth == depth) stack.pop_back();
        const int parent = stack.empty() ? -1 : stack.back().id;
        stack.push_back({static_cast<int>(scope_parent.size()), depth});
        scope_parent.push_back(parent);
      }
      scope_of[i] = stack.empty() ? -1 : stack.back().id;
    }
  }

  // pass 1: alias bindings and tables mentioned in FROM clauses
  std::map<std::string, std::string> alias_to_table;
  std::map<int, std::vector<int>> from_tables;  // scope id -> table indices
  int depth = 0;
  bool in_from = false;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const Lexeme& l = lx[i];
    if (l.kind == LexKind::PUNCT) {
      if (l.text == "(") ++depth;
      if (l.text == ")") --depth;
      continue;
    }
    if (l.kind != LexKind::WORD) continue;
    const std::string up = upper(l.text);
    if (up == "FROM") in_from = true;
    else if (is_clause_boundary(up) || up == "ON") in_from = false;
    if ((up == "FROM" || up == "JOIN") && i + 1 < lx.size() &&
        lx[i + 1].kind == LexKind::WORD && !is_sql_keyword(upper(lx[i + 1].text))) {
      const std::string table = lx[i + 1].text;
      const int ti = schema.find_table(table);
      if (ti < 0)
        throw Error("unknown table '" + table + "' in query: " + raw);
      from_tables[scope_of[i]].push_back(ti);
      // "AS alias" or bare trailing alias
      std::size_t j = i + 2;
      if (j < lx.size() && lx[j].kind == LexKind::WORD && upper(lx[j].text) == "AS")
        ++j;
      if (j > i + 2 || (j < lx.size() && lx[j].kind == LexKind::WORD &&
                        !is_sql_keyword(upper(lx[j].text)) &&
                        schema.find_table(lx[j].text) < 0)) {
        if (j < lx.size() && lx[j].kind == LexKind::WORD) {
          const auto prev = alias_to_table.find(lx[j].text);
          if (prev != alias_to_table.end() && prev->second != table)
            throw Error("alias '" + lx[j].text + "' rebound in query: " + raw);
          alias_to_table[lx[j].text] = table;
        }
      }
    }
  }
  if (depth != 0) throw ParseError("unbalanced parentheses in SQL: " + raw);

  auto resolve_qualified = [&](const Lexeme& l) -> SqlToken {
    std::string table = l.qualifier;
    const auto a = alias_to_table.find(table);
    if (a != alias_to_table.end()) table = a->second;
    if (l.text == "*") return SqlToken::column("*", 0);
    const int cid = schema.find_column(table, l.text);
    if (cid < 0)
      throw Error("unresolvable column reference '" + l.qualifier + "." +
                  l.text + "' in query: " + raw);
    return SqlToken::column(table + "." + l.text, cid);
  };

  auto resolve_bare_column = [&](const std::string& name, int scope) -> SqlToken {
    // prefer the FROM tables of the enclosing query blocks, innermost first,
    // then fall back to the whole schema
    std::vector<int> hits;
    for (int s = scope; s >= 0 && hits.empty(); s = scope_parent[s]) {
      const auto it = from_tables.find(s);
      if (it == from_tables.end()) continue;
      for (int ti : it->second) {
        const int cid = schema.find_column(schema.tables[ti], name);
        if (cid >= 0) hits.push_back(cid);
      }
      std::sort(hits.begin(), hits.end());
      hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
    }
    if (hits.empty()) hits = schema.columns_named(name);
    if (hits.empty())
      throw Error("unresolvable column reference '" + name + "' in query: " + raw);
    if (hits.size() > 1)
      throw Error("ambiguous column reference '" + name + "' in query: " + raw);
    const auto& h = schema.columns[hits[0]];
    return SqlToken::column(schema.tables[h.table_index] + "." + name, hits[0]);
  };

  SqlTokenSeq seq;
  seq.schema_ref = schema.db_id;
  in_from = false;
  bool after_from_or_join = false;  // positions where a bare word is a table
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const Lexeme& l = lx[i];
    switch (l.kind) {
      case LexKind::STRING:
        seq.tokens.push_back(SqlToken::value());
        after_from_or_join = false;
        break;
      case LexKind::NUMBER: {
        const bool is_limit_arg =
            !seq.tokens.empty() &&
            seq.tokens.back().kind == SqlTokenKind::KEYWORD &&
            seq.tokens.back().text == "LIMIT";
        if (is_limit_arg && is_sql_keyword(l.text))
          seq.tokens.push_back(SqlToken::keyword(l.text));
        else
          seq.tokens.push_back(SqlToken::value());
        after_from_or_join = false;
        break;
      }
      case LexKind::QUALIFIED:
        seq.tokens.push_back(resolve_qualified(l));
        after_from_or_join = false;
        break;
      case LexKind::PUNCT:
        if (l.text == "*") {
          seq.tokens.push_back(SqlToken::column("*", 0));
        } else if (is_sql_keyword(l.text)) {
          seq.tokens.push_back(SqlToken::keyword(l.text));
          if (in_from && l.text == ",") after_from_or_join = true;
        } else {
          throw ParseError("unexpected character '" + l.text + "' in query: " + raw);
        }
        break;
      case LexKind::WORD: {
        const std::string up = upper(l.text);
        if (up == "AS") {
          // drop "AS alias"
          if (i + 1 < lx.size() && lx[i + 1].kind == LexKind::WORD) ++i;
          break;
        }
        if (is_sql_keyword(up)) {
          seq.tokens.push_back(SqlToken::keyword(up));
          if (up == "FROM") in_from = true;
          else if (is_clause_boundary(up) || up == "ON") in_from = false;
          after_from_or_join = (up == "FROM" || up == "JOIN");
          break;
        }
        if (after_from_or_join) {
          const int ti = schema.find_table(l.text);
          if (ti >= 0) {
            seq.tokens.push_back(SqlToken::table(schema.tables[ti], ti));
            after_from_or_join = false;
            // skip a bare alias directly following the table name
            if (i + 1 < lx.size() && lx[i + 1].kind == LexKind::WORD &&
                alias_to_table.count(lx[i + 1].text) &&
                !is_sql_keyword(upper(lx[i + 1].text)))
              ++i;
            break;
          }
        }
        if (alias_to_table.count(l.text))
          throw ParseError("bare alias '" + l.text + "' in query: " + raw);
        seq.tokens.push_back(resolve_bare_column(l.text, scope_of[i]));
        after_from_or_join = false;
        break;
      }
    }
  }
  return seq;
}

std::string render(const SqlToken& tok) {
  switch (tok.kind) {
    case SqlTokenKind::KEYWORD:
      return tok.text;
    case SqlTokenKind::TABLE:
      return tok.text;
    case SqlTokenKind::COLUMN:
      return tok.text;
    case SqlTokenKind::VALUE:
      return "'value'";
    case SqlTokenKind::EOS:
      return "<eos>";
  }
  return "?";
}

std::string render(const SqlTokenSeq& seq) {
  std::string out;
  for (const auto& t : seq.tokens) {
    if (!out.empty()) out += ' ';
    out += render(t);
  }
  return out;
}

// -------------------------------------------------------------- decompose

namespace {

using Toks = std::vector<SqlToken>;

bool is_kw(const SqlToken& t, const char* text) {
  return t.kind == SqlTokenKind::KEYWORD && t.text == text;
}

ClauseSet parse_query(const Toks& toks, std::size_t lo, std::size_t hi);

// canonical text of a token span; nested "( SELECT ... )" spans are replaced
// by the recursive canonical form of the subquery
std::string canonical_span(const Toks& toks, std::size_t lo, std::size_t hi,
                           bool* nested) {
  std::string out;
  auto append = [&](const std::string& s) {
    if (!out.empty()) out += ' ';
    out += s;
  };
  for (std::size_t i = lo; i < hi; ++i) {
    if (is_kw(toks[i], "(") && i + 1 < hi && is_kw(toks[i + 1], "SELECT")) {
      int d = 1;
      std::size_t j = i + 1;
      for (; j < hi && d > 0; ++j) {
        if (is_kw(toks[j], "(")) ++d;
        if (is_kw(toks[j], ")")) --d;
      }
      if (d != 0) throw DecompositionError("unbalanced subquery parentheses");
      const ClauseSet sub = parse_query(toks, i + 1, j - 1);
      if (nested) *nested = true;
      append("( " + sub.canonical() + " )");
      i = j - 1;
    } else {
      append(toks[i].kind == SqlTokenKind::VALUE ? "value" : toks[i].text);
    }
  }
  return out;
}

// split a depth-0 span on commas
std::vector<std::pair<std::size_t, std::size_t>> split_commas(const Toks& toks,
                                                              std::size_t lo,
                                                              std::size_t hi) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  int d = 0;
  std::size_t start = lo;
  for (std::size_t i = lo; i < hi; ++i) {
    if (is_kw(toks[i], "(")) ++d;
    else if (is_kw(toks[i], ")")) --d;
    else if (d == 0 && is_kw(toks[i], ",")) {
      out.emplace_back(start, i);
      start = i + 1;
    }
  }
  out.emplace_back(start, hi);
  return out;
}

// normalize "a = b" / "a != b" by sorting operands
std::string canonical_condition(const Toks& toks, std::size_t lo, std::size_t hi,
                                bool* nested) {
  int d = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    if (is_kw(toks[i], "(")) ++d;
    else if (is_kw(toks[i], ")")) --d;
    else if (d == 0 && (is_kw(toks[i], "=") || is_kw(toks[i], "!="))) {
      std::string a = canonical_span(toks, lo, i, nested);
      std::string b = canonical_span(toks, i + 1, hi, nested);
      if (b < a) std::swap(a, b);
      return a + " " + toks[i].text + " " + b;
    }
  }
  return canonical_span(toks, lo, hi, nested);
}

ClauseSet parse_query(const Toks& toks, std::size_t lo, std::size_t hi) {
  if (lo >= hi) throw DecompositionError("empty query");
  // top-level set operations
  {
    int d = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      if (is_kw(toks[i], "(")) ++d;
      else if (is_kw(toks[i], ")")) --d;
      else if (d == 0 && (is_kw(toks[i], "UNION") || is_kw(toks[i], "INTERSECT") ||
                          is_kw(toks[i], "EXCEPT")) &&
               i > lo) {
        ClauseSet c;
        c.set_op = std::make_shared<ClauseSet::SetOp>();
        c.set_op->op = toks[i].text;
        c.set_op->left = parse_query(toks, lo, i);
        c.set_op->right = parse_query(toks, i + 1, hi);
        c.has_subquery = c.set_op->left.has_subquery || c.set_op->right.has_subquery;
        return c;
      }
    }
  }

  if (!is_kw(toks[lo], "SELECT"))
    throw DecompositionError("query does not start with SELECT");

  // clause boundaries at depth 0
  struct Span {
    std::string name;
    std::size_t lo, hi;
  };
  std::vector<Span> spans;
  {
    int d = 0;
    std::size_t i = lo;
    std::string cur = "SELECT";
    std::size_t start = lo + 1;
    ++i;
    for (; i < hi; ++i) {
      if (is_kw(toks[i], "(")) { ++d; continue; }
      if (is_kw(toks[i], ")")) { --d; continue; }
      if (d != 0 || toks[i].kind != SqlTokenKind::KEYWORD) continue;
      const std::string& t = toks[i].text;
      std::string next;
      std::size_t skip = 0;
      if (t == "FROM" || t == "WHERE" || t == "HAVING" || t == "LIMIT") {
        next = t;
      } else if ((t == "GROUP" || t == "ORDER") && i + 1 < hi && is_kw(toks[i + 1], "BY")) {
        next = t;
        skip = 1;
      }
      if (!next.empty()) {
        spans.push_back({cur, start, i});
        cur = next;
        start = i + 1 + skip;
        i += skip;
      }
    }
    spans.push_back({cur, start, hi});
  }

  ClauseSet c;
  for (const auto& sp : spans) {
    if (sp.name == "SELECT") {
      std::size_t s = sp.lo;
      if (s < sp.hi && is_kw(toks[s], "DISTINCT")) {
        c.select_distinct = true;
        ++s;
      }
      if (s >= sp.hi) throw DecompositionError("empty SELECT list");
      for (auto [a, b] : split_commas(toks, s, sp.hi))
        c.select_items.insert(canonical_span(toks, a, b, &c.has_subquery));
    } else if (sp.name == "FROM") {
      // tables, joins and ON conditions; FROM subqueries become one entry
      std::size_t i = sp.lo;
      if (i >= sp.hi) throw DecompositionError("empty FROM clause");
      while (i < sp.hi) {
        const SqlToken& t = toks[i];
        if (t.kind == SqlTokenKind::TABLE) {
          c.from_tables.insert(t.text);
          ++i;
        } else if (is_kw(t, "JOIN") || is_kw(t, ",")) {
          ++i;
        } else if (is_kw(t, "ON")) {
          // conditions up to the next JOIN or end, split on AND
          std::size_t j = i + 1;
          int d = 0;
          std::size_t start = j;
          for (; j <= sp.hi; ++j) {
            const bool end = j == sp.hi || (d == 0 && is_kw(toks[j], "JOIN"));
            if (!end && is_kw(toks[j], "(")) ++d;
            else if (!end && is_kw(toks[j], ")")) --d;
            if (end || (d == 0 && is_kw(toks[j], "AND"))) {
              if (start < j)
                c.join_conditions.insert(
                    canonical_condition(toks, start, j, &c.has_subquery));
              start = j + 1;
              if (end) break;
            }
          }
          i = j;
        } else if (is_kw(t, "(")) {
          int d = 1;
          std::size_t j = i + 1;
          for (; j < sp.hi && d > 0; ++j) {
            if (is_kw(toks[j], "(")) ++d;
            if (is_kw(toks[j], ")")) --d;
          }
          if (d != 0) throw DecompositionError("unbalanced FROM subquery");
          const ClauseSet sub = parse_query(toks, i + 1, j - 1);
          c.has_subquery = true;
          c.from_tables.insert("( " + sub.canonical() + " )");
          i = j;
        } else {
          throw DecompositionError("unexpected token '" + render(t) +
                                   "' in FROM clause");
        }
      }
    } else if (sp.name == "WHERE" || sp.name == "HAVING") {
      auto& target = sp.name == "WHERE" ? c.where_conjuncts : c.having;
      int d = 0;
      std::size_t start = sp.lo;
      std::string connective = "AND";
      int between_pending = 0;
      if (sp.lo >= sp.hi) throw DecompositionError("empty " + sp.name + " clause");
      for (std::size_t i = sp.lo; i <= sp.hi; ++i) {
        const bool end = i == sp.hi;
        if (!end && is_kw(toks[i], "(")) { ++d; continue; }
        if (!end && is_kw(toks[i], ")")) { --d; continue; }
        if (!end && d == 0 && is_kw(toks[i], "BETWEEN")) ++between_pending;
        const bool is_and = !end && d == 0 && is_kw(toks[i], "AND");
        const bool is_or = !end && d == 0 && is_kw(toks[i], "OR");
        if (is_and && between_pending > 0) {
          --between_pending;  // the AND of BETWEEN ... AND ...
          continue;
        }
        if (end || is_and || is_or) {
          if (start >= i) throw DecompositionError("empty condition in " + sp.name);
          target.emplace(connective,
                         canonical_condition(toks, start, i, &c.has_subquery));
          connective = is_or ? "OR" : "AND";
          start = i + 1;
        }
      }
    } else if (sp.name == "GROUP") {
      for (auto [a, b] : split_commas(toks, sp.lo, sp.hi))
        c.group_by.insert(canonical_span(toks, a, b, &c.has_subquery));
    } else if (sp.name == "ORDER") {
      for (auto [a, b] : split_commas(toks, sp.lo, sp.hi)) {
        std::string dir = "ASC";
        if (b > a && (is_kw(toks[b - 1], "ASC") || is_kw(toks[b - 1], "DESC"))) {
          dir = toks[b - 1].text;
          --b;
        }
        if (a >= b) throw DecompositionError("empty ORDER BY item");
        c.order_by.emplace_back(canonical_span(toks, a, b, &c.has_subquery), dir);
      }
    } else if (sp.name == "LIMIT") {
      if (sp.lo >= sp.hi) throw DecompositionError("missing LIMIT argument");
      c.limit = toks[sp.lo].kind == SqlTokenKind::VALUE ? "value" : toks[sp.lo].text;
    }
  }
  if (c.select_items.empty() && !c.set_op)
    throw DecompositionError("query has no SELECT items");
  return c;
}

template <typename S>
void join_into(std::string& out, const std::string& label, const S& items) {
  out += label;
  out += '{';
  bool first = true;
  for (const auto& it : items) {
    if (!first) out += '|';
    first = false;
    out += it;
  }
  out += '}';
}

}  // namespace

std::string ClauseSet::canonical() const {
  if (set_op) {
    return "SETOP(" + set_op->op + "," + set_op->left.canonical() + "," +
           set_op->right.canonical() + ")";
  }
  std::string out;
  join_into(out, select_distinct ? "SELECT DISTINCT" : "SELECT", select_items);
  join_into(out, " FROM", from_tables);
  join_into(out, " ON", join_conditions);
  out += " WHERE{";
  {
    bool first = true;
    for (const auto& [conn, cond] : where_conjuncts) {
      if (!first) out += '|';
      first = false;
      out += conn + ":" + cond;
    }
  }
  out += '}';
  join_into(out, " GROUP", group_by);
  out += " ORDER[";
  for (const auto& [e, d] : order_by) out += e + " " + d + ";";
  out += ']';
  out += " HAVING{";
  {
    bool first = true;
    for (const auto& [conn, cond] : having) {
      if (!first) out += '|';
      first = false;
      out += conn + ":" + cond;
    }
  }
  out += '}';
  if (limit) out += " LIMIT " + *limit;
  return out;
}

ClauseSet decompose(const SqlTokenSeq& seq) {
  return parse_query(seq.tokens, 0, seq.tokens.size());
}

bool exact_set_match(const ClauseSet& pred, const ClauseSet& gold) {
  if ((pred.set_op != nullptr) != (gold.set_op != nullptr)) return false;
  if (pred.set_op) {
    if (pred.set_op->op != gold.set_op->op) return false;
    const bool direct = exact_set_match(pred.set_op->left, gold.set_op->left) &&
                        exact_set_match(pred.set_op->right, gold.set_op->right);
    if (direct) return true;
    if (pred.set_op->op == "EXCEPT") return false;
    return exact_set_match(pred.set_op->left, gold.set_op->right) &&
           exact_set_match(pred.set_op->right, gold.set_op->left);
  }
  return pred.select_items == gold.select_items &&
         pred.select_distinct == gold.select_distinct &&
         pred.from_tables == gold.from_tables &&
         pred.join_conditions == gold.join_conditions &&
         pred.where_conjuncts == gold.where_conjuncts &&
         pred.group_by == gold.group_by && pred.order_by == gold.order_by &&
         pred.having == gold.having && pred.limit == gold.limit;
}

bool exact_set_match(const SqlTokenSeq& pred, const SqlTokenSeq& gold) {
  ClauseSet g;
  try {
    g = decompose(gold);
  } catch (const Error&) {
    return false;
  }
  try {
    return exact_set_match(decompose(pred), g);
  } catch (const Error&) {
    return false;  // malformed predictions never match
  }
}

namespace {

bool has_aggregator(const std::string& canonical_item) {
  for (const char* agg : {"COUNT", "SUM", "AVG", "MIN", "MAX"}) {
    const auto pos = canonical_item.find(agg);
    if (pos != std::string::npos) {
      // token-aligned occurrence: at a token start and followed by " ("
      const bool at_start = pos == 0 || canonical_item[pos - 1] == ' ' ||
                            canonical_item[pos - 1] == '(';
      if (at_start) return true;
    }
  }
  return false;
}

}  // namespace

std::set<std::string> component_flags(const ClauseSet& c) {
  if (c.set_op) {
    auto flags = component_flags(c.set_op->left);
    const auto r = component_flags(c.set_op->right);
    flags.insert(r.begin(), r.end());
    flags.insert("SET");
    if (c.has_subquery) flags.insert("Nested");
    return flags;
  }
  std::set<std::string> flags;
  if (!c.where_conjuncts.empty()) flags.insert("WHERE");
  if (!c.group_by.empty()) flags.insert("GROUP");
  if (!c.order_by.empty()) flags.insert("ORDER");
  if (!c.having.empty()) flags.insert("HAVING");
  if (c.has_subquery) flags.insert("Nested");
  // JOIN: more than one table referenced in FROM
  std::size_t distinct_tables = 0;
  std::string last;
  for (const auto& t : c.from_tables)
    if (t != last) { ++distinct_tables; last = t; }
  if (distinct_tables > 1 || c.from_tables.size() > 1) flags.insert("JOIN");
  bool agg = false;
  for (const auto& s : c.select_items) agg = agg || has_aggregator(s);
  for (const auto& [conn, s] : c.having) agg = agg || has_aggregator(s);
  for (const auto& [e, d] : c.order_by) agg = agg || has_aggregator(e);
  if (agg) flags.insert("AGG");
  return flags;
}

std::string hardness(const ClauseSet& c) {
  // coarse heuristic: one point per structural feature beyond a bare
  // single-table SELECT; see README for the bucket definitions
  const auto flags = component_flags(c);
  int score = 0;
  for (const char* f : {"WHERE", "GROUP", "ORDER", "HAVING", "JOIN", "AGG"})
    if (flags.count(f)) ++score;
  if (flags.count("SET")) score += 2;
  if (flags.count("Nested")) score += 2;
  if (!c.set_op) {
    if (c.select_items.size() > 1) ++score;
    if (c.where_conjuncts.size() > 1) ++score;
    if (c.limit) ++score;
  }
  if (score <= 1) return "easy";
  if (score <= 3) return "medium";
  if (score <= 5) return "hard";
  return "extra";
}

double question_match(const std::vector<SqlTokenSeq>& preds,
                      const std::vector<SqlTokenSeq>& golds) {
  if (preds.size() != golds.size())
    throw Error("question_match: length mismatch");
  if (preds.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (exact_set_match(preds[i], golds[i])) ++hit;
  return static_cast<double>(hit) / static_cast<double>(preds.size());
}

double interaction_match(const std::vector<std::vector<SqlTokenSeq>>& preds,
                         const std::vector<std::vector<SqlTokenSeq>>& golds) {
  if (preds.size() != golds.size())
    throw Error("interaction_match: grouping mismatch");
  if (preds.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].size() != golds[i].size())
      throw Error("interaction_match: grouping mismatch at interaction " +
                  std::to_string(i));
    bool all = true;
    for (std::size_t j = 0; j < preds[i].size(); ++j)
      all = all && exact_set_match(preds[i][j], golds[i][j]);
    if (all) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(preds.size());
}

}  // namespace editsql
