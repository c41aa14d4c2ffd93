#include "editsql/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "editsql/sql_lang.hpp"

namespace editsql {

using nlohmann::json;

std::vector<std::string> ColumnHeader::words() const {
  if (is_star) return {"*"};
  std::vector<std::string> out = table_name;
  out.push_back(".");
  out.insert(out.end(), column_name.begin(), column_name.end());
  return out;
}

int Schema::find_table(const std::string& table) const {
  for (std::size_t i = 0; i < tables.size(); ++i)
    if (tables[i] == table) return static_cast<int>(i);
  return -1;
}

int Schema::find_column(const std::string& table,
                        const std::string& column) const {
  const int ti = find_table(table);
  if (ti < 0) return -1;
  for (const auto& c : columns) {
    if (c.is_star) continue;
    if (c.table_index == ti && c.original_column == column) return c.column_id;
  }
  return -1;
}

std::vector<int> Schema::columns_named(const std::string& column) const {
  std::vector<int> out;
  for (const auto& c : columns)
    if (!c.is_star && c.original_column == column) out.push_back(c.column_id);
  return out;
}

void Schema::validate() const {
  if (db_id.empty()) throw Error("schema with empty db_id");
  int stars = 0;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const auto& c = columns[i];
    if (c.column_id != static_cast<int>(i))
      throw Error("schema " + db_id + ": column ids not contiguous");
    if (c.is_star) {
      ++stars;
      if (!c.table_name.empty() || c.words() != std::vector<std::string>{"*"})
        throw Error("schema " + db_id + ": malformed star header");
    } else {
      if (c.column_name.empty())
        throw Error("schema " + db_id + ": empty column name");
      if (c.table_index < 0 || c.table_index >= static_cast<int>(tables.size()))
        throw Error("schema " + db_id + ": column references unknown table");
    }
  }
  if (stars != 1) throw Error("schema " + db_id + ": expected exactly one star header");
  for (const auto& [a, b] : foreign_keys) {
    const int m = static_cast<int>(columns.size());
    if (a <= 0 || b <= 0 || a >= m || b >= m)
      throw Error("schema " + db_id + ": foreign key references invalid column");
  }
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace

std::vector<std::string> split_name_words(const std::string& name) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : name) {
    if (c == '_' || std::isspace(c)) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> tokenize_utterance(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      flush();
    } else if (std::isalnum(c) || c == '_') {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '.' && !cur.empty() && std::isdigit(static_cast<unsigned char>(cur.back())) &&
               i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
      cur.push_back('.');  // keep decimals whole
    } else {
      flush();
      out.push_back(std::string(1, static_cast<char>(c)));
    }
  }
  flush();
  return out;
}

ColumnHeader build_column_header(const std::vector<std::string>& table_name,
                                 const std::vector<std::string>& column_name) {
  if (column_name.empty()) throw Error("build_column_header: empty column name");
  ColumnHeader h;
  h.table_name = table_name;
  h.column_name = column_name;
  return h;
}

SchemaMap load_schemas(const std::string& path) {
  const json j = read_json_file(path);
  if (!j.is_array()) throw ParseError(path + ": expected a JSON array of schemas");
  SchemaMap out;
  for (const auto& rec : j) {
    Schema s;
    try {
      s.db_id = rec.at("db_id").get<std::string>();
      for (const auto& t : rec.at("table_names_original"))
        s.tables.push_back(lower(t.get<std::string>()));
      std::vector<std::string> natural_tables;
      if (rec.contains("table_names"))
        for (const auto& t : rec["table_names"])
          natural_tables.push_back(t.get<std::string>());

      // star header first, id 0; synthesize when the file omits it
      ColumnHeader star;
      star.is_star = true;
      star.column_name = {"*"};
      star.original_column = "*";
      s.columns.push_back(star);

      const auto& cols = rec.at("column_names_original");
      for (std::size_t i = 0; i < cols.size(); ++i) {
        const int ti = cols[i].at(0).get<int>();
        const std::string name = cols[i].at(1).get<std::string>();
        if (ti < 0) continue;  // file's own star entry
        if (ti >= static_cast<int>(s.tables.size()))
          throw Error("column '" + name + "' references table index " +
                      std::to_string(ti));
        ColumnHeader h = build_column_header(split_name_words(s.tables[ti]),
                                             split_name_words(name));
        h.table_index = ti;
        h.original_column = lower(name);
        if (rec.contains("column_names") && i < rec["column_names"].size())
          h.natural_name =
              tokenize_utterance(rec["column_names"][i].at(1).get<std::string>());
        s.columns.push_back(h);
      }
      for (std::size_t i = 0; i < s.columns.size(); ++i)
        s.columns[i].column_id = static_cast<int>(i);

      // the file indexes columns with the star at 0, matching our layout
      if (rec.contains("foreign_keys"))
        for (const auto& fk : rec["foreign_keys"])
          s.foreign_keys.emplace_back(fk.at(0).get<int>(), fk.at(1).get<int>());
      s.validate();
    } catch (const json::exception& e) {
      throw ParseError(path + ": bad schema record '" + s.db_id + "': " + e.what());
    }
    if (out.count(s.db_id))
      throw Error(path + ": duplicate db_id '" + s.db_id + "'");
    out.emplace(s.db_id, std::move(s));
  }
  return out;
}

std::vector<Interaction> load_interactions(const std::string& path,
                                           const SchemaMap& schemas) {
  const json j = read_json_file(path);
  if (!j.is_array()) throw ParseError(path + ": expected a JSON array");
  std::vector<Interaction> out;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto& rec = j[r];
    Interaction it;
    it.interaction_id = rec.contains("id") ? rec["id"].get<std::string>()
                                           : path + "#" + std::to_string(r);
    try {
      it.db_id = rec.at("database_id").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(path + ": record " + std::to_string(r) + ": " + e.what());
    }
    const auto sit = schemas.find(it.db_id);
    if (sit == schemas.end())
      throw Error(path + ": interaction '" + it.interaction_id +
                  "' references unknown db_id '" + it.db_id + "'");
    if (rec.contains("final") && rec["final"].contains("utterance"))
      it.final_goal = rec["final"]["utterance"].get<std::string>();
    int turn = 0;
    for (const auto& t : rec.at("interaction")) {
      ++turn;
      Utterance u;
      u.turn_index = turn;
      u.tokens = tokenize_utterance(t.at("utterance").get<std::string>());
      if (u.tokens.empty())
        throw Error(path + ": empty utterance in '" + it.interaction_id +
                    "' turn " + std::to_string(turn));
      SqlTokenSeq q;
      try {
        q = tokenize_sql(t.at("query").get<std::string>(), sit->second);
      } catch (const Error& e) {
        throw Error("untokenizable gold SQL in interaction '" +
                    it.interaction_id + "' turn " + std::to_string(turn) +
                    ": " + e.what());
      }
      it.turns.emplace_back(std::move(u), std::move(q));
    }
    if (it.turns.empty())
      throw Error(path + ": interaction '" + it.interaction_id + "' has no turns");
    out.push_back(std::move(it));
  }
  return out;
}

void save_interactions(const std::string& path,
                       const std::vector<Interaction>& interactions,
                       const SchemaMap& schemas) {
  (void)schemas;
  json j = json::array();
  for (const auto& it : interactions) {
    json rec;
    rec["id"] = it.interaction_id;
    rec["database_id"] = it.db_id;
    rec["interaction"] = json::array();
    for (const auto& [u, q] : it.turns) {
      json t;
      std::string text;
      for (const auto& w : u.tokens) {
        if (!text.empty()) text += ' ';
        text += w;
      }
      t["utterance"] = text;
      t["query"] = render(q);
      rec["interaction"].push_back(t);
    }
    if (it.final_goal) rec["final"]["utterance"] = *it.final_goal;
    j.push_back(rec);
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << j.dump(1) << '\n';
}

CorpusStats corpus_stats(const std::vector<Interaction>& interactions) {
  CorpusStats st;
  st.num_interactions = interactions.size();
  static const char* kComponents[] = {"WHERE", "AGG",    "GROUP", "ORDER",
                                      "HAVING", "SET",   "JOIN",  "Nested"};
  std::map<std::string, std::size_t> hits;
  for (const char* c : kComponents) hits[c] = 0;
  std::set<std::string> vocab;
  std::size_t total_tokens = 0;
  std::size_t decomposable = 0;
  for (const auto& it : interactions) {
    st.num_questions += it.turns.size();
    for (const auto& [u, q] : it.turns) {
      total_tokens += u.tokens.size();
      vocab.insert(u.tokens.begin(), u.tokens.end());
      try {
        const auto flags = component_flags(decompose(q));
        ++decomposable;
        for (const auto& f : flags) hits[f] += 1;
      } catch (const Error&) {
        // undecomposable gold queries are excluded from clause statistics
      }
    }
  }
  if (st.num_interactions > 0) {
    st.avg_turns = static_cast<double>(st.num_questions) /
                   static_cast<double>(st.num_interactions);
  }
  if (st.num_questions > 0) {
    st.avg_question_length =
        static_cast<double>(total_tokens) / static_cast<double>(st.num_questions);
  }
  st.question_vocab_size = vocab.size();
  for (const char* c : kComponents) {
    st.clause_frequencies[c] =
        decomposable == 0 ? 0.0
                          : 100.0 * static_cast<double>(hits[c]) /
                                static_cast<double>(decomposable);
  }
  return st;
}

}  // namespace editsql
