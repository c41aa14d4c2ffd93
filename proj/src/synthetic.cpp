#include "editsql/synthetic.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "editsql/sql_lang.hpp"

namespace editsql {
namespace {

Schema make_shop_schema() {
  Schema s;
  s.db_id = "toy_shop";
  s.tables = {"products", "orders"};
  ColumnHeader star;
  star.column_id = 0;
  star.is_star = true;
  star.column_name = {"*"};
  star.original_column = "*";
  s.columns.push_back(star);
  auto add = [&s](int table, const std::string& name) {
    ColumnHeader h = build_column_header(split_name_words(s.tables[table]),
                                         split_name_words(name));
    h.column_id = static_cast<int>(s.columns.size());
    h.table_index = table;
    h.original_column = name;
    s.columns.push_back(h);
  };
  add(0, "name");
  add(0, "price");
  add(0, "category");
  add(0, "maker");
  add(1, "quantity");
  add(1, "buyer");
  add(1, "region");
  s.validate();
  return s;
}

Schema make_school_schema() {
  Schema s;
  s.db_id = "toy_school";
  s.tables = {"students", "classes"};
  ColumnHeader star;
  star.column_id = 0;
  star.is_star = true;
  star.column_name = {"*"};
  star.original_column = "*";
  s.columns.push_back(star);
  auto add = [&s](int table, const std::string& name) {
    ColumnHeader h = build_column_header(split_name_words(s.tables[table]),
                                         split_name_words(name));
    h.column_id = static_cast<int>(s.columns.size());
    h.table_index = table;
    h.original_column = name;
    s.columns.push_back(h);
  };
  add(0, "name");
  add(0, "age");
  add(0, "grade");
  add(0, "major");
  add(1, "title");
  add(1, "room");
  add(1, "building");
  s.validate();
  return s;
}

Utterance make_utt(int turn, const std::string& text) {
  Utterance u;
  u.turn_index = turn;
  u.tokens = tokenize_utterance(text);
  return u;
}

struct TableSpec {
  std::string table;
  std::vector<std::string> cols;  // non-star columns of this table
};

TableSpec table_spec(const Schema& schema, int table_index) {
  TableSpec t;
  t.table = schema.tables[static_cast<std::size_t>(table_index)];
  for (const ColumnHeader& h : schema.columns) {
    if (h.table_index == table_index) t.cols.push_back(h.original_column);
  }
  return t;
}

}  // namespace

SyntheticCorpus make_overfit_corpus(std::uint64_t seed,
                                    std::size_t num_interactions) {
  SyntheticCorpus c;
  Schema shop = make_shop_schema();
  Schema school = make_school_schema();
  c.schemas[shop.db_id] = shop;
  c.schemas[school.db_id] = school;

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < num_interactions; ++i) {
    const Schema& schema = (i % 2 == 0) ? shop : school;
    const int table_index = static_cast<int>(rng() % schema.tables.size());
    TableSpec t = table_spec(schema, table_index);
    const std::string a = t.cols[rng() % t.cols.size()];
    std::string b = t.cols[rng() % t.cols.size()];
    while (b == a) b = t.cols[rng() % t.cols.size()];

    Interaction it;
    it.interaction_id = "overfit_" + std::to_string(i);
    it.db_id = schema.db_id;
    it.turns.emplace_back(
        make_utt(1, "show the " + a + " of every " + t.table),
        tokenize_sql("SELECT " + a + " FROM " + t.table, schema));
    it.turns.emplace_back(
        make_utt(2, "only those where " + b + " is special"),
        tokenize_sql("SELECT " + a + " FROM " + t.table + " WHERE " + b +
                         " = 'special'",
                     schema));
    it.final_goal = "list " + a + " filtered by " + b;
    c.train.push_back(it);
  }
  c.dev = c.train;  // memorization check: evaluate on the training set
  return c;
}

SyntheticCorpus make_editing_corpus(std::uint64_t seed, std::size_t num_train,
                                    std::size_t num_dev) {
  SyntheticCorpus c;
  Schema shop = make_shop_schema();
  Schema school = make_school_schema();
  c.schemas[shop.db_id] = shop;
  c.schemas[school.db_id] = school;

  std::mt19937_64 rng(seed);
  // Enumerate (schema, table, a, b, f) triples of distinct columns; dev gets
  // combinations never used for training.
  struct Combo {
    const Schema* schema;
    std::string table, a, b, f;
  };
  std::vector<Combo> combos;
  for (const Schema* schema : {&shop, &school}) {
    for (int ti = 0; ti < static_cast<int>(schema->tables.size()); ++ti) {
      TableSpec t = table_spec(*schema, ti);
      for (const std::string& a : t.cols)
        for (const std::string& b : t.cols)
          for (const std::string& f : t.cols) {
            if (a == b || a == f || b == f) continue;
            combos.push_back({schema, t.table, a, b, f});
          }
    }
  }
  std::shuffle(combos.begin(), combos.end(), rng);
  if (combos.size() < num_train + num_dev)
    throw Error("editing corpus: not enough column combinations");

  auto build = [](const Combo& m, std::size_t idx,
                  const std::string& tag) -> Interaction {
    Interaction it;
    it.interaction_id = tag + "_" + std::to_string(idx);
    it.db_id = m.schema->db_id;
    // Turn 1: SELECT a FROM t WHERE f = 'value'         (8 tokens + eos)
    // Turn 2: ... a , b ...                             (shares 8/10)
    // Turn 3: ... ORDER BY a                            (shares 10/13)
    const std::string q1 =
        "SELECT " + m.a + " FROM " + m.table + " WHERE " + m.f + " = 'x'";
    const std::string q2 = "SELECT " + m.a + " , " + m.b + " FROM " + m.table +
                           " WHERE " + m.f + " = 'x'";
    const std::string q3 = q2 + " ORDER BY " + m.a;
    it.turns.emplace_back(
        make_utt(1, "show the " + m.a + " of " + m.table + " having a special " +
                        m.f),
        tokenize_sql(q1, *m.schema));
    it.turns.emplace_back(make_utt(2, "also show the " + m.b),
                          tokenize_sql(q2, *m.schema));
    it.turns.emplace_back(make_utt(3, "sort them by " + m.a),
                          tokenize_sql(q3, *m.schema));
    return it;
  };

  for (std::size_t i = 0; i < num_train; ++i)
    c.train.push_back(build(combos[i], i, "edit_train"));
  for (std::size_t i = 0; i < num_dev; ++i)
    c.dev.push_back(build(combos[num_train + i], i, "edit_dev"));
  return c;
}

SyntheticCorpus make_gradcheck_fixture() {
  SyntheticCorpus c;
  Schema shop = make_shop_schema();
  c.schemas[shop.db_id] = shop;
  Interaction it;
  it.interaction_id = "gradcheck_0";
  it.db_id = shop.db_id;
  it.turns.emplace_back(make_utt(1, "show product names"),
                        tokenize_sql("SELECT name FROM products", shop));
  it.turns.emplace_back(
      make_utt(2, "only cheap ones"),
      tokenize_sql("SELECT name FROM products WHERE price < 'x'", shop));
  c.train.push_back(it);
  c.dev = c.train;
  return c;
}

}  // namespace editsql
