#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <string>
#include <vector>

#include "editsql/edit_ops.hpp"
#include "editsql/sql_lang.hpp"
#include "editsql/synthetic.hpp"

using namespace editsql;

namespace {

SqlTokenSeq seq_of(const std::vector<std::string>& words) {
  SqlTokenSeq s;
  for (const auto& w : words) s.tokens.push_back(SqlToken::keyword(w));
  return s;
}

SqlTokenSeq random_seq(std::mt19937_64& rng, std::size_t max_len) {
  static const std::vector<std::string> kAlpha = {"A", "B", "C", "D", "E"};
  std::vector<std::string> w;
  const std::size_t n = rng() % (max_len + 1);
  for (std::size_t i = 0; i < n; ++i) w.push_back(kAlpha[rng() % kAlpha.size()]);
  return seq_of(w);
}

}  // namespace

TEST_CASE("diff of equal and empty sequences") {
  const SqlTokenSeq q = seq_of({"SELECT", "A", "FROM", "B"});
  const EditScript same = diff(q, q);
  REQUIRE(same.ops.size() == 1);
  CHECK(same.ops[0].kind == EditOpKind::COPY);
  CHECK(same.tokens_inserted() == 0);
  CHECK(apply(same, q) == q);

  const EditScript all_new = diff(SqlTokenSeq{}, q);
  REQUIRE(all_new.ops.size() == 1);
  CHECK(all_new.ops[0].kind == EditOpKind::INSERT);
  CHECK(all_new.tokens_inserted() == 4);
}

TEST_CASE("diff of the third and fourth oracle queries") {
  // same dorm schema as the sql_lang suite, trimmed to what these need
  Schema s;
  s.db_id = "dorms";
  s.tables = {"dorm_amenity", "has_amenity", "student", "lives_in"};
  ColumnHeader star;
  star.is_star = true;
  star.column_name = {"*"};
  star.original_column = "*";
  s.columns.push_back(star);
  auto add = [&s](int ti, const std::string& name) {
    ColumnHeader h = build_column_header(split_name_words(s.tables[ti]),
                                         split_name_words(name));
    h.table_index = ti;
    h.original_column = name;
    s.columns.push_back(h);
  };
  add(0, "amenid");
  add(0, "amenity_name");
  add(1, "dormid");
  add(1, "amenid");
  add(2, "stuid");
  add(2, "lname");
  add(2, "fname");
  add(3, "stuid");
  add(3, "dormid");
  for (std::size_t i = 0; i < s.columns.size(); ++i)
    s.columns[i].column_id = static_cast<int>(i);
  s.validate();

  const SqlTokenSeq s3 = tokenize_sql(
      "SELECT COUNT ( * ) FROM student AS T1 JOIN lives_in AS T2 ON T1.stuid "
      "= T2.stuid WHERE T2.dormid IN ( SELECT T3.dormid FROM has_amenity AS "
      "T3 JOIN dorm_amenity AS T4 ON T3.amenid = T4.amenid WHERE "
      "T4.amenity_name = 'TV Lounge' )",
      s);
  const SqlTokenSeq s4 = tokenize_sql(
      "SELECT T1.fname , T1.lname FROM student AS T1 JOIN lives_in AS T2 ON "
      "T1.stuid = T2.stuid WHERE T2.dormid IN ( SELECT T3.dormid FROM "
      "has_amenity AS T3 JOIN dorm_amenity AS T4 ON T3.amenid = T4.amenid "
      "WHERE T4.amenity_name = 'TV Lounge' )",
      s);

  const EditScript d = diff(s3, s4);
  CHECK(apply(d, s3) == s4);
  REQUIRE(d.ops.size() == 4);
  CHECK(d.ops[0].kind == EditOpKind::COPY);  // SELECT
  CHECK(d.ops[0].tokens.size() == 1);
  CHECK(d.ops[1].kind == EditOpKind::DELETE);  // COUNT ( * )
  CHECK(d.ops[1].tokens.size() == 4);
  CHECK(d.ops[2].kind == EditOpKind::INSERT);  // fname , lname
  CHECK(d.ops[2].tokens.size() == 3);
  CHECK(d.ops[3].kind == EditOpKind::COPY);  // the whole shared tail
  CHECK(d.tokens_copied() == s3.size() - 4);
}

TEST_CASE("roundtrip law on random sequences") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 3000; ++i) {
    const SqlTokenSeq a = random_seq(rng, 12);
    const SqlTokenSeq b = random_seq(rng, 12);
    const EditScript d = diff(a, b);
    CHECK(apply(d, a).tokens == b.tokens);
    // adjacent blocks never share a kind
    for (std::size_t k = 1; k < d.ops.size(); ++k)
      CHECK(d.ops[k].kind != d.ops[k - 1].kind);
    // symmetry: copied mass is direction-independent
    CHECK(diff(b, a).tokens_copied() == d.tokens_copied());
    // purity
    CHECK(diff(a, b).ops.size() == d.ops.size());
  }
}

TEST_CASE("apply rejects scripts inconsistent with the source") {
  const SqlTokenSeq a = seq_of({"A", "B"});
  EditScript wrong;
  wrong.ops.push_back({EditOpKind::COPY, {SqlToken::keyword("X")}});
  CHECK_THROWS_AS(apply(wrong, a), Error);
}

TEST_CASE("per-turn edit statistics") {
  const SyntheticCorpus c = make_editing_corpus(5, 8, 0);
  const auto stats = turn_edit_stats(c.train);
  REQUIRE(stats.size() == 3);  // three turns per interaction
  CHECK(stats[0].turn_index == 1);
  CHECK(stats[0].avg_tokens_copied == 0.0);
  CHECK(stats[0].avg_query_length == stats[0].avg_tokens_inserted);
  // by construction later turns copy most of the previous query
  CHECK(stats[1].avg_tokens_copied > stats[1].avg_tokens_inserted);
  CHECK(stats[2].avg_tokens_copied > stats[1].avg_tokens_copied);

  // single-turn corpus: everything inserted
  SyntheticCorpus one = make_overfit_corpus(1, 4);
  for (auto& it : one.train) it.turns.resize(1);
  const auto st1 = turn_edit_stats(one.train);
  REQUIRE(st1.size() == 1);
  CHECK(st1[0].avg_tokens_copied == 0.0);

  // repeated-query corpus: zero inserts beyond turn 1
  SyntheticCorpus rep = make_overfit_corpus(2, 4);
  for (auto& it : rep.train) {
    it.turns[1].second = it.turns[0].second;
  }
  const auto str = turn_edit_stats(rep.train);
  REQUIRE(str.size() == 2);
  CHECK(str[1].avg_tokens_inserted == 0.0);
  CHECK(str[1].avg_insert_ops == 0.0);

  // 4th and later turns share one bucket
  SyntheticCorpus deep = make_overfit_corpus(3, 2);
  for (auto& it : deep.train) {
    while (it.turns.size() < 6) it.turns.push_back(it.turns.back());
  }
  const auto std6 = turn_edit_stats(deep.train);
  REQUIRE(std6.size() == 4);
  CHECK(std6[3].turn_index == 4);
  CHECK(std6[3].sample_count == 2 * 3);  // turns 4,5,6 of both interactions
}

TEST_CASE("segment extraction") {
  const SyntheticCorpus c = make_overfit_corpus(7, 2);
  const Schema& shop = c.schemas.at("toy_shop");
  auto t = [&shop](const std::string& q) { return tokenize_sql(q, shop); };

  const auto two = extract_segments(t("SELECT name FROM products"));
  REQUIRE(two.size() == 2);
  CHECK(two[0].label == "SELECT");
  CHECK(two[1].label == "FROM");
  CHECK(two[0].start == 0);
  CHECK(two[1].start == 2);

  const auto many = extract_segments(
      t("SELECT name FROM products WHERE price > 'x' AND category = 'y' "
        "ORDER BY price LIMIT 3"));
  // SELECT, FROM, 2 WHERE conditions, ORDER BY, LIMIT
  REQUIRE(many.size() == 6);
  CHECK(many[2].label == "WHERE_CONDITION");
  CHECK(many[3].label == "WHERE_CONDITION");
  CHECK(many[4].label == "ORDER_BY");
  CHECK(many[5].label == "LIMIT");
  // spans are disjoint and ordered
  for (std::size_t i = 1; i < many.size(); ++i)
    CHECK(many[i].start >= many[i - 1].start + many[i - 1].tokens.size());

  SqlTokenSeq broken;
  broken.tokens = {SqlToken::keyword("WHERE")};
  CHECK(extract_segments(broken).empty());
}

TEST_CASE("three segments for a join query with one condition") {
  const SyntheticCorpus c = make_overfit_corpus(7, 2);
  const Schema& shop = c.schemas.at("toy_shop");
  const auto segs = extract_segments(tokenize_sql(
      "SELECT COUNT ( * ) FROM products JOIN orders ON products.name = "
      "orders.buyer WHERE products.category = 'x'",
      shop));
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].label == "SELECT");
  CHECK(segs[1].label == "FROM");  // joins stay inside the FROM segment
  CHECK(segs[2].label == "WHERE_CONDITION");
}
