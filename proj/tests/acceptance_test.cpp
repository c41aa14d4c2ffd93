// Acceptance gate: every release-blocking property in one binary, one
// PASS/FAIL line per criterion. The dataset-statistics criterion only runs
// when the public corpus is present (SPARC_DIR or ./data/sparc).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "editsql/decoder.hpp"
#include "editsql/edit_ops.hpp"
#include "editsql/encoder.hpp"
#include "editsql/interaction.hpp"
#include "editsql/sql_lang.hpp"
#include "editsql/synthetic.hpp"
#include "editsql/training.hpp"

using namespace editsql;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
  std::cout << (ok ? "PASS" : "FAIL") << " — " << name;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << "\n";
  if (!ok) ++failures;
}

void skip(const std::string& name, const std::string& why) {
  std::cout << "SKIP — " << name << " (" << why << ")" << "\n";
}

double sum_of(const Tensor& t) {
  double s = 0;
  for (double x : t.v) s += x;
  return s;
}

Utterance random_utterance(std::mt19937_64& rng) {
  static const std::vector<std::string> kWords = {
      "show",  "the", "name",  "price", "of", "every", "product",
      "which", "are", "cheap", "sort",  "by", "age",   "?"};
  Utterance u;
  const std::size_t n = 1 + rng() % 6;
  for (std::size_t i = 0; i < n; ++i)
    u.tokens.push_back(kWords[rng() % kWords.size()]);
  return u;
}

// one random (params, input) draw exercising every attention softmax and
// both output-distribution views; returns the largest |sum - 1| observed
double one_normalization_draw(std::uint64_t seed) {
  ModelConfig mc;
  mc.embedding_dim = 6;
  mc.hidden_size = 4;
  mc.seed = seed;
  ModelParams params(mc);
  const SyntheticCorpus corp = make_overfit_corpus(seed, 2);
  const Schema& schema = corp.schemas.at(seed % 2 == 0 ? "toy_shop" : "toy_school");
  const OutputVocab vocab = OutputVocab::build(schema);
  const auto provider = EmbeddingProvider::random(mc.embedding_dim, seed);
  std::mt19937_64 rng(seed * 977 + 3);

  Graph g(params, false);
  InteractionState state = initial_interaction_state(g);
  const auto [ue0, ce0] =
      encode_utterance_table(g, random_utterance(rng), schema, provider);
  SqlTokenSeq prev = tokenize_sql(
      seed % 2 ? "SELECT name FROM students WHERE age > 'x'"
               : "SELECT price FROM products WHERE category = 'x'",
      schema);
  state = advance(g, state, ue0.final_state, ue0.token_states, prev);

  const auto [ue, ce] =
      encode_utterance_table(g, random_utterance(rng), schema, provider);
  const Tape::Var c_turn =
      turn_attention(g, ue.final_state, state.history_utterances);
  DecoderInputs in;
  in.columns = &ce;
  in.table_embeds = table_embeddings(g, schema, ce);
  in.all_token_states = ue0.token_states;
  in.all_token_states.insert(in.all_token_states.end(), ue.token_states.begin(),
                             ue.token_states.end());
  in.prev_query = &prev;
  in.editing = true;
  in.prev_query_states = encode_prev_query(g, prev, schema, ce, in.table_embeds);

  DecoderState st = decoder_initial(g, c_turn);
  const Tape::Var q = decoder_token_embedding(
      g, vocab.entries[OutputVocab::kBos], ce, in.table_embeds);
  const StepOutput step = decoder_step(g, st, q, in);

  double worst = 0.0;
  for (const Tensor& dist : g.attention_log())
    worst = std::max(worst, std::abs(sum_of(dist) - 1.0));
  worst = std::max(worst, std::abs(sum_of(g.tape.value(step.base_probs)) - 1.0));
  const OutputDistribution d = aggregate_distribution(g, step, vocab, in);
  double s1 = 0, s2 = 0;
  for (double x : d.per_entry) s1 += x;
  for (const auto& [k, x] : d.per_surface_token) s2 += x;
  worst = std::max({worst, std::abs(s1 - 1.0), std::abs(s2 - 1.0)});
  return worst;
}

void criterion_normalization() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed)
    worst = std::max(worst, one_normalization_draw(seed));
  report("distribution normalization over 1000 random draws (tol 1e-6)",
         worst < 1e-6, "worst |sum-1| = " + std::to_string(worst));
}

void criterion_mixture_law() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    ModelConfig mc;
    mc.embedding_dim = 6;
    mc.hidden_size = 4;
    mc.seed = seed;
    ModelParams params(mc);
    const SyntheticCorpus corp = make_overfit_corpus(seed, 2);
    const Schema& schema = corp.schemas.at("toy_shop");
    const OutputVocab vocab = OutputVocab::build(schema);
    const auto provider = EmbeddingProvider::random(mc.embedding_dim, seed);
    std::mt19937_64 rng(seed);

    Graph g(params, false);
    const auto [ue, ce] =
        encode_utterance_table(g, random_utterance(rng), schema, provider);
    // previous queries of length <= 6, with deliberate duplicate tokens
    SqlTokenSeq prev;
    prev.schema_ref = schema.db_id;
    static const std::vector<SqlToken> pool = {
        SqlToken::keyword("SELECT"), SqlToken::keyword("FROM"),
        SqlToken::keyword(","),      SqlToken::value(),
        SqlToken::column("products.name", 1),
        SqlToken::column("products.price", 2)};
    const std::size_t len = 1 + rng() % 6;
    for (std::size_t i = 0; i < len; ++i)
      prev.tokens.push_back(pool[rng() % pool.size()]);

    DecoderInputs in;
    in.columns = &ce;
    in.table_embeds = table_embeddings(g, schema, ce);
    in.all_token_states = ue.token_states;
    in.prev_query = &prev;
    in.editing = true;
    in.prev_query_states =
        encode_prev_query(g, prev, schema, ce, in.table_embeds);

    DecoderState st = decoder_initial(g, turn_attention(g, ue.final_state, {}));
    const Tape::Var q = decoder_token_embedding(
        g, vocab.entries[OutputVocab::kBos], ce, in.table_embeds);
    const StepOutput step = decoder_step(g, st, q, in);

    const double p_copy = g.tape.value(step.p_copy)[0];
    const Tensor& base = g.tape.value(step.base_probs);
    const Tensor& pq = g.tape.value(step.prev_probs);
    std::map<std::string, double> expect;
    for (std::size_t i = 0; i < vocab.size(); ++i)
      expect[vocab.entries[i].surface_key()] += (1.0 - p_copy) * base[i];
    for (std::size_t j = 0; j < prev.size(); ++j)
      expect[prev.tokens[j].surface_key()] += p_copy * pq[j];
    const OutputDistribution d = aggregate_distribution(g, step, vocab, in);
    if (d.per_surface_token.size() != expect.size()) {
      worst = 1.0;
      break;
    }
    for (const auto& [key, val] : expect)
      worst = std::max(worst, std::abs(d.per_surface_token.at(key) - val));
  }
  report("edit mixture equals p_copy*P_prev + p_insert*P_base (tol 1e-10, "
         "prev length <= 6)",
         worst < 1e-10, "worst abs diff = " + std::to_string(worst));
}

void criterion_gradcheck() {
  const SyntheticCorpus fx = make_gradcheck_fixture();
  ModelConfig mc;
  mc.embedding_dim = 6;
  mc.hidden_size = 4;
  mc.seed = 13;
  ModelParams params(mc);
  const auto provider = EmbeddingProvider::random(mc.embedding_dim, mc.seed);
  const double err = gradient_check_max_rel_err(
      params, fx.train[0], fx.schemas.at(fx.train[0].db_id), provider);
  report("full-model gradient check, hidden 4, step 1e-4 (rel err < 1e-4)",
         err < 1e-4, "max rel err = " + std::to_string(err));
}

void criterion_diff_roundtrip() {
  std::mt19937_64 rng(2024);
  static const std::vector<std::string> kAlpha = {"A", "B", "C", "D", "E", "F"};
  bool ok = true;
  for (int i = 0; i < 10000 && ok; ++i) {
    auto make = [&rng]() {
      SqlTokenSeq s;
      const std::size_t n = rng() % 15;
      for (std::size_t j = 0; j < n; ++j)
        s.tokens.push_back(SqlToken::keyword(kAlpha[rng() % kAlpha.size()]));
      return s;
    };
    const SqlTokenSeq a = make(), b = make();
    ok = apply(diff(a, b), a).tokens == b.tokens;
  }
  // every consecutive gold pair of the synthetic corpora
  for (std::uint64_t seed = 1; seed <= 3 && ok; ++seed) {
    const SyntheticCorpus c = make_editing_corpus(seed, 10, 5);
    for (const auto& it : c.train)
      for (std::size_t t = 1; t < it.turns.size() && ok; ++t)
        ok = apply(diff(it.turns[t - 1].second, it.turns[t].second),
                   it.turns[t - 1].second)
                 .tokens == it.turns[t].second.tokens;
  }
  report("diff/apply roundtrip over 10000 random pairs + gold pairs", ok);
}

void criterion_evaluator_invariances() {
  const SyntheticCorpus c = make_overfit_corpus(5, 4);
  const Schema& s = c.schemas.at("toy_shop");
  auto t = [&s](const std::string& q) { return tokenize_sql(q, s); };
  bool ok = true;
  std::mt19937_64 rng(55);
  static const std::vector<std::string> cols = {"name", "price", "category"};
  for (int i = 0; i < 300 && ok; ++i) {
    const std::string a = cols[rng() % 3], b = cols[rng() % 3];
    const std::string lit1 = "'v" + std::to_string(rng() % 5) + "'";
    const std::string lit2 = "'v" + std::to_string(rng() % 5) + "'";
    // SELECT-item permutation
    ok = ok && exact_set_match(t("SELECT " + a + " , " + b + " FROM products"),
                               t("SELECT " + b + " , " + a + " FROM products"));
    // WHERE-conjunct permutation + literal substitution
    ok = ok &&
         exact_set_match(
             t("SELECT name FROM products WHERE " + a + " = " + lit1 +
               " AND " + b + " > " + lit2),
             t("SELECT name FROM products WHERE " + b + " > " + lit1 +
               " AND " + a + " = " + lit2));
    // alias renaming
    ok = ok && exact_set_match(
                   t("SELECT T1." + a + " FROM products AS T1 JOIN orders AS "
                     "T2 ON T1.name = T2.buyer"),
                   t("SELECT X." + a + " FROM orders AS Y JOIN products AS X "
                     "ON X.name = Y.buyer"));
  }
  // gold-vs-gold scores exactly 1.0
  std::vector<std::vector<SqlTokenSeq>> golds;
  for (const auto& it : c.train) {
    std::vector<SqlTokenSeq> g;
    for (const auto& [u, q] : it.turns) g.push_back(q);
    golds.push_back(std::move(g));
  }
  const EvalReport r = score_predictions(golds, golds);
  ok = ok && r.question_match == 1.0 && r.interaction_match == 1.0;
  report("exact-set-match invariances + gold-vs-gold scores 1.0", ok);
}

void criterion_overfit() {
  const SyntheticCorpus c = make_overfit_corpus(42, 20);
  TrainConfig cfg;
  cfg.model.embedding_dim = 20;
  cfg.model.hidden_size = 16;
  cfg.model.seed = 42;
  cfg.batch_size = 8;
  cfg.initial_lr = 0.05;
  cfg.eval_prev_mode = PrevQueryMode::GOLD;
  const auto provider =
      EmbeddingProvider::random(cfg.model.embedding_dim, cfg.model.seed);
  cfg.max_epochs = 50;
  auto [p, rep] = fit(cfg, c.train, c.train, c.schemas, provider);
  double best = 0.0;
  for (double qm : rep.validation_question_match) best = std::max(best, qm);
  const std::size_t epochs = rep.validation_question_match.size();
  report("overfit: 100% train question match within 50 epochs",
         best >= 1.0, "best = " + std::to_string(best) + " over " +
                          std::to_string(epochs) + " epochs");
}

void criterion_editing_trend() {
  double edit_sum = 0.0, plain_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const SyntheticCorpus c = make_editing_corpus(seed, 12, 6);
    for (const bool editing : {true, false}) {
      TrainConfig cfg;
      cfg.model.embedding_dim = 16;
      cfg.model.hidden_size = 16;
      cfg.model.seed = seed;
      cfg.model.editing_enabled = editing;
      cfg.batch_size = 8;
      cfg.initial_lr = 0.05;
      cfg.max_epochs = 60;
      cfg.eval_prev_mode = PrevQueryMode::GOLD;
      const auto provider =
          EmbeddingProvider::random(cfg.model.embedding_dim, cfg.model.seed);
      auto [params, rep] = fit(cfg, c.train, {}, c.schemas, provider);
      const EvalReport r =
          evaluate(params, c.dev, c.schemas, provider, PrevQueryMode::GOLD);
      if (editing)
        edit_sum += r.question_match;
      else
        plain_sum += r.question_match;
    }
  }
  report("editing-enabled dev match >= editing-disabled (3 seeds, equal "
         "epochs)",
         edit_sum >= plain_sum,
         "editing avg = " + std::to_string(edit_sum / 3.0) +
             ", plain avg = " + std::to_string(plain_sum / 3.0));
}

void criterion_dataset_stats() {
  const char* env = std::getenv("SPARC_DIR");
  fs::path dir = env ? fs::path(env) : fs::path("data/sparc");
  const fs::path tables = dir / "tables.json";
  const fs::path train = dir / "train.json";
  const fs::path dev = dir / "dev.json";
  if (!fs::exists(tables) || !fs::exists(train) || !fs::exists(dev)) {
    skip("public-corpus statistics reproduction",
         "dataset not present under " + dir.string() +
             "; set SPARC_DIR to enable");
    return;
  }
  const SchemaMap schemas = load_schemas(tables.string());
  auto data = load_interactions(train.string(), schemas);
  const auto dev_data = load_interactions(dev.string(), schemas);
  data.insert(data.end(), dev_data.begin(), dev_data.end());
  const CorpusStats st = corpus_stats(data);

  bool ok = schemas.size() == 200;
  ok = ok && st.num_interactions == 4298 && st.num_questions == 12726;
  ok = ok && std::abs(st.avg_turns - 3.0) <= 0.1 &&
       std::abs(st.avg_question_length - 8.1) <= 0.1;
  const std::map<std::string, double> expected = {
      {"WHERE", 42.8}, {"AGG", 39.8},  {"GROUP", 20.1}, {"ORDER", 17.0},
      {"HAVING", 4.7}, {"SET", 3.5},   {"JOIN", 35.5},  {"Nested", 5.7}};
  for (const auto& [k, v] : expected)
    ok = ok && std::abs(st.clause_frequencies.at(k) - v) <= 1.0;

  double seg_total = 0.0;
  std::size_t seg_n = 0;
  for (const auto& it : data)
    for (const auto& [u, q] : it.turns) {
      const auto segs = extract_segments(q);
      if (!segs.empty()) {
        seg_total += static_cast<double>(segs.size());
        ++seg_n;
      }
    }
  const double avg_segments = seg_n ? seg_total / static_cast<double>(seg_n) : 0;
  ok = ok && std::abs(avg_segments - 3.9) <= 0.2;
  report("public-corpus statistics reproduction", ok,
         "avg segments = " + std::to_string(avg_segments));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion_normalization();
  criterion_mixture_law();
  criterion_gradcheck();
  criterion_diff_roundtrip();
  criterion_evaluator_invariances();
  criterion_overfit();
  criterion_editing_trend();
  criterion_dataset_stats();
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::cout << (failures == 0 ? "ALL ACCEPTANCE CRITERIA PASSED"
                              : std::to_string(failures) + " CRITERIA FAILED")
            << " in " << secs << "s\n";
  return failures == 0 ? 0 : 1;
}
