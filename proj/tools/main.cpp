// editsql command-line tool: dataset analysis, training, evaluation,
// prediction (batch or REPL), and gradient verification.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "editsql/corpus.hpp"
#include "editsql/edit_ops.hpp"
#include "editsql/sql_lang.hpp"
#include "editsql/synthetic.hpp"
#include "editsql/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace editsql;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string train_path;
  std::string dev_path;
  std::string tables_path;
  std::string out;
  std::string checkpoint;
  std::string db;
  std::string mode = "predicted";
  std::string editing;  // "on"/"off"; empty keeps the config value
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool interactive = false;
  bool gold_as_pred = false;  // eval test hook: score gold against itself
};

void require_file(const std::string& path, const std::string& flag) {
  if (path.empty()) throw UsageError("missing required flag " + flag);
  if (!fs::exists(path))
    throw UsageError(flag + ": no such file '" + path + "'");
}

// Flat dotted-key JSON config; CLI flags override file values.
std::map<std::string, json> load_flat_config(const std::string& path) {
  std::map<std::string, json> flat;
  if (path.empty()) return flat;
  require_file(path, "--config");
  std::ifstream in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("--config: " + std::string(e.what()));
  }
  if (!j.is_object()) throw UsageError("--config: top level must be an object");
  for (const auto& [k, v] : j.items()) flat[k] = v;
  return flat;
}

TrainConfig resolve_train_config(const Options& opt,
                                 std::map<std::string, json>& flat) {
  TrainConfig cfg;
  auto take = [&flat](const char* key, auto& slot) {
    const auto it = flat.find(key);
    if (it == flat.end()) return;
    try {
      slot = it->second.get<std::decay_t<decltype(slot)>>();
    } catch (const json::exception&) {
      throw UsageError(std::string("--config: bad value for ") + key);
    }
  };
  take("model.embedding_dim", cfg.model.embedding_dim);
  take("model.hidden_size", cfg.model.hidden_size);
  take("model.seed", cfg.model.seed);
  take("model.init_range", cfg.model.init_range);
  take("model.editing_enabled", cfg.model.editing_enabled);
  take("model.feed_interaction_state", cfg.model.feed_interaction_state);
  take("model.max_decode_len", cfg.model.max_decode_len);
  take("model.turn_window", cfg.model.turn_window);
  take("train.batch_size", cfg.batch_size);
  take("train.initial_lr", cfg.initial_lr);
  take("train.lr_decay_factor", cfg.lr_decay_factor);
  take("train.max_epochs", cfg.max_epochs);
  take("train.grad_clip_norm", cfg.grad_clip_norm);
  std::string mode;
  take("train.eval_prev_mode", mode);
  if (!mode.empty()) {
    if (mode != "gold" && mode != "predicted")
      throw UsageError("--config: train.eval_prev_mode must be gold|predicted");
    cfg.eval_prev_mode =
        mode == "gold" ? PrevQueryMode::GOLD : PrevQueryMode::PREDICTED;
  }
  if (opt.seed) cfg.model.seed = *opt.seed;
  if (opt.editing == "on") cfg.model.editing_enabled = true;
  if (opt.editing == "off") cfg.model.editing_enabled = false;
  return cfg;
}

json echo_config(const Options& opt, const std::map<std::string, json>& flat) {
  json j = json::object();
  for (const auto& [k, v] : flat) j[k] = v;
  if (opt.seed) j["model.seed"] = *opt.seed;
  if (!opt.editing.empty()) j["model.editing_enabled"] = opt.editing == "on";
  return j;
}

// Reports are byte-identical across reruns; the wall-clock timestamp goes
// into a sibling .meta.json instead.
void write_report(const Options& opt, const std::string& command,
                  const std::map<std::string, json>& flat, json body) {
  json report;
  report["command"] = command;
  report["config"] = echo_config(opt, flat);
  report["report"] = std::move(body);
  const std::string text = report.dump(2) + "\n";
  if (opt.out.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(fs::path(opt.out).parent_path().empty()
                             ? fs::path(".")
                             : fs::path(opt.out).parent_path());
  std::ofstream f(opt.out);
  if (!f) throw Error("cannot write " + opt.out);
  f << text;
  json meta;
  meta["generated_at"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  std::ofstream mf(opt.out + ".meta.json");
  mf << meta.dump(2) << "\n";
}

PrevQueryMode parse_mode(const std::string& mode) {
  if (mode == "gold") return PrevQueryMode::GOLD;
  if (mode == "predicted") return PrevQueryMode::PREDICTED;
  throw UsageError("--mode must be gold or predicted");
}

struct Dataset {
  SchemaMap schemas;
  std::vector<Interaction> interactions;
};

Dataset load_dataset(const std::string& data_path,
                     const std::string& tables_path) {
  require_file(tables_path, "--tables-path");
  require_file(data_path, "--train-path/--dev-path");
  Dataset d;
  d.schemas = load_schemas(tables_path);
  d.interactions = load_interactions(data_path, d.schemas);
  return d;
}

json stats_to_json(const CorpusStats& s) {
  json j;
  j["num_interactions"] = s.num_interactions;
  j["num_questions"] = s.num_questions;
  j["avg_turns"] = s.avg_turns;
  j["avg_question_length"] = s.avg_question_length;
  j["question_vocab_size"] = s.question_vocab_size;
  j["clause_frequencies"] = s.clause_frequencies;
  return j;
}

json eval_to_json(const EvalReport& r) {
  json j;
  j["question_match"] = r.question_match;
  j["interaction_match"] = r.interaction_match;
  auto buckets = [](const std::vector<EvalReport::Bucket>& bs) {
    json a = json::array();
    for (const auto& b : bs)
      a.push_back({{"name", b.name},
                   {"count", b.count},
                   {"question_match", b.question_match}});
    return a;
  };
  j["per_turn"] = buckets(r.per_turn);
  j["per_hardness"] = buckets(r.per_hardness);
  return j;
}

int cmd_stats(const Options& opt, std::map<std::string, json>& flat) {
  Dataset d = load_dataset(opt.train_path, opt.tables_path);
  const CorpusStats s = corpus_stats(d.interactions);
  std::cout << "interactions        " << s.num_interactions << "\n"
            << "questions           " << s.num_questions << "\n"
            << "avg turns           " << s.avg_turns << "\n"
            << "avg question length " << s.avg_question_length << "\n"
            << "question vocab      " << s.question_vocab_size << "\n";
  for (const auto& [name, pct] : s.clause_frequencies)
    std::cout << "  " << name << " " << pct << "%\n";
  write_report(opt, "stats", flat, stats_to_json(s));
  return 0;
}

int cmd_analyze_edits(const Options& opt, std::map<std::string, json>& flat) {
  Dataset d = load_dataset(opt.train_path, opt.tables_path);
  const auto stats = turn_edit_stats(d.interactions);
  double seg_total = 0.0;
  std::size_t seg_queries = 0;
  json turns = json::array();
  for (const auto& t : stats) {
    turns.push_back({{"turn", t.turn_index},
                     {"samples", t.sample_count},
                     {"avg_query_length", t.avg_query_length},
                     {"avg_copy_ops", t.avg_copy_ops},
                     {"avg_insert_ops", t.avg_insert_ops},
                     {"avg_tokens_copied", t.avg_tokens_copied},
                     {"avg_tokens_inserted", t.avg_tokens_inserted}});
    std::cout << "turn " << (t.turn_index >= 4 ? "4+" : std::to_string(t.turn_index))
              << ": len " << t.avg_query_length << ", copied "
              << t.avg_tokens_copied << ", inserted " << t.avg_tokens_inserted
              << " (" << t.sample_count << " queries)\n";
  }
  for (const auto& it : d.interactions)
    for (const auto& [u, q] : it.turns) {
      const auto segs = extract_segments(q);
      if (!segs.empty()) {
        seg_total += static_cast<double>(segs.size());
        ++seg_queries;
      }
    }
  const double avg_segments =
      seg_queries == 0 ? 0.0 : seg_total / static_cast<double>(seg_queries);
  std::cout << "avg segments per SQL: " << avg_segments << "\n";
  json body;
  body["per_turn"] = std::move(turns);
  body["avg_segments_per_sql"] = avg_segments;
  body["segmented_queries"] = seg_queries;
  write_report(opt, "analyze-edits", flat, body);
  return 0;
}

int cmd_train(const Options& opt, std::map<std::string, json>& flat) {
  TrainConfig cfg = resolve_train_config(opt, flat);
  Dataset train = load_dataset(opt.train_path, opt.tables_path);
  std::vector<Interaction> dev;
  if (!opt.dev_path.empty()) {
    require_file(opt.dev_path, "--dev-path");
    dev = load_interactions(opt.dev_path, train.schemas);
  }
  if (opt.out.empty()) throw UsageError("train requires --out");
  fs::create_directories(opt.out);
  cfg.checkpoint_dir = opt.out;
  const EmbeddingProvider provider =
      EmbeddingProvider::random(cfg.model.embedding_dim, cfg.model.seed);
  auto [params, rep] = fit(cfg, train.interactions, dev, train.schemas, provider);
  params.save(opt.out + "/model.ckpt.json");

  json body;
  body["train_loss"] = rep.train_loss;
  body["validation_loss"] = rep.validation_loss;
  body["validation_question_match"] = rep.validation_question_match;
  body["learning_rate"] = rep.learning_rate;
  Options report_opt = opt;
  report_opt.out = opt.out + "/train_report.json";
  write_report(report_opt, "train", flat, body);
  std::cout << "final train loss " << rep.train_loss.back() << ", checkpoint "
            << opt.out << "/model.ckpt.json\n";
  // wall clock is timing metadata, not part of the deterministic report
  std::ofstream(opt.out + "/train_report.json.meta.json", std::ios::app)
      << json{{"wall_clock_seconds", rep.wall_clock_seconds}}.dump() << "\n";
  return 0;
}

int cmd_eval(const Options& opt, std::map<std::string, json>& flat) {
  Dataset d = load_dataset(opt.train_path.empty() ? opt.dev_path : opt.train_path,
                           opt.tables_path);
  EvalReport rep;
  if (opt.gold_as_pred) {
    std::vector<std::vector<SqlTokenSeq>> golds;
    for (const auto& it : d.interactions) {
      std::vector<SqlTokenSeq> g;
      for (const auto& [u, q] : it.turns) g.push_back(q);
      golds.push_back(std::move(g));
    }
    rep = score_predictions(golds, golds);
  } else {
    require_file(opt.checkpoint, "--checkpoint");
    ModelParams params = ModelParams::load(opt.checkpoint);
    const EmbeddingProvider provider = EmbeddingProvider::random(
        params.config().embedding_dim, params.config().seed);
    rep = evaluate(params, d.interactions, d.schemas, provider,
                   parse_mode(opt.mode));
  }
  std::cout << "question match    " << rep.question_match << "\n"
            << "interaction match " << rep.interaction_match << "\n";
  write_report(opt, "eval", flat, eval_to_json(rep));
  return 0;
}

int run_repl(const Options& opt) {
  require_file(opt.tables_path, "--tables-path");
  require_file(opt.checkpoint, "--checkpoint");
  const SchemaMap schemas = load_schemas(opt.tables_path);
  if (opt.db.empty() || schemas.find(opt.db) == schemas.end()) {
    std::string known;
    for (const auto& [id, s] : schemas) known += " " + id;
    throw UsageError("--db '" + opt.db + "' unknown; available:" + known);
  }
  ModelParams params = ModelParams::load(opt.checkpoint);
  const EmbeddingProvider provider = EmbeddingProvider::random(
      params.config().embedding_dim, params.config().seed);

  Interaction session;
  session.interaction_id = "repl";
  session.db_id = opt.db;
  std::string line;
  int turn = 0;
  std::cerr << "db " << opt.db << "; one utterance per line, EOF quits\n";
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    Utterance u;
    u.turn_index = ++turn;
    u.tokens = tokenize_utterance(line);
    if (u.tokens.empty()) {
      --turn;
      continue;
    }
    SqlTokenSeq placeholder;  // unused in predicted mode
    placeholder.schema_ref = opt.db;
    session.turns.emplace_back(u, placeholder);
    const auto preds = predict(params, {session}, schemas, provider,
                               PrevQueryMode::PREDICTED);
    std::cout << render(preds[0].back()) << std::endl;
  }
  return 0;
}

int cmd_predict(const Options& opt, std::map<std::string, json>&) {
  if (opt.interactive) return run_repl(opt);
  Dataset d = load_dataset(opt.train_path.empty() ? opt.dev_path : opt.train_path,
                           opt.tables_path);
  require_file(opt.checkpoint, "--checkpoint");
  ModelParams params = ModelParams::load(opt.checkpoint);
  const EmbeddingProvider provider = EmbeddingProvider::random(
      params.config().embedding_dim, params.config().seed);
  const auto preds = predict(params, d.interactions, d.schemas, provider,
                             parse_mode(opt.mode));
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!opt.out.empty()) {
    file.open(opt.out);
    if (!file) throw Error("cannot write " + opt.out);
    out = &file;
  }
  // one rendered SQL per question; blank line between interactions
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (const auto& q : preds[i]) *out << render(q) << "\n";
    if (i + 1 < preds.size()) *out << "\n";
  }
  return 0;
}

int cmd_gradcheck(const Options& opt, std::map<std::string, json>& flat) {
  TrainConfig cfg = resolve_train_config(opt, flat);
  if (flat.find("model.embedding_dim") == flat.end()) cfg.model.embedding_dim = 6;
  if (flat.find("model.hidden_size") == flat.end()) cfg.model.hidden_size = 3;
  const SyntheticCorpus fx = make_gradcheck_fixture();
  ModelParams params(cfg.model);
  const EmbeddingProvider provider =
      EmbeddingProvider::random(cfg.model.embedding_dim, cfg.model.seed);
  const double err = gradient_check_max_rel_err(
      params, fx.train[0], fx.schemas.at(fx.train[0].db_id), provider);
  std::cout << "max relative error " << err << "\n";
  json body;
  body["max_relative_error"] = err;
  body["hidden_size"] = cfg.model.hidden_size;
  write_report(opt, "gradcheck", flat, body);
  return err < 1e-4 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"editing-based context-dependent text-to-SQL"};
  app.require_subcommand(1);

  Options opt;
  std::uint64_t seed_flag = 0;
  bool seed_set = false;
  for (auto* sub :
       {app.add_subcommand("stats", "corpus statistics"),
        app.add_subcommand("analyze-edits", "per-turn edit statistics"),
        app.add_subcommand("train", "train a model"),
        app.add_subcommand("eval", "evaluate a checkpoint"),
        app.add_subcommand("predict", "batch predictions or REPL"),
        app.add_subcommand("gradcheck", "finite-difference verification")}) {
    sub->add_option("--config", opt.config_path, "flat dotted-key JSON config");
    sub->add_option("--train-path", opt.train_path, "interactions JSON");
    sub->add_option("--dev-path", opt.dev_path, "interactions JSON");
    sub->add_option("--tables-path", opt.tables_path, "schemas JSON");
    sub->add_option("--out", opt.out, "output file or directory");
    sub->add_option("--checkpoint", opt.checkpoint, "model checkpoint");
    sub->add_option("--db", opt.db, "database id for the REPL");
    sub->add_option("--mode", opt.mode, "previous-query source: gold|predicted")
        ->check(CLI::IsMember({"gold", "predicted"}));
    sub->add_option("--editing", opt.editing, "query editing: on|off")
        ->check(CLI::IsMember({"on", "off"}));
    sub->add_option("--seed", seed_flag, "random seed")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    sub->add_option("--jobs", opt.jobs, "evaluation parallelism bound")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--interactive", opt.interactive, "REPL mode (predict)");
    sub->add_flag("--gold-as-pred", opt.gold_as_pred,
                  "eval hook: score gold queries against themselves");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 2;
  }
  if (seed_set) opt.seed = seed_flag;

  try {
    auto flat = load_flat_config(opt.config_path);
    if (app.got_subcommand("stats")) return cmd_stats(opt, flat);
    if (app.got_subcommand("analyze-edits")) return cmd_analyze_edits(opt, flat);
    if (app.got_subcommand("train")) return cmd_train(opt, flat);
    if (app.got_subcommand("eval")) return cmd_eval(opt, flat);
    if (app.got_subcommand("predict")) return cmd_predict(opt, flat);
    if (app.got_subcommand("gradcheck")) return cmd_gradcheck(opt, flat);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
