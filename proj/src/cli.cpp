#include "ialcpg/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ialcpg/config.hpp"
#include "ialcpg/corpus.hpp"
#include "ialcpg/curriculum.hpp"
#include "ialcpg/errors.hpp"
#include "ialcpg/gradcheck_suite.hpp"
#include "ialcpg/metrics.hpp"
#include "ialcpg/retrieval.hpp"
#include "ialcpg/trainer.hpp"

namespace ialcpg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags shared by the pipeline commands; unset ones leave the config alone.
struct Overrides {
  std::string config;
  std::string corpus;
  std::string out;
  std::string stopwords;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> chunk_size;
  std::optional<std::size_t> max_context;
  std::optional<std::size_t> top_k;
  std::optional<double> delta;
  std::optional<std::ptrdiff_t> band;
  std::optional<std::size_t> epochs;
  std::string ablation;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key = value config file");
  cmd->add_option("--corpus", o.corpus, "JSON-lines corpus");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--stopwords", o.stopwords, "stopword file (one word per line)");
  cmd->add_option("--seed", o.seed);
  cmd->add_option("--chunk-size", o.chunk_size, "use a single chunk size");
  cmd->add_option("--max-context", o.max_context);
  cmd->add_option("--top-k", o.top_k);
  cmd->add_option("--delta", o.delta);
  cmd->add_option("--band", o.band);
  cmd->add_option("--epochs", o.epochs);
}

TrainConfig resolve(const Overrides& o) {
  TrainConfig c = o.config.empty() ? TrainConfig{} : load_config(o.config);
  if (!o.corpus.empty()) c.corpus = o.corpus;
  if (!o.out.empty()) c.out_dir = o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.chunk_size) c.chunk_sizes = {*o.chunk_size};
  if (o.max_context) c.max_context = *o.max_context;
  if (o.top_k) c.top_k = *o.top_k;
  if (o.delta) c.delta = *o.delta;
  if (o.band) c.band = *o.band;
  if (o.epochs) c.epochs = *o.epochs;
  if (!o.ablation.empty()) apply_ablation(c, o.ablation);
  c.validate();
  if (c.corpus.empty()) throw UsageError("no corpus given (--corpus or corpus = ... in the config)");
  return c;
}

StopwordSet stopwords_for(const Overrides& o) {
  return o.stopwords.empty() ? default_stopwords() : load_stopwords(o.stopwords);
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::trunc);
  if (!os) throw DataError("cannot write " + p.string());
  os << text;
}

json window_json(const ContextWindow& w, const char* set) {
  json prov = json::array();
  for (const auto& r : w.provenance) prov.push_back({r.story_id, r.chunk_index});
  return {{"example_id", w.example_id}, {"set", set},          {"chunk_size", w.chunk_size},
          {"tokens", w.tokens},         {"provenance", prov}};
}

int cmd_ingest(const Overrides& o, std::ostream& out) {
  const TrainConfig c = resolve(o);
  const Dataset ds = load_dataset(c.corpus, c.max_question_len);
  json summary{{"stories", ds.stories.size()}, {"examples", ds.examples.size()}};
  for (Split s : {Split::kTrain, Split::kDev, Split::kTest})
    summary["split"][std::string(split_name(s))] = ds.by_split(s).size();
  const auto docs = vocab_documents(ds, ds.by_split(Split::kTrain));
  const Vocab gen = build_vocab(docs, c.min_stories);
  summary["gen_vocab"] = gen.size();
  fs::create_directories(c.out_dir);
  gen.save(fs::path(c.out_dir) / "vocab.gen.txt");
  build_vocab(docs, 1).save(fs::path(c.out_dir) / "vocab.input.txt");
  write_file(fs::path(c.out_dir) / "dataset.json", summary.dump(2) + "\n");
  out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_index(const Overrides& o, std::ostream& out) {
  const TrainConfig c = resolve(o);
  const Dataset ds = load_dataset(c.corpus, c.max_question_len);
  const StopwordSet sw = stopwords_for(o);
  for (std::size_t k : c.chunk_sizes) {
    std::vector<Chunk> chunks;
    for (const Story& s : ds.stories) {
      auto cs = chunk_story(s, k);
      chunks.insert(chunks.end(), cs.begin(), cs.end());
    }
    if (chunks.empty()) throw DataError("corpus has no stories to index");
    const TfidfIndex index(chunks, sw);
    const fs::path p = fs::path(c.out_dir) / ("tfidf-" + std::to_string(k) + ".json");
    fs::create_directories(c.out_dir);
    index.save(p);
    out << json{{"chunk_size", k}, {"chunks", index.chunk_count()}, {"terms", index.term_count()},
                {"path", p.string()}}.dump()
        << '\n';
  }
  return kExitOk;
}

int cmd_make_sets(const Overrides& o, std::ostream& out) {
  const TrainConfig c = resolve(o);
  const Dataset ds = load_dataset(c.corpus, c.max_question_len);
  RetrievalConfig rc;
  rc.max_context = c.max_context;
  rc.top_k = c.top_k;
  const auto sets = build_sets(ds, ds.by_split(Split::kTrain), rc, c.chunk_sizes, stopwords_for(o));
  for (const auto& [k, pair] : sets) {
    std::string text;
    for (const auto& [id, w] : pair.easy) text += window_json(w, "easy").dump() + "\n";
    for (const auto& [id, w] : pair.hard) text += window_json(w, "hard").dump() + "\n";
    const fs::path p = fs::path(c.out_dir) / ("sets-" + std::to_string(k) + ".jsonl");
    write_file(p, text);
    out << json{{"chunk_size", k}, {"easy", pair.easy.size()}, {"hard", pair.hard.size()}, {"path", p.string()}}.dump()
        << '\n';
  }
  return kExitOk;
}

int cmd_train(const Overrides& o, std::ostream& out) {
  const TrainConfig c = resolve(o);
  const Dataset ds = load_dataset(c.corpus, c.max_question_len);
  TrainOptions opts;
  opts.on_epoch = [&out](const EpochRecord& r, const IalCpgModel&) {
    out << r.to_json() << '\n' << std::flush;
    return false;
  };
  const TrainResult res = train(c, ds, stopwords_for(o), opts);
  out << json{{"out_dir", c.out_dir}, {"epochs", res.log.size()}}.dump() << '\n';
  return kExitOk;
}

std::map<std::string, std::string> read_predictions(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw UsageError("cannot read predictions " + p.string());
  std::map<std::string, std::string> preds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      preds[j.at("example_id").get<std::string>()] = j.at("predicted_answer").get<std::string>();
    } catch (const json::exception& e) {
      throw DataError(p.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return preds;
}

// Gold file: corpus-style qa records, or bare {example_id, answers}; story records are skipped.
std::vector<std::pair<std::string, ReferencePair>> read_gold(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw UsageError("cannot read gold file " + p.string());
  std::vector<std::pair<std::string, ReferencePair>> gold;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (j.value("type", "qa") != "qa") continue;
      const auto& a = j.at("answers");
      if (!a.is_array() || a.size() != 2) throw DataError("expected exactly two answers");
      gold.push_back({j.at("example_id").get<std::string>(),
                      {join_tokens(tokenize(a[0].get<std::string>())), join_tokens(tokenize(a[1].get<std::string>()))}});
    } catch (const json::exception& e) {
      throw DataError(p.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(p.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return gold;
}

int cmd_evaluate(const std::string& pred_path, const std::string& gold_path, bool table, std::ostream& out) {
  const auto preds = read_predictions(pred_path);
  const auto gold = read_gold(gold_path);
  std::vector<std::string> hyps;
  std::vector<ReferencePair> refs;
  for (const auto& [id, pair] : gold) {
    auto it = preds.find(id);
    if (it == preds.end()) throw DataError("no prediction for example '" + id + "'");
    hyps.push_back(join_tokens(tokenize(it->second)));
    refs.push_back(pair);
  }
  const MetricReport r = score_all(hyps, refs);
  out << (table ? r.table() : r.to_json() + "\n");
  return kExitOk;
}

int cmd_decode(const Overrides& o, const std::string& run_dir, const std::string& split_s,
               const std::string& checkpoint, std::ostream& out) {
  if (run_dir.empty()) throw UsageError("decode needs --run <training output directory>");
  TrainConfig c;
  auto model = load_run(run_dir, &c, checkpoint);
  if (!o.corpus.empty()) c.corpus = o.corpus;
  if (o.chunk_size) c.chunk_sizes = {*o.chunk_size};
  if (o.max_context) c.max_context = *o.max_context;
  if (o.top_k) c.top_k = *o.top_k;
  if (c.corpus.empty()) throw UsageError("no corpus given");
  const auto split = parse_split(split_s);
  if (!split) throw UsageError("unknown split '" + split_s + "'");

  const Dataset ds = load_dataset(c.corpus, c.max_question_len);
  const auto examples = ds.by_split(*split);
  RetrievalConfig rc;
  rc.max_context = c.max_context;
  rc.top_k = c.top_k;
  const auto windows = question_windows(ds, examples, rc, c.chunk_sizes.front(), stopwords_for(o));
  const Evaluation ev = evaluate(*model, examples, windows, c.max_answer_len);

  std::string text;
  for (const Prediction& p : ev.predictions) {
    json steps = json::array();
    for (const DecodeStep& s : p.decode.steps)
      steps.push_back({{"p", s.p}, {"choice", s.pointer ? "pointer" : "vocab"}, {"index", s.index}, {"token", s.token}});
    json pt = json::array();
    for (const DecodeStep& s : p.decode.steps) pt.push_back(s.p);
    text += json{{"example_id", p.example_id}, {"predicted_answer", p.answer}, {"p_t", pt}, {"steps", steps}}.dump() +
            "\n";
  }
  const fs::path dest = o.out.empty() ? fs::path(run_dir) / ("decode-" + split_s + ".jsonl") : fs::path(o.out);
  write_file(dest, text);
  out << json{{"path", dest.string()}, {"examples", ev.predictions.size()}, {"exact", ev.exact},
              {"metrics", json::parse(ev.report.to_json())}}.dump()
      << '\n';
  return kExitOk;
}

int cmd_gradcheck(const std::string& dims, std::uint64_t seed, std::ostream& out) {
  if (dims != "micro") throw UsageError("unsupported --dims '" + dims + "' (only 'micro')");
  const SuiteReport r = run_gradcheck_suite(seed);
  out << r.to_text();
  if (!r.passed()) throw NumericError("gradient check failed, max relative error " + std::to_string(r.max_rel_error()));
  return kExitOk;
}

int cmd_ablate(Overrides o, bool list, std::ostream& out) {
  if (list) {
    for (const auto& a : ablations()) out << a.name << "\t" << a.description << '\n';
    return kExitOk;
  }
  if (o.ablation.empty()) throw UsageError("ablate needs --ablation <name> (see --list)");
  if (o.out.empty()) {
    TrainConfig base = o.config.empty() ? TrainConfig{} : load_config(o.config);
    o.out = (fs::path(base.out_dir) / ("ablation-" + o.ablation)).string();
  }
  return cmd_train(o, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"IAL-CPG reading comprehension toolkit", "ialcpg"};
  app.require_subcommand(1);

  Overrides o;
  auto* ingest = app.add_subcommand("ingest", "load a corpus, report splits, write vocabularies");
  add_common(ingest, o);
  auto* index = app.add_subcommand("index", "build TF-IDF chunk indexes");
  add_common(index, o);
  auto* sets = app.add_subcommand("make-sets", "build easy/hard context windows per chunk size");
  add_common(sets, o);
  auto* train_cmd = app.add_subcommand("train", "train with the curriculum scheduler");
  add_common(train_cmd, o);
  train_cmd->add_option("--ablation", o.ablation);

  std::string pred, gold;
  bool table = false;
  auto* eval = app.add_subcommand("evaluate", "score predictions against gold answers");
  eval->add_option("--pred", pred)->required();
  eval->add_option("--gold", gold)->required();
  eval->add_flag("--table", table, "plain-text table instead of JSON");

  std::string run_dir, split = "dev", checkpoint;
  auto* decode = app.add_subcommand("decode", "greedy decode a split with a trained run");
  add_common(decode, o);
  decode->add_option("--run", run_dir)->required();
  decode->add_option("--split", split);
  decode->add_option("--checkpoint", checkpoint);

  std::string dims = "micro";
  std::uint64_t gc_seed = 7;
  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gc->add_option("--dims", dims);
  gc->add_option("--seed", gc_seed);

  bool list = false;
  auto* ablate = app.add_subcommand("ablate", "train a named ablation configuration");
  add_common(ablate, o);
  ablate->add_option("--ablation", o.ablation);
  ablate->add_flag("--list", list);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "usage_error: " << msg << '\n';
    return kExitUsage;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(o, out);
    if (index->parsed()) return cmd_index(o, out);
    if (sets->parsed()) return cmd_make_sets(o, out);
    if (train_cmd->parsed()) return cmd_train(o, out);
    if (eval->parsed()) return cmd_evaluate(pred, gold, table, out);
    if (decode->parsed()) return cmd_decode(o, run_dir, split, checkpoint, out);
    if (gc->parsed()) return cmd_gradcheck(dims, gc_seed, out);
    if (ablate->parsed()) return cmd_ablate(o, list, out);
  } catch (const UsageError& e) {
    err << "usage_error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data_error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    err << "numeric_error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    err << "data_error: " << e.what() << '\n';
    return kExitData;
  }
  err << "usage_error: no command\n";
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace ialcpg::cli
