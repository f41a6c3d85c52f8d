#include "ialcpg/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "ialcpg/errors.hpp"

namespace ialcpg {

std::size_t blended_index(const GoldLabel& label, std::size_t context_length) {
  switch (label.kind) {
    case GoldLabel::Kind::kContext:
      if (label.index >= context_length) {
        throw DataError("gold context position " + std::to_string(label.index) + " outside context of length " +
                        std::to_string(context_length));
      }
      return label.index;
    case GoldLabel::Kind::kVocab: return context_length + label.index;
    case GoldLabel::Kind::kIgnored: break;
  }
  throw DataError("ignored label has no index");
}

ag::Tensor step_loss(const std::vector<BlendedDistribution>& dists, const std::vector<GoldLabel>& gold,
                     const ParameterSet* params, double l2) {
  if (dists.size() != gold.size()) {
    throw ShapeError("step_loss: " + std::to_string(dists.size()) + " steps vs " + std::to_string(gold.size()) +
                     " labels");
  }
  ag::Tensor total;
  std::size_t counted = 0;
  for (std::size_t t = 0; t < gold.size(); ++t) {
    if (gold[t].kind == GoldLabel::Kind::kIgnored) continue;
    const std::size_t idx = blended_index(gold[t], dists[t].context_length);
    if (idx >= dists[t].probs.cols()) throw DataError("gold vocabulary index outside the distribution");
    const ag::Tensor lp = ag::log(ag::pick(dists[t].probs, 0, idx));
    total = total.defined() ? ag::add(total, lp) : lp;
    ++counted;
  }
  if (counted == 0) throw DataError("step_loss: every label is ignored");
  ag::Tensor loss = ag::scale(total, -1.0 / static_cast<double>(counted));
  if (params && l2 > 0.0) loss = ag::add(loss, ag::scale(params->l2_term(), l2));
  return loss;
}

void adadelta_update(ParameterSet& params, AdadeltaState& st) {
  auto& all = params.all();
  if (st.sq_grad.size() != all.size()) {
    st.sq_grad.assign(all.size(), {});
    st.sq_update.assign(all.size(), {});
    for (std::size_t i = 0; i < all.size(); ++i) {
      st.sq_grad[i].assign(all[i].tensor.size(), 0.0);
      st.sq_update[i].assign(all[i].tensor.size(), 0.0);
    }
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!all[i].trainable()) continue;
    auto& eg = st.sq_grad[i];
    auto& ex = st.sq_update[i];
    if (eg.size() != all[i].tensor.size()) throw ShapeError("adadelta: accumulator shape changed for " + all[i].name);
    auto value = all[i].tensor.mutable_values();
    const auto grad = all[i].tensor.grad();
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double g = grad[k];
      eg[k] = st.rho * eg[k] + (1.0 - st.rho) * g * g;
      const double dx = -std::sqrt(ex[k] + st.eps) / std::sqrt(eg[k] + st.eps) * g;
      ex[k] = st.rho * ex[k] + (1.0 - st.rho) * dx * dx;
      value[k] += st.learning_rate * dx;
    }
  }
}

std::vector<GoldLabel> training_targets(const TokenSeq& context, const TokenSeq& answer, const Vocab& gen_vocab,
                                        const StopwordSet& stopwords, std::size_t max_answer_len, bool pg_off) {
  auto labels = build_gold_labels(context, answer, gen_vocab, stopwords, max_answer_len);
  if (labels.size() < max_answer_len) labels.push_back(GoldLabel::vocab(Vocab::kPad));
  if (pg_off) {
    for (auto& l : labels)
      if (l.kind == GoldLabel::Kind::kVocab && l.index != static_cast<std::size_t>(Vocab::kPad)) l = GoldLabel::ignored();
  }
  return labels;
}

std::vector<Story> vocab_documents(const Dataset& dataset, const std::vector<const QAExample*>& examples) {
  std::map<std::string, std::size_t> pos;
  std::vector<Story> docs;
  for (const Story& s : dataset.stories) {
    pos[s.story_id] = docs.size();
    docs.push_back(s);
  }
  for (const QAExample* ex : examples) {
    auto& toks = docs.at(pos.at(ex->story_id)).tokens;
    toks.insert(toks.end(), ex->question.begin(), ex->question.end());
    for (const auto& a : ex->answers) toks.insert(toks.end(), a.begin(), a.end());
  }
  return docs;
}

std::map<std::string, ContextWindow> question_windows(const Dataset& dataset,
                                                      const std::vector<const QAExample*>& examples,
                                                      const RetrievalConfig& retrieval, std::size_t chunk_size,
                                                      const StopwordSet& stopwords) {
  RetrievalConfig cfg = retrieval;
  cfg.chunk_size = chunk_size;
  std::map<std::string, StoryRetriever> retrievers;
  std::map<std::string, ContextWindow> out;
  for (const QAExample* ex : examples) {
    auto it = retrievers.find(ex->story_id);
    if (it == retrievers.end()) {
      const Story* story = dataset.find_story(ex->story_id);
      if (!story) throw DataError("missing story '" + ex->story_id + "'");
      it = retrievers.emplace(ex->story_id, StoryRetriever(*story, chunk_size, stopwords)).first;
    }
    out.emplace(ex->example_id, it->second.retrieve(ex->example_id, question_query(ex->question), cfg));
  }
  return out;
}

std::string join_tokens(const TokenSeq& tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s += ' ';
    s += tokens[i];
  }
  return s;
}

bool exact_match(const std::string& prediction, const QAExample& ex) {
  const std::string p = normalize_answer(prediction);
  return p == normalize_answer(join_tokens(ex.answers[0])) || p == normalize_answer(join_tokens(ex.answers[1]));
}

Evaluation evaluate(const IalCpgModel& model, const std::vector<const QAExample*>& examples,
                    const std::map<std::string, ContextWindow>& windows, std::size_t max_answer_len) {
  Evaluation ev;
  std::vector<std::string> hyps;
  std::vector<ReferencePair> refs;
  for (const QAExample* ex : examples) {
    auto it = windows.find(ex->example_id);
    if (it == windows.end()) throw DataError("no context window for example '" + ex->example_id + "'");
    Prediction pred;
    pred.example_id = ex->example_id;
    pred.decode = model.decode(it->second.tokens, ex->question, max_answer_len);
    pred.answer = join_tokens(pred.decode.tokens);
    if (exact_match(pred.answer, *ex)) ++ev.exact;
    hyps.push_back(pred.answer);
    refs.push_back({join_tokens(ex->answers[0]), join_tokens(ex->answers[1])});
    ev.predictions.push_back(std::move(pred));
  }
  ev.report = score_all(hyps, refs);
  return ev;
}

ModelConfig model_config(const TrainConfig& cfg) {
  ModelConfig m;
  m.d = cfg.d;
  m.n = cfg.n;
  m.e = cfg.e;
  m.embed_stddev = cfg.embed_stddev;
  m.ial.band = cfg.band;
  m.ial.dense_attention = cfg.dense_attention;
  m.ial.ial_off = cfg.ial_off;
  m.ial.enhancement_off = cfg.enhancement_off;
  m.ial.activation = cfg.activation;
  m.pg_off = cfg.pg_off;
  m.seed = cfg.seed;
  return m;
}

std::string EpochRecord::to_json() const {
  nlohmann::json j;
  j["epoch"] = epoch;
  j["loss"] = loss;
  j["targets"] = targets;
  j["dev"] = nlohmann::json::parse(dev.to_json());
  j["action"] = action;
  j["active_chunk_size"] = active_k;
  j["swap_count"] = swap_count;
  j["swapped"] = swapped;
  return j.dump();
}

TrainingData prepare(const TrainConfig& cfg, const Dataset& dataset, const StopwordSet& stopwords) {
  cfg.validate();
  TrainingData data;
  data.train = dataset.by_split(Split::kTrain);
  data.dev = dataset.by_split(Split::kDev);
  if (data.train.empty()) throw DataError("dataset has no train examples");
  if (data.dev.empty()) throw DataError("dataset has no dev examples");

  const auto docs = vocab_documents(dataset, data.train);
  data.input_vocab = build_vocab(docs, 1);
  data.gen_vocab = build_vocab(docs, cfg.min_stories);

  RetrievalConfig rc;
  rc.max_context = cfg.max_context;
  rc.top_k = cfg.top_k;
  data.sets = build_sets(dataset, data.train, rc, cfg.chunk_sizes, stopwords);
  for (std::size_t k : cfg.chunk_sizes) data.dev_windows[k] = question_windows(dataset, data.dev, rc, k, stopwords);
  return data;
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::trunc);
  if (!os) throw DataError("cannot write " + p.string());
  os << text;
}

std::string checkpoint_name(std::size_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch-%04zu.ckpt", epoch);
  return buf;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const Dataset& dataset, const StopwordSet& stopwords,
                  const TrainOptions& options) {
  TrainingData data = prepare(cfg, dataset, stopwords);

  TrainResult result;
  result.model = std::make_unique<IalCpgModel>(model_config(cfg), data.input_vocab, data.gen_vocab);
  IalCpgModel& model = *result.model;
  if (!cfg.embedding_file.empty()) {
    ag::Tensor table = model.embeddings();
    load_embedding_file(cfg.embedding_file, model.input_vocab(), table);
  }

  std::vector<std::string> ids;
  for (const QAExample* ex : data.train) ids.push_back(ex->example_id);
  CurriculumState state = init_state(cfg.chunk_sizes, cfg.delta, cfg.seed, ids, cfg.curriculum_mode, cfg.chunk_order);

  const std::filesystem::path out = cfg.out_dir;
  std::ofstream log;
  if (options.write_files) {
    std::filesystem::create_directories(out / "checkpoints");
    write_text(out / "config.txt", cfg.to_text());
    model.input_vocab().save(out / "vocab.input.txt");
    model.gen_vocab().save(out / "vocab.gen.txt");
    save_checkpoint(model.params(), out / "checkpoints" / checkpoint_name(0));
    save_checkpoint(model.params(), out / "model.ckpt");
    state.save(out / "curriculum.json");
    log.open(out / "train_log.jsonl", std::ios::trunc);
    if (!log) throw DataError("cannot write training log in " + out.string());
  }

  AdadeltaState opt;
  opt.learning_rate = cfg.learning_rate;
  std::map<std::string, const QAExample*> by_id;
  for (const QAExample* ex : data.train) by_id[ex->example_id] = ex;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto windows = current_training_set(state, data.sets.at(state.active_k));
    std::vector<std::string> order;
    for (const auto& kv : windows) order.push_back(kv.first);
    std::mt19937_64 shuffle_rng(cfg.seed * 1000003ULL + epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    std::size_t targets = 0;
    for (const auto& id : order) {
      const QAExample& ex = *by_id.at(id);
      const TokenSeq& context = windows.at(id).tokens;
      for (const TokenSeq& answer : ex.answers) {
        const auto labels =
            training_targets(context, answer, model.gen_vocab(), stopwords, cfg.max_answer_len, cfg.pg_off);
        if (std::all_of(labels.begin(), labels.end(),
                        [](const GoldLabel& l) { return l.kind == GoldLabel::Kind::kIgnored; }))
          continue;
        const auto enc = model.encode(context, ex.question);
        const auto dists = model.teacher_forced(enc, answer, labels.size());
        const ag::Tensor loss = step_loss(dists, labels, &model.params(), cfg.l2);
        const double v = loss.item();
        if (!std::isfinite(v)) {
          throw NumericError("non-finite loss " + std::to_string(v) + " at epoch " + std::to_string(epoch) +
                             ", example '" + id + "'");
        }
        model.params().zero_grad();
        ag::backward(loss);
        adadelta_update(model.params(), opt);
        loss_sum += v;
        ++targets;
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = targets ? loss_sum / static_cast<double>(targets) : 0.0;
    rec.targets = targets;
    rec.dev = evaluate(model, data.dev, data.dev_windows.at(state.active_k), cfg.max_answer_len).report;
    rec.action = action_name(on_epoch_end(state, rec.dev.rouge_l));
    rec.active_k = state.active_k;
    rec.swap_count = state.swap_count;
    rec.swapped = state.swapped_ids.size();
    result.log.push_back(rec);

    if (options.write_files) {
      log << rec.to_json() << '\n' << std::flush;
      save_checkpoint(model.params(), out / "checkpoints" / checkpoint_name(epoch));
      save_checkpoint(model.params(), out / "model.ckpt");
      state.save(out / "curriculum.json");
      write_text(out / "manifest.json", training_manifest_json(state));
    }
    if (options.on_epoch && options.on_epoch(rec, model)) break;
  }
  result.curriculum = std::move(state);
  return result;
}

std::unique_ptr<IalCpgModel> load_run(const std::filesystem::path& dir, TrainConfig* cfg_out,
                                      const std::string& checkpoint) {
  const TrainConfig cfg = load_config(dir / "config.txt");
  auto model = std::make_unique<IalCpgModel>(model_config(cfg), Vocab::load(dir / "vocab.input.txt"),
                                             Vocab::load(dir / "vocab.gen.txt"));
  load_checkpoint(model->params(), checkpoint.empty() ? dir / "model.ckpt" : std::filesystem::path(checkpoint));
  if (cfg_out) *cfg_out = cfg;
  return model;
}

}  // namespace ialcpg
