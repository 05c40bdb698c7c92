// clinx: clinical event extraction over raw notes.
//
// Subcommands: tokenize, train-tagger, train, extract, baseline, evaluate,
// synth. Exit codes: 0 success, 2 I/O error, 3 config error, 4 data error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "clinx/corpus.hpp"
#include "clinx/errors.hpp"
#include "clinx/eval.hpp"
#include "clinx/kernels.hpp"
#include "clinx/manifest.hpp"
#include "clinx/pipeline.hpp"
#include "clinx/serialize.hpp"
#include "clinx/synthetic.hpp"
#include "clinx/tagger.hpp"
#include "clinx/training.hpp"

namespace fs = std::filesystem;
using namespace clinx;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string config_path;
  bool quiet = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading file: " + path);
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw IoError("error writing file: " + path);
}

std::string hash_hex(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  std::int64_t elapsed_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::map<std::string, std::string> config_snapshot(const TrainConfig& cfg) {
  auto d = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  return {
      {"learning_rate", d(cfg.learning_rate)},
      {"batch_size", std::to_string(cfg.batch_size)},
      {"l2", d(cfg.l2)},
      {"epochs", std::to_string(cfg.epochs)},
      {"window", std::to_string(cfg.window)},
      {"keep_prob", d(cfg.keep_prob)},
      {"norm_cap", d(cfg.norm_cap)},
      {"adagrad_eps", d(cfg.adagrad_eps)},
      {"seed", std::to_string(cfg.seed)},
      {"patience", std::to_string(cfg.patience)},
      {"class_weighting", cfg.class_weighting ? "on" : "off"},
      {"kernel_width", std::to_string(cfg.kernel_width)},
      {"filters", std::to_string(cfg.filters)},
      {"hidden", std::to_string(cfg.hidden)},
      {"token_dim", std::to_string(cfg.token_dim)},
      {"pos_dim", std::to_string(cfg.pos_dim)},
      {"shape_dim", std::to_string(cfg.shape_dim)},
      {"sequence_length", std::to_string(2 * cfg.window + 1)},
  };
}

AnnotationMap load_annotation_map(const std::string& ann_dir,
                                  const std::vector<Document>& docs) {
  AnnotationMap map;
  for (const Document& doc : docs) {
    const fs::path path = fs::path(ann_dir) / (doc.id + ".ann.xml");
    if (!fs::exists(path)) {
      throw DataError("missing annotation file: " + path.string());
    }
    map[doc.id] = parse_annotations(read_file(path.string()), doc);
  }
  return map;
}

int cmd_tokenize(const std::string& path) {
  const Document doc = load_document(path);
  TokenSequence seq = tokenize(doc.text, doc.id);
  shape_tokens(seq);
  for (const Token& t : seq.tokens) {
    std::cout << t.begin << '\t' << t.end << '\t' << t.surface << '\t'
              << t.shape << '\n';
  }
  return 0;
}

int cmd_train_tagger(const GlobalOpts& g, const std::string& input,
                     const std::string& out_path, int epochs) {
  Timer timer;
  const auto sentences = parse_tagged_corpus(read_file(input));
  const std::uint64_t seed = g.seed_set ? g.seed : 1;
  TaggerModel tagger = train_tagger(sentences, epochs, seed);

  // tagger ships inside a model container; network sections hold a minimal
  // placeholder model so the file is self-describing
  Vocabularies vocabs;
  vocabs.token.add("<s>");
  vocabs.pos.add("<s>");
  vocabs.shape.add("x");
  Hyperparams hp;
  hp.window = 1;
  hp.kernel_width = 1;
  hp.filters = 1;
  hp.hidden = 1;
  hp.token_dim = 1;
  hp.pos_dim = 1;
  hp.shape_dim = 1;
  ModelBundle bundle = init_model("tagger", {"<none>", "<none2>"}, hp,
                                  std::move(vocabs), seed);
  bundle.tagger = std::move(tagger);
  quantize_to_f32(bundle);
  const std::string bytes = save_model(bundle);
  write_file(out_path, bytes);

  RunManifest manifest;
  manifest.command = "train-tagger";
  manifest.seed = seed;
  manifest.config = {{"epochs", std::to_string(epochs)}};
  manifest.inputs = {input};
  manifest.outputs = {out_path};
  manifest.model_hashes[out_path] = hash_hex(bytes);
  manifest.kernel_backend = kernels::active_backend();
  manifest.elapsed_ms = timer.elapsed_ms();
  write_manifest(manifest, out_path + ".manifest.json");

  if (!g.quiet) {
    std::cerr << "trained tagger on " << sentences.size() << " sentences, "
              << bundle.tagger->tags.size() << " tags\n";
  }
  return 0;
}

int cmd_train(const GlobalOpts& g, const std::string& task_name_arg,
              const std::string& train_dir, const std::string& dev_dir,
              const std::string& tagger_path,
              const std::string& embeddings_path,
              const std::string& out_path) {
  Timer timer;
  TrainConfig cfg;
  if (!g.config_path.empty()) cfg = load_config_file(g.config_path);
  if (g.seed_set) cfg.seed = g.seed;
  cfg.validate();

  const Task task = task_from_name(task_name_arg);
  const LabelScheme scheme = default_label_scheme(task);

  const ModelBundle tagger_bundle = load_model_file(tagger_path);
  if (!tagger_bundle.tagger) {
    throw DataError("model file carries no tagger section: " + tagger_path);
  }
  const TaggerModel& tagger = *tagger_bundle.tagger;

  const auto corpus =
      load_labeled_corpus((fs::path(train_dir) / "text").string(),
                          (fs::path(train_dir) / "ann").string());

  std::vector<TokenSequence> sequences;
  sequences.reserve(corpus.size());
  for (const LabeledDocument& ld : corpus) {
    sequences.push_back(preprocess(ld.doc, tagger));
  }
  Vocabularies vocabs = build_vocabularies(sequences);

  ModelBundle model = init_model(task_name(task), scheme.classes,
                                 cfg.hyperparams(), std::move(vocabs),
                                 cfg.seed);
  model.tagger = tagger;

  if (!embeddings_path.empty()) {
    std::ifstream stream(embeddings_path, std::ios::binary);
    if (!stream) throw IoError("cannot open embeddings: " + embeddings_path);
    const std::size_t loaded =
        load_pretrained(stream, model.vocabs.token, model.tables.token);
    if (!g.quiet) {
      std::cerr << "loaded " << loaded << " pretrained vectors\n";
    }
  }

  const auto instances =
      build_task_instances(task, corpus, model.vocabs, model.labels, tagger,
                           cfg.window);
  if (instances.empty()) {
    throw DataError("no training instances for task " + task_name(task));
  }

  DevMetricFn dev_metric;
  std::vector<LabeledDocument> dev_corpus;
  if (!dev_dir.empty()) {
    dev_corpus = load_labeled_corpus((fs::path(dev_dir) / "text").string(),
                                     (fs::path(dev_dir) / "ann").string());
    dev_metric = [&, task](const ModelBundle& m) {
      AnnotationMap sys, gold;
      for (const LabeledDocument& ld : dev_corpus) {
        gold[ld.doc.id] = ld.gold;
        ModelSet set;
        set.models.emplace(task, m);
        ExtractOptions opts;
        if (task == Task::Span) {
          opts.mode = ExtractMode::SystemSpans;
          opts.tasks = {};
        } else {
          opts.mode = ExtractMode::GoldSpans;
          opts.tasks = {task};
          opts.gold = &ld.gold;
        }
        sys[ld.doc.id] = extract(set, ld.doc, opts);
      }
      return evaluate(sys, gold, task).f1;
    };
  }

  const TrainLog log = train(model, instances, cfg, dev_metric);
  quantize_to_f32(model);
  const std::string bytes = save_model(model);
  write_file(out_path, bytes);

  RunManifest manifest;
  manifest.command = "train";
  manifest.seed = cfg.seed;
  manifest.config = config_snapshot(cfg);
  manifest.config["task"] = task_name(task);
  manifest.inputs = {train_dir, tagger_path};
  if (!dev_dir.empty()) manifest.inputs.push_back(dev_dir);
  if (!embeddings_path.empty()) manifest.inputs.push_back(embeddings_path);
  manifest.outputs = {out_path};
  manifest.model_hashes[out_path] = hash_hex(bytes);
  manifest.kernel_backend = kernels::active_backend();
  manifest.elapsed_ms = timer.elapsed_ms();
  {
    std::ostringstream metrics;
    for (std::size_t e = 0; e < log.epoch_loss.size(); ++e) {
      metrics << "epoch\t" << e << "\tloss\t" << log.epoch_loss[e];
      if (e < log.dev_metric.size()) {
        metrics << "\tdev_f1\t" << log.dev_metric[e];
      }
      metrics << "\n";
    }
    manifest.metrics = metrics.str();
  }
  write_manifest(manifest, out_path + ".manifest.json");

  if (!g.quiet) {
    for (std::size_t e = 0; e < log.epoch_loss.size(); ++e) {
      std::cerr << "epoch " << e << " loss " << log.epoch_loss[e];
      if (e < log.dev_metric.size()) {
        std::cerr << " dev_f1 " << log.dev_metric[e];
      }
      std::cerr << "\n";
    }
  }
  return 0;
}

ModelSet load_model_set(const std::string& models_dir,
                        const std::vector<Task>& tasks) {
  ModelSet set;
  for (Task t : tasks) {
    const fs::path path = fs::path(models_dir) / (task_name(t) + ".clnx");
    if (!fs::exists(path)) continue;
    set.models.emplace(t, load_model_file(path.string()));
  }
  return set;
}

int cmd_extract(const GlobalOpts& g, const std::string& models_dir,
                const std::string& input_dir, const std::string& out_dir,
                const std::string& gold_dir, const std::string& tasks_arg) {
  Timer timer;
  std::vector<Task> tasks;
  if (tasks_arg.empty()) {
    for (Task t : all_tasks()) {
      if (fs::exists(fs::path(models_dir) / (task_name(t) + ".clnx"))) {
        tasks.push_back(t);
      }
    }
  } else {
    std::istringstream in(tasks_arg);
    std::string name;
    while (std::getline(in, name, ',')) tasks.push_back(task_from_name(name));
  }

  const ModelSet models = load_model_set(models_dir, tasks);
  for (Task t : tasks) models.require(t);
  const bool gold_mode = !gold_dir.empty();
  if (!gold_mode && std::find(tasks.begin(), tasks.end(), Task::Span) ==
                        tasks.end()) {
    throw DataError("system-spans extraction requires a span model");
  }

  const std::vector<Document> docs = load_documents(input_dir);
  fs::create_directories(out_dir);

  std::size_t total_events = 0;
  for (const Document& doc : docs) {
    ExtractOptions opts;
    AnnotationSet gold;
    if (gold_mode) {
      const fs::path gold_path = fs::path(gold_dir) / (doc.id + ".ann.xml");
      if (!fs::exists(gold_path)) {
        throw DataError("missing gold annotations: " + gold_path.string());
      }
      gold = parse_annotations(read_file(gold_path.string()), doc);
      opts.mode = ExtractMode::GoldSpans;
      opts.gold = &gold;
      opts.tasks = tasks;
    } else {
      opts.mode = ExtractMode::SystemSpans;
      opts.tasks = tasks;
    }
    const AnnotationSet result = extract(models, doc, opts);
    total_events += result.events.size();
    write_file((fs::path(out_dir) / (doc.id + ".ann.xml")).string(),
               write_annotations(result, doc));
  }

  RunManifest manifest;
  manifest.command = "extract";
  manifest.seed = g.seed_set ? g.seed : 0;
  manifest.config["mode"] = gold_mode ? "gold-spans" : "system-spans";
  manifest.inputs = {models_dir, input_dir};
  if (gold_mode) manifest.inputs.push_back(gold_dir);
  manifest.outputs = {out_dir};
  for (Task t : tasks) {
    const fs::path p = fs::path(models_dir) / (task_name(t) + ".clnx");
    manifest.model_hashes[p.string()] = hash_hex(read_file(p.string()));
  }
  manifest.kernel_backend = kernels::active_backend();
  manifest.elapsed_ms = timer.elapsed_ms();
  write_manifest(manifest,
                 (fs::path(out_dir) / "run_manifest.json").string());

  if (!g.quiet) {
    std::cerr << "extracted " << total_events << " events from "
              << docs.size() << " documents\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& system_dir, const std::string& gold_dir,
                 const std::string& text_dir, const std::string& tasks_arg) {
  std::vector<Task> tasks;
  if (tasks_arg.empty()) {
    tasks = {Task::Span, Task::Modality, Task::Degree, Task::Polarity,
             Task::Type};
  } else {
    std::istringstream in(tasks_arg);
    std::string name;
    while (std::getline(in, name, ',')) tasks.push_back(task_from_name(name));
  }

  const std::vector<Document> docs = load_documents(text_dir);
  const AnnotationMap system = load_annotation_map(system_dir, docs);
  const AnnotationMap gold = load_annotation_map(gold_dir, docs);

  std::vector<MetricReport> reports;
  for (Task t : tasks) reports.push_back(evaluate(system, gold, t));

  std::cout << render_table(reports);
  std::cout << render_machine(reports);
  return 0;
}

int cmd_baseline(const GlobalOpts& g, const std::string& train_dir,
                 const std::string& input_dir, const std::string& out_dir) {
  Timer timer;
  const auto corpus =
      load_labeled_corpus((fs::path(train_dir) / "text").string(),
                          (fs::path(train_dir) / "ann").string());
  const MemorizeModel model = train_memorize(corpus);

  const std::vector<Document> docs = load_documents(input_dir);
  fs::create_directories(out_dir);
  for (const Document& doc : docs) {
    const AnnotationSet result = run_memorize(model, doc);
    write_file((fs::path(out_dir) / (doc.id + ".ann.xml")).string(),
               write_annotations(result, doc));
  }

  RunManifest manifest;
  manifest.command = "baseline";
  manifest.inputs = {train_dir, input_dir};
  manifest.outputs = {out_dir};
  manifest.kernel_backend = kernels::active_backend();
  manifest.elapsed_ms = timer.elapsed_ms();
  write_manifest(manifest,
                 (fs::path(out_dir) / "run_manifest.json").string());

  if (!g.quiet) {
    std::cerr << "memorize baseline over " << docs.size() << " documents\n";
  }
  return 0;
}

int cmd_synth(const GlobalOpts& g, const std::string& out_dir, int train_docs,
              int dev_docs, int test_docs, int sentences, double oov_rate) {
  Timer timer;
  GeneratorSpec spec;
  spec.seed = g.seed_set ? g.seed : 1;
  spec.train_docs = train_docs;
  spec.dev_docs = dev_docs;
  spec.test_docs = test_docs;
  spec.sentences_per_doc = sentences;
  spec.oov_rate = oov_rate;

  const SyntheticCorpus corpus = generate(spec);
  write_corpus(corpus, out_dir);

  RunManifest manifest;
  manifest.command = "synth";
  manifest.seed = spec.seed;
  manifest.config = {
      {"train_docs", std::to_string(train_docs)},
      {"dev_docs", std::to_string(dev_docs)},
      {"test_docs", std::to_string(test_docs)},
      {"sentences_per_doc", std::to_string(sentences)},
      {"oov_rate", std::to_string(oov_rate)},
      {"total_events", std::to_string(corpus.total_events())},
  };
  manifest.outputs = {out_dir};
  manifest.kernel_backend = kernels::active_backend();
  manifest.elapsed_ms = timer.elapsed_ms();
  write_manifest(manifest,
                 (fs::path(out_dir) / "run_manifest.json").string());

  if (!g.quiet) {
    std::cerr << "generated " << corpus.total_events() << " events across "
              << (train_docs + dev_docs + test_docs) << " documents\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clinical event span and attribute extraction"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "random seed override")
      ->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--config", g.config_path, "training config file");
  app.add_flag("--quiet", g.quiet, "suppress progress output");

  auto* tok = app.add_subcommand("tokenize", "print token spans and shapes");
  std::string tok_path;
  tok->add_option("file", tok_path, "UTF-8 text file")->required();

  auto* tt = app.add_subcommand("train-tagger", "train the POS tagger");
  std::string tt_input, tt_out;
  int tt_epochs = 5;
  tt->add_option("--input", tt_input, "word/TAG corpus, one sentence per line")
      ->required();
  tt->add_option("--out", tt_out, "output model path")->required();
  tt->add_option("--epochs", tt_epochs, "training epochs");

  auto* tr = app.add_subcommand("train", "train a task model");
  std::string tr_task, tr_train, tr_dev, tr_tagger, tr_emb, tr_out;
  tr->add_option("--task", tr_task,
                 "span|modality|degree|polarity|type|doctimerel")
      ->required();
  tr->add_option("--train", tr_train, "corpus dir with text/ and ann/")
      ->required();
  tr->add_option("--dev", tr_dev, "dev corpus dir for early stopping");
  tr->add_option("--tagger", tr_tagger, "tagger model file")->required();
  tr->add_option("--embeddings", tr_emb, "pretrained word vectors (text)");
  tr->add_option("--out", tr_out, "output model path")->required();

  auto* ex = app.add_subcommand("extract", "annotate raw documents");
  std::string ex_models, ex_input, ex_out, ex_gold, ex_tasks;
  ex->add_option("--models", ex_models, "dir with <task>.clnx files")
      ->required();
  ex->add_option("--input", ex_input, "dir with .txt documents")->required();
  ex->add_option("--out", ex_out, "output dir for .ann.xml files")
      ->required();
  ex->add_option("--gold-spans", ex_gold,
                 "gold annotation dir; classify attributes over gold spans");
  ex->add_option("--tasks", ex_tasks, "comma-separated task list");

  auto* ev = app.add_subcommand("evaluate", "score system vs gold");
  std::string ev_system, ev_gold, ev_text, ev_tasks;
  ev->add_option("--system", ev_system, "system annotation dir")->required();
  ev->add_option("--gold", ev_gold, "gold annotation dir")->required();
  ev->add_option("--text", ev_text, "document text dir")->required();
  ev->add_option("--tasks", ev_tasks, "comma-separated task list");

  auto* bl = app.add_subcommand("baseline", "memorize baseline");
  std::string bl_train, bl_input, bl_out;
  bl->add_option("--train", bl_train, "training corpus dir")->required();
  bl->add_option("--input", bl_input, "dir with .txt documents")->required();
  bl->add_option("--out", bl_out, "output annotation dir")->required();

  auto* sy = app.add_subcommand("synth", "generate a synthetic corpus");
  std::string sy_out;
  int sy_train = 60, sy_dev = 20, sy_test = 20, sy_sentences = 30;
  double sy_oov = 0.3;
  sy->add_option("--out", sy_out, "output corpus dir")->required();
  sy->add_option("--train-docs", sy_train, "training documents");
  sy->add_option("--dev-docs", sy_dev, "dev documents");
  sy->add_option("--test-docs", sy_test, "test documents");
  sy->add_option("--sentences-per-doc", sy_sentences, "sentences per doc");
  sy->add_option("--oov-rate", sy_oov, "test-only event word fraction");

  CLI11_PARSE(app, argc, argv);

  try {
    if (tok->parsed()) return cmd_tokenize(tok_path);
    if (tt->parsed()) return cmd_train_tagger(g, tt_input, tt_out, tt_epochs);
    if (tr->parsed()) {
      return cmd_train(g, tr_task, tr_train, tr_dev, tr_tagger, tr_emb,
                       tr_out);
    }
    if (ex->parsed()) {
      return cmd_extract(g, ex_models, ex_input, ex_out, ex_gold, ex_tasks);
    }
    if (ev->parsed()) return cmd_evaluate(ev_system, ev_gold, ev_text, ev_tasks);
    if (bl->parsed()) return cmd_baseline(g, bl_train, bl_input, bl_out);
    if (sy->parsed()) {
      return cmd_synth(g, sy_out, sy_train, sy_dev, sy_test, sy_sentences,
                       sy_oov);
    }
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
