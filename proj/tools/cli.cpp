#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "emojichat/bundle.hpp"
#include "emojichat/config.hpp"
#include "emojichat/corpus.hpp"
#include "emojichat/error.hpp"
#include "emojichat/eval.hpp"
#include "emojichat/presets.hpp"
#include "emojichat/service.hpp"
#include "emojichat/unicode.hpp"
#include "http_api.hpp"

// After Eigen: <resolv.h> defines a _res macro.
#include <httplib.h>

namespace emojichat::cli {

namespace fs = std::filesystem;

namespace {

// Raised for problems the caller can fix on the command line.
struct UsageError : Error {
  using Error::Error;
};

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

template <typename T>
void override_if(const CLI::Option* opt, const T& value, T& target) {
  if (opt->count() > 0) target = value;
}

AppConfig load_config(const std::string& path) {
  if (path.empty()) return AppConfig{};
  if (!fs::exists(path)) throw UsageError("config file not found: " + path);
  try {
    return AppConfig::load(path);
  } catch (const Error& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  }
}

fs::path require_path(const fs::path& p, const char* flag) {
  if (p.empty()) throw UsageError(std::string("no path given; pass ") + flag + " or set it in the config file");
  return p;
}

std::vector<std::string> corpus_labels(const AppConfig& cfg, std::span<const Conversation> convs) {
  if (!cfg.labels.empty()) return cfg.labels;
  std::set<std::string> seen;
  for (const auto& c : convs) seen.insert(c.emotion);
  return {seen.begin(), seen.end()};
}

void write_split(const fs::path& path, std::span<const Conversation> convs) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_corpus(out, convs);
}

struct Common {
  std::string config;
  CLI::App* cmd = nullptr;
};

// ---- train-retriever ----------------------------------------------------

struct TrainRetrieverArgs {
  Common common;
  std::string corpus, out, preset;
  std::uint64_t seed = 0;
  std::size_t epochs = 0, batch_size = 0, min_count = 0, max_len = 0;
  double lr = 0.0;
  bool print_config = false;
  CLI::Option *o_corpus, *o_out, *o_preset, *o_seed, *o_epochs, *o_batch, *o_lr, *o_min_count, *o_max_len;
};

int train_retriever_cmd(const TrainRetrieverArgs& a, std::ostream& out) {
  AppConfig cfg = load_config(a.common.config);
  fs::path corpus_path = cfg.corpus, bundle_path = cfg.bundle;
  if (a.o_corpus->count()) corpus_path = a.corpus;
  if (a.o_out->count()) bundle_path = a.out;
  override_if(a.o_preset, a.preset, cfg.retriever_preset);
  override_if(a.o_seed, a.seed, cfg.seed);
  override_if(a.o_min_count, a.min_count, cfg.min_count);
  override_if(a.o_max_len, a.max_len, cfg.max_len);

  RetrieverPreset preset;
  try {
    preset = retriever_preset(cfg.retriever_preset);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  override_if(a.o_epochs, a.epochs, preset.train.epochs);
  override_if(a.o_batch, a.batch_size, preset.train.batch_size);
  override_if(a.o_lr, a.lr, preset.train.learning_rate);
  preset.train.seed = cfg.seed;
  preset.encoder.max_len = cfg.max_len;
  preset.encoder.seed = cfg.seed;

  const nlohmann::json resolved{{"preset", preset.name},
                                {"encoder", preset.encoder.to_json()},
                                {"train", preset.train.to_json()},
                                {"split", {kRetrievalSplit.train, kRetrievalSplit.validation, kRetrievalSplit.test}},
                                {"min_count", cfg.min_count}};
  if (a.print_config) {
    out << resolved.dump(2) << '\n';
    return kExitOk;
  }
  require_path(corpus_path, "--corpus");
  require_path(bundle_path, "--out");

  const auto convs = load_corpus(corpus_path);
  const DatasetSplit split = split_dataset(convs.size(), kRetrievalSplit, cfg.seed);
  const auto train = select<Conversation>(convs, split.train);
  const auto validation = select<Conversation>(convs, split.validation);
  const auto test = select<Conversation>(convs, split.test);
  const auto train_pairs = derive_pairs(train);
  if (train_pairs.size() < 2) throw Error("training split yields fewer than two pairs");

  Vocabulary vocab = build_retrieval_vocabulary(train_pairs, cfg.min_count);
  EncoderConfig ctx_cfg = preset.encoder;
  ctx_cfg.vocab_size = vocab.size();
  ctx_cfg.seed = cfg.seed;
  EncoderConfig cand_cfg = ctx_cfg;
  cand_cfg.seed = cfg.seed + 1;
  RetrievalModel model(init_params(ctx_cfg), init_params(cand_cfg), std::move(vocab));

  out << "training " << preset.name << " retriever on " << train_pairs.size() << " pairs ("
      << train.size() << '/' << validation.size() << '/' << test.size() << " conversations)\n";
  auto result = train_retriever(train_pairs, std::move(model), preset.train, [&](std::size_t epoch, double loss) {
    out << "epoch " << epoch << " loss " << fmt(loss) << '\n';
  });

  nlohmann::json meta = resolved;
  meta["seed"] = cfg.seed;
  meta["epoch_losses"] = result.epoch_losses;
  meta["split_sizes"] = {train.size(), validation.size(), test.size()};
  save_retrieval_bundle(bundle_path, result.model, meta);
  write_split(bundle_path / "train.jsonl", train);
  write_split(bundle_path / "validation.jsonl", validation);
  write_split(bundle_path / "test.jsonl", test);
  out << "wrote bundle to " << bundle_path.string() << '\n';
  return kExitOk;
}

// ---- train-classifier ---------------------------------------------------

struct TrainClassifierArgs {
  Common common;
  std::string corpus, out, word_vectors;
  std::uint64_t seed = 0;
  std::size_t epochs = 0, batch_size = 0;
  double lr = 0.0;
  bool print_config = false;
  CLI::Option *o_corpus, *o_out, *o_vectors, *o_seed, *o_epochs, *o_batch, *o_lr;
};

std::vector<LabeledText> labeled(std::span<const Conversation> convs) {
  std::vector<LabeledText> data;
  data.reserve(convs.size());
  for (const auto& c : convs) data.push_back({c.context, c.emotion});
  return data;
}

ClassificationMetrics score_classifier(const EmotionClassifier& clf, std::span<const Conversation> convs) {
  std::vector<std::string> preds, golds;
  for (const auto& c : convs) {
    preds.push_back(clf.predict(c.context).label);
    golds.push_back(c.emotion);
  }
  return classification_metrics(preds, golds, clf.labels());
}

nlohmann::json metrics_json(const ClassificationMetrics& m) {
  return {{"micro_accuracy", m.micro_accuracy}, {"macro_accuracy", m.macro_accuracy}, {"macro_f1", m.macro_f1}};
}

int train_classifier_cmd(const TrainClassifierArgs& a, std::ostream& out) {
  AppConfig cfg = load_config(a.common.config);
  fs::path corpus_path = cfg.corpus, out_path = cfg.classifier, vectors_path = cfg.word_vectors;
  if (a.o_corpus->count()) corpus_path = a.corpus;
  if (a.o_out->count()) out_path = a.out;
  if (a.o_vectors->count()) vectors_path = a.word_vectors;
  override_if(a.o_seed, a.seed, cfg.seed);

  CnnConfig recipe = classifier_recipe();
  override_if(a.o_epochs, a.epochs, recipe.epochs);
  override_if(a.o_batch, a.batch_size, recipe.batch_size);
  override_if(a.o_lr, a.lr, recipe.learning_rate);
  recipe.seed = cfg.seed;
  recipe.max_len = cfg.max_len;

  nlohmann::json resolved{
      {"cnn", recipe.to_json()},
      {"optimizer", "adam"},
      {"split", {kClassifierSplit.train, kClassifierSplit.validation, kClassifierSplit.test}}};
  if (a.print_config) {
    out << resolved.dump(2) << '\n';
    return kExitOk;
  }
  require_path(corpus_path, "--corpus");
  require_path(out_path, "--out");
  require_path(vectors_path, "--word-vectors");

  const auto convs = load_corpus(corpus_path);
  const auto labels = corpus_labels(cfg, convs);
  recipe.num_classes = labels.size();
  const WordVectorTable table = load_word_vectors(vectors_path);

  const DatasetSplit split = split_dataset(convs.size(), kClassifierSplit, cfg.seed);
  const auto train = select<Conversation>(convs, split.train);
  const auto validation = select<Conversation>(convs, split.validation);
  const auto test = select<Conversation>(convs, split.test);

  out << "training emotion classifier on " << train.size() << " contexts, " << labels.size() << " labels\n";
  auto result = train_classifier(labeled(train), labels, table, recipe);
  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
    out << "epoch " << e + 1 << " loss " << fmt(result.epoch_losses[e]) << '\n';
  }

  const auto val_metrics = score_classifier(result.classifier, validation);
  const auto test_metrics = score_classifier(result.classifier, test);
  out << "validation macro-F1 " << fmt(val_metrics.macro_f1) << ", test macro-F1 " << fmt(test_metrics.macro_f1)
      << '\n';

  resolved["seed"] = cfg.seed;
  resolved["epoch_losses"] = result.epoch_losses;
  resolved["split_sizes"] = {train.size(), validation.size(), test.size()};
  resolved["validation"] = metrics_json(val_metrics);
  resolved["test"] = metrics_json(test_metrics);
  save_classifier(out_path, result.classifier, resolved);
  write_split(out_path / "test.jsonl", test);
  out << "wrote classifier to " << out_path.string() << '\n';
  return kExitOk;
}

// ---- eval ---------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string bundle, test, report, classifier;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  CLI::Option *o_bundle, *o_test, *o_seed, *o_n, *o_classifier;
};

int eval_cmd(const EvalArgs& a, std::ostream& out) {
  AppConfig cfg = load_config(a.common.config);
  fs::path bundle_path = cfg.bundle, classifier_path;
  if (a.o_bundle->count()) bundle_path = a.bundle;
  if (a.o_classifier->count()) classifier_path = a.classifier;
  override_if(a.o_seed, a.seed, cfg.seed);
  override_if(a.o_n, a.n, cfg.p_at_n);
  require_path(bundle_path, "--bundle");
  if (a.test.empty()) throw UsageError("--test is required");
  if (cfg.p_at_n < 2) throw UsageError("--n must be at least 2");

  const auto bundle = load_retrieval_bundle(bundle_path);
  const auto convs = load_corpus(a.test);
  const auto pairs = derive_pairs(convs);
  if (pairs.empty()) throw Error("test corpus yields no context-response pairs");

  MetricReport report;
  report.mean_bleu = mean_retrieval_bleu(bundle.model, pairs);
  report.bleu_samples = pairs.size();
  report.p_at_1 = precision_at_1_of_n(bundle.model, pairs, cfg.p_at_n, cfg.seed);
  report.p_at_1_n = cfg.p_at_n;
  report.p_at_1_samples = pairs.size();
  if (!classifier_path.empty()) {
    const auto clf = load_classifier(classifier_path);
    report.classification = score_classifier(clf, convs);
    report.classification_samples = convs.size();
  }

  out << report.to_text();
  if (!a.report.empty()) {
    std::ofstream file(a.report);
    if (!file) throw Error("cannot write report to " + a.report);
    file << report.to_json().dump(2) << '\n';
  }
  return kExitOk;
}

// ---- chat / serve -------------------------------------------------------

struct ArtifactArgs {
  Common common;
  std::string bundle, classifier, word_vectors, emoji_map;
  double threshold = 0.0;
  CLI::Option *o_bundle, *o_classifier, *o_vectors, *o_map, *o_threshold;

  void add_to(CLI::App* cmd) {
    o_bundle = cmd->add_option("--bundle", bundle, "Retrieval bundle directory");
    o_classifier = cmd->add_option("--classifier", classifier, "Classifier directory");
    o_vectors = cmd->add_option("--word-vectors", word_vectors, "Word-vector text file");
    o_map = cmd->add_option("--emoji-map", emoji_map, "Emoji map file");
    o_threshold = cmd->add_option("--threshold", threshold, "Minimum cosine similarity for an emoji");
  }

  AppConfig resolve() const {
    AppConfig cfg = load_config(common.config);
    if (o_bundle->count()) cfg.bundle = bundle;
    if (o_classifier->count()) cfg.classifier = classifier;
    if (o_vectors->count()) cfg.word_vectors = word_vectors;
    if (o_map->count()) cfg.emoji_map = emoji_map;
    override_if(o_threshold, threshold, cfg.threshold);
    try {
      cfg.validate();
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

int chat_cmd(const ArtifactArgs& a, std::istream& in, std::ostream& out) {
  const AppConfig cfg = a.resolve();
  auto service = std::make_shared<ChatService>(Pipeline::load(cfg), std::make_shared<SessionStore>());
  const std::string session = "terminal";
  out << "bundle " << service->bundle_version() << "; type /quit to leave\n";
  std::string line;
  while (std::getline(in, line)) {
    const auto text = unicode::trim(line);
    if (text.empty()) continue;
    if (text == "/quit") break;
    const auto reply = service->handle_chat(session, text);
    const ChatResponse& r = reply.response;
    out << "bot: " << r.display_text << "  [emotion " << r.emotion << ", similarity " << fmt(r.similarity)
        << ", p " << fmt(r.retrieval_probability) << "]\n";
  }
  return kExitOk;
}

struct ServeArgs {
  ArtifactArgs artifacts;
  std::string host = "127.0.0.1";
  int port = 0;
  CLI::Option* o_port = nullptr;
};

int serve_cmd(const ServeArgs& a, std::ostream& out, std::ostream& err) {
  const AppConfig cfg = a.artifacts.resolve();
  std::uint16_t port = 0;
  try {
    port = a.o_port->count() ? static_cast<std::uint16_t>(a.port) : http::port_from_env(std::getenv("EMOJICHAT_PORT"));
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }

  std::shared_ptr<const Pipeline> pipeline;
  try {
    pipeline = Pipeline::load(cfg);
  } catch (const ServiceUnavailable& e) {
    err << "warning: serving without a model: " << e.what() << '\n';
  }
  std::optional<fs::path> log_dir;
  if (!cfg.sessions_dir.empty()) log_dir = cfg.sessions_dir;
  auto service = std::make_shared<ChatService>(pipeline, std::make_shared<SessionStore>(log_dir));
  http::Api api(service);

  httplib::Server server;
  std::optional<fs::path> static_dir;
  if (!cfg.static_dir.empty()) static_dir = cfg.static_dir;
  http::mount(server, api, static_dir);
  out << "listening on http://" << a.host << ':' << port << '\n' << std::flush;
  if (!server.listen(a.host, port)) throw Error("cannot listen on " + a.host + ':' + std::to_string(port));
  return kExitOk;
}

void add_config_option(CLI::App* cmd, Common& c) {
  c.cmd = cmd;
  cmd->add_option("--config", c.config, "JSON configuration file");
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Retrieval chatbot that appends an emotion-matched emoji", "emojichat"};
  app.require_subcommand(1);

  TrainRetrieverArgs tr;
  auto* tr_cmd = app.add_subcommand("train-retriever", "Train the bi-encoder retriever and write a bundle");
  add_config_option(tr_cmd, tr.common);
  tr.o_corpus = tr_cmd->add_option("--corpus", tr.corpus, "Conversation corpus (JSON lines)");
  tr.o_out = tr_cmd->add_option("--out", tr.out, "Bundle output directory");
  tr.o_preset = tr_cmd->add_option("--preset", tr.preset, "bert | vanilla | tiny | bag");
  tr.o_seed = tr_cmd->add_option("--seed", tr.seed);
  tr.o_epochs = tr_cmd->add_option("--epochs", tr.epochs);
  tr.o_batch = tr_cmd->add_option("--batch-size", tr.batch_size);
  tr.o_lr = tr_cmd->add_option("--lr", tr.lr);
  tr.o_min_count = tr_cmd->add_option("--min-count", tr.min_count);
  tr.o_max_len = tr_cmd->add_option("--max-len", tr.max_len);
  tr_cmd->add_flag("--print-config", tr.print_config, "Print the resolved settings and exit");

  TrainClassifierArgs tc;
  auto* tc_cmd = app.add_subcommand("train-classifier", "Train the CNN emotion classifier on conversation contexts");
  add_config_option(tc_cmd, tc.common);
  tc.o_corpus = tc_cmd->add_option("--corpus", tc.corpus);
  tc.o_out = tc_cmd->add_option("--out", tc.out, "Classifier output directory");
  tc.o_vectors = tc_cmd->add_option("--word-vectors", tc.word_vectors);
  tc.o_seed = tc_cmd->add_option("--seed", tc.seed);
  tc.o_epochs = tc_cmd->add_option("--epochs", tc.epochs);
  tc.o_batch = tc_cmd->add_option("--batch-size", tc.batch_size);
  tc.o_lr = tc_cmd->add_option("--lr", tc.lr);
  tc_cmd->add_flag("--print-config", tc.print_config, "Print the resolved settings and exit");

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "Score a bundle on a test corpus");
  add_config_option(ev_cmd, ev.common);
  ev.o_bundle = ev_cmd->add_option("--bundle", ev.bundle);
  ev.o_test = ev_cmd->add_option("--test", ev.test, "Test corpus (JSON lines)");
  ev.o_seed = ev_cmd->add_option("--seed", ev.seed, "Distractor sampling seed");
  ev.o_n = ev_cmd->add_option("--n", ev.n, "Candidates per P@1 set");
  ev_cmd->add_option("--report", ev.report, "Write the JSON report here");
  ev.o_classifier = ev_cmd->add_option("--classifier", ev.classifier, "Also score this classifier on contexts");

  ArtifactArgs ch;
  auto* ch_cmd = app.add_subcommand("chat", "Chat in the terminal");
  add_config_option(ch_cmd, ch.common);
  ch.add_to(ch_cmd);

  ServeArgs sv;
  auto* sv_cmd = app.add_subcommand("serve", "Serve the HTTP API and the web client");
  add_config_option(sv_cmd, sv.artifacts.common);
  sv.artifacts.add_to(sv_cmd);
  sv_cmd->add_option("--host", sv.host);
  sv.o_port = sv_cmd->add_option("--port", sv.port, "Overrides EMOJICHAT_PORT")->check(CLI::Range(1, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (tr_cmd->parsed()) return train_retriever_cmd(tr, out);
    if (tc_cmd->parsed()) return train_classifier_cmd(tc, out);
    if (ev_cmd->parsed()) return eval_cmd(ev, out);
    if (ch_cmd->parsed()) return chat_cmd(ch, in, out);
    if (sv_cmd->parsed()) return serve_cmd(sv, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace emojichat::cli
