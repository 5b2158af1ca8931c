// lexloop: command-line front end for the Mental/Physical active-learning workbench.

#include <algorithm>
#include <cctype>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lexloop/classifier.h"
#include "lexloop/engine.h"
#include "lexloop/error.h"
#include "lexloop/eval.h"
#include "lexloop/lexicon.h"
#include "lexloop/senticompare.h"
#include "lexloop/server.h"
#include "lexloop/session_store.h"
#include "lexloop/synthetic.h"

namespace fs = std::filesystem;
using namespace lexloop;

namespace {

const std::vector<std::string> kStrategies = {"entropy", "coreset", "cal", "random"};

struct DataFlags {
  std::string features;
  std::string lexicon;
  std::string vectors;
  std::string pool;
  std::string testset;

  void add(CLI::App* cmd, bool with_pool) {
    cmd->add_option("--features", features, "Vector file whose rows serve as features and embeddings");
    cmd->add_option("--lexicon", lexicon, "Gloss lexicon (word<TAB>pos<TAB>gloss)");
    cmd->add_option("--vectors", vectors, "Word vector file used to encode glosses");
    if (with_pool) cmd->add_option("--pool", pool, "Unlabeled pool word list");
    cmd->add_option("--testset", testset, "Held-out testset (word<TAB>label)");
  }

  DataSources sources() const {
    DataSources s;
    s.features = features;
    s.lexicon = lexicon;
    s.vectors = vectors;
    s.pool = pool;
    s.testset = testset;
    return s;
  }
};

struct LoopFlags {
  std::string strategy = "entropy";
  IterationConfig cfg;

  void add(CLI::App* cmd) {
    cmd->add_option("--strategy", strategy, "Acquisition strategy")->check(CLI::IsMember(kStrategies));
    cmd->add_option("--iterations,-T", cfg.iterations, "Iterations T")->capture_default_str();
    cmd->add_option("--k1", cfg.k1, "Mental quota per iteration")->capture_default_str();
    cmd->add_option("--k2", cfg.k2, "Physical quota per iteration")->capture_default_str();
    cmd->add_option("--max-annotations,-M", cfg.max_annotations, "Annotation cap per iteration")
        ->capture_default_str();
    cmd->add_option("--cal-k", cfg.strategy.cal_k, "CAL neighbor count")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "Session seed")->capture_default_str();
    cmd->add_flag("--warm-start", cfg.warm_start, "Retrain from the previous model");
    cmd->add_option("--epochs", cfg.train.epochs)->capture_default_str();
    cmd->add_option("--lr", cfg.train.lr)->capture_default_str();
    cmd->add_option("--lr-drop-epoch", cfg.train.lr_drop_epoch)->capture_default_str();
    cmd->add_option("--batch-size", cfg.train.batch_size)->capture_default_str();
    cmd->add_option("--weight-decay", cfg.train.weight_decay)->capture_default_str();
    cmd->add_option("--hidden-dim", cfg.train.hidden_dim, "0 for plain logistic regression")
        ->capture_default_str();
  }

  IterationConfig resolve() {
    cfg.strategy.kind = *parse_strategy(strategy);
    cfg.validate();
    return cfg;
  }
};

ReportFormat format_from(const std::string& name) { return *parse_report_format(name); }

void add_format(CLI::App* cmd, std::string& target) {
  cmd->add_option("--format", target, "Output format")->check(CLI::IsMember({"table", "records"}))
      ->capture_default_str();
}

// Every long option becomes settable via LEXLOOP_<NAME>.
void attach_env_names(CLI::App& app) {
  for (CLI::App* sub : app.get_subcommands({})) {
    for (CLI::Option* opt : sub->get_options()) {
      if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
      std::string name = "LEXLOOP_" + opt->get_lnames().front();
      std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) {
        return c == '-' ? '_' : static_cast<char>(std::toupper(c));
      });
      opt->envname(name);
    }
  }
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

AnnotationService* g_service = nullptr;

void handle_signal(int) {
  if (g_service != nullptr) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active-learning workbench for Mental/Physical word classification"};
  app.set_config("--config", "", "Read options from a config file");
  app.require_subcommand(1);

  // ingest
  std::string corpus_path, lexicon_path, ingest_out;
  auto* ingest = app.add_subcommand("ingest", "Extract candidate adjectives from a review corpus");
  ingest->add_option("--corpus", corpus_path, "One review per line")->required()->check(CLI::ExistingFile);
  ingest->add_option("--lexicon", lexicon_path, "Gloss lexicon")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", ingest_out, "Output directory")->required();

  // run
  DataFlags run_data;
  LoopFlags run_loop;
  std::string oracle_path, run_format = "table", run_out;
  std::size_t seeds = 3;
  bool per_seed = false;
  auto* run = app.add_subcommand("run", "Simulated sessions against a ground-truth oracle");
  run->add_option("--oracle", oracle_path, "Ground-truth labels (word<TAB>label)")->required()
      ->check(CLI::ExistingFile);
  run->add_option("--seeds", seeds, "Number of seeds (seed, seed+1, ...)")->capture_default_str()
      ->check(CLI::PositiveNumber);
  run->add_flag("--per-seed", per_seed, "Also print every seed's session report");
  run->add_option("--out", run_out, "Write the report to a file instead of stdout");
  run_data.add(run, true);
  run_loop.add(run);
  add_format(run, run_format);

  // init
  DataFlags init_data;
  LoopFlags init_loop;
  std::string init_dir;
  auto* init = app.add_subcommand("init", "Create a session directory for the annotation service");
  init->add_option("--session", init_dir, "Session directory")->required();
  init_data.add(init, true);
  init_loop.add(init);

  // serve
  std::string serve_dir, addr = "127.0.0.1:8080", ui_dir, cors = "*";
  auto* serve = app.add_subcommand("serve", "Start the annotation service");
  serve->add_option("--session", serve_dir, "Session directory")->required()->check(CLI::ExistingDirectory);
  serve->add_option("--addr", addr, "HOST:PORT")->capture_default_str();
  serve->add_option("--ui", ui_dir, "Static UI directory served at /");
  serve->add_option("--cors-origin", cors, "Access-Control-Allow-Origin value")->capture_default_str();

  // train
  DataFlags train_data;
  std::string labels_path, model_out;
  TrainConfig train_cfg;
  auto* train_cmd = app.add_subcommand("train", "Train a classifier on a labeled word list");
  train_cmd->add_option("--labels", labels_path, "word<TAB>label")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", model_out, "Model checkpoint")->required();
  train_cmd->add_option("--hidden-dim", train_cfg.hidden_dim)->capture_default_str();
  train_cmd->add_option("--epochs", train_cfg.epochs)->capture_default_str();
  train_cmd->add_option("--lr", train_cfg.lr)->capture_default_str();
  train_cmd->add_option("--seed", train_cfg.seed)->capture_default_str();
  train_data.add(train_cmd, false);

  // eval
  DataFlags eval_data;
  std::string model_path, eval_format = "table";
  auto* eval_cmd = app.add_subcommand("eval", "Confusion counts and per-class P/R/F1 on a testset");
  eval_cmd->add_option("--model", model_path, "Model checkpoint")->required()->check(CLI::ExistingFile);
  eval_data.add(eval_cmd, false);
  add_format(eval_cmd, eval_format);

  // senticompare
  std::string mpc_path, swn_path, senti_format = "table";
  auto* senti = app.add_subcommand("senticompare", "Cross-tabulate MPC labels against SentiWordNet");
  senti->add_option("--mpc", mpc_path, "word<TAB>label")->required()->check(CLI::ExistingFile);
  senti->add_option("--swn", swn_path, "SentiWordNet 3.0 file")->required()->check(CLI::ExistingFile);
  add_format(senti, senti_format);

  // disagreement
  std::string dual_path;
  auto* disagree = app.add_subcommand("disagreement", "Per-class annotator disagreement rates");
  disagree->add_option("--annotations", dual_path, "word<TAB>label1<TAB>label2[<TAB>adjudicated]")
      ->required()->check(CLI::ExistingFile);

  // export
  std::string export_dir;
  auto* export_cmd = app.add_subcommand("export", "Dump the labeled dataset of a session");
  export_cmd->add_option("--session", export_dir, "Session directory")->required()
      ->check(CLI::ExistingDirectory);

  // synth
  SyntheticConfig synth_cfg;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic two-Gaussian lexicon");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--pool-words", synth_cfg.pool_words)->capture_default_str();
  synth->add_option("--test-words", synth_cfg.test_words)->capture_default_str();
  synth->add_option("--dim", synth_cfg.dim)->capture_default_str();
  synth->add_option("--separation", synth_cfg.separation)->capture_default_str();
  synth->add_option("--mental-fraction", synth_cfg.mental_fraction)->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed)->capture_default_str();

  attach_env_names(app);
  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const Lexicon lexicon = parse_gloss_lexicon(lexicon_path);
      std::ifstream corpus(corpus_path);
      const IngestResult result = ingest_corpus(corpus, lexicon);
      fs::create_directories(ingest_out);
      auto words = open_output(fs::path(ingest_out) / "adjectives.txt");
      for (const auto& w : result.adjectives) words << w << '\n';
      auto pairs = open_output(fs::path(ingest_out) / "pairs.tsv");
      for (const auto& p : result.pairs) pairs << p.adjective << '\t' << p.noun << '\t' << p.source_review_id << '\n';
      std::cerr << result.reviews << " reviews, " << result.pairs.size() << " pairs, "
                << result.adjectives.size() << " adjectives\n";
      return 0;
    }

    if (*run) {
      const IterationConfig base = run_loop.resolve();
      const LabelMap truth = read_label_file(oracle_path);
      const SessionData data = load_session_data(run_data.sources());
      std::ostringstream out;
      std::vector<SessionReport> reports;
      for (std::size_t i = 0; i < seeds; ++i) {
        IterationConfig cfg = base;
        cfg.seed = base.seed + i;
        Session session(cfg, data.features, data.pool, data.testset);
        session.set_clock({});
        TruthOracle oracle(truth);
        reports.push_back(run_session(session, oracle));
        if (per_seed) write_session_report(out, reports.back(), format_from(run_format));
        for (const auto& w : session.warnings()) std::cerr << "warning: seed " << cfg.seed << ": " << w << '\n';
      }
      write_aggregate(out, aggregate_runs(reports), format_from(run_format));
      if (run_out.empty()) {
        std::cout << out.str();
      } else {
        open_output(run_out) << out.str();
      }
      return 0;
    }

    if (*init) {
      SessionDirectory::create(init_dir, init_loop.resolve(), init_data.sources());
      std::cerr << "created session " << init_dir << '\n';
      return 0;
    }

    if (*serve) {
      const auto colon = addr.rfind(':');
      if (colon == std::string::npos) throw ConfigError("--addr must be HOST:PORT");
      const std::string host = addr.substr(0, colon);
      const int port = std::stoi(addr.substr(colon + 1));
      auto dir = SessionDirectory::open(serve_dir);
      if (dir->log_read().bad_line) {
        std::cerr << "warning: annotations.log invalid at line " << *dir->log_read().bad_line << " ("
                  << dir->log_read().reason << "); resumed from the valid prefix\n";
      }
      if (dir->replay_result().stopped_at) {
        std::cerr << "warning: replay stopped at record " << *dir->replay_result().stopped_at << ": "
                  << dir->replay_result().reason << '\n';
      }
      ServiceOptions options;
      options.cors_origin = cors;
      options.ui_dir = ui_dir;
      AnnotationService service(std::move(dir), options);
      if (!service.bind(host, port)) throw Error("cannot bind " + addr);
      g_service = &service;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cerr << "serving on http://" << addr << '\n';
      service.listen_after_bind();
      g_service = nullptr;
      return 0;
    }

    if (*train_cmd) {
      const LabelMap labels = read_label_file(labels_path);
      DataSources sources = train_data.sources();
      const SessionData data = load_session_data(sources);
      std::vector<LabeledExample> examples;
      for (const auto& [word, label] : labels) {
        auto it = data.features.find(word);
        if (it == data.features.end()) throw NotFoundError("no features for '" + word + "'");
        examples.push_back(LabeledExample{word, it->second.features, label});
      }
      const TrainResult result = train(examples, train_cfg);
      save_model(result.winner, fs::path(model_out));
      std::cerr << "winner epoch " << result.history.winner_epoch + 1 << ", dev accuracy "
                << format_metric(result.history.epochs[result.history.winner_epoch].dev_accuracy) << '\n';
      return 0;
    }

    if (*eval_cmd) {
      if (eval_data.testset.empty()) throw ConfigError("eval needs --testset");
      const ClassifierModel model = load_model(fs::path(model_path));
      const SessionData data = load_session_data(eval_data.sources());
      write_metrics(std::cout, evaluate(model, data.testset), format_from(eval_format));
      return 0;
    }

    if (*senti) {
      const LabelMap mpc = read_label_file(mpc_path);
      const auto synsets = parse_sentiwordnet(fs::path(swn_path));
      write_cross_tab(std::cout, cross_tab(mpc, classify_adjectives(synsets)), format_from(senti_format));
      return 0;
    }

    if (*disagree) {
      std::ifstream in(dual_path);
      const auto annotations = parse_dual_annotations(in, dual_path);
      const DisagreementStats stats = disagreement_stats(annotations);
      for (const auto& w : stats.skipped) std::cerr << "warning: skipped '" << w << "' (missing label)\n";
      write_disagreement_table(std::cout, stats);
      return 0;
    }

    if (*export_cmd) {
      const LogReadResult log = read_session_log(fs::path(export_dir) / "annotations.log");
      if (log.bad_line) {
        std::cerr << "warning: annotations.log invalid at line " << *log.bad_line << " (" << log.reason << ")\n";
      }
      std::cout << "word\tlabel\titeration\tcounted\n";
      for (const auto& r : log.records) {
        std::cout << r.word << '\t' << label_name(r.label) << '\t' << r.iteration + 1 << '\t'
                  << (r.counted ? 1 : 0) << '\n';
      }
      return 0;
    }

    if (*synth) {
      write_synthetic(make_synthetic(synth_cfg), synth_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
