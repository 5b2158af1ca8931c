#include "lexloop/server.h"

#include <httplib.h>

#include <iostream>
#include <json.hpp>

#include "lexloop/error.h"

namespace lexloop {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, json{{"error", message}});
}

json class_metrics_json(const ClassMetrics& m) {
  return json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

}  // namespace

AnnotationService::AnnotationService(std::unique_ptr<SessionDirectory> dir, ServiceOptions options)
    : dir_(std::move(dir)), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  if (dir_) session_id_ = std::filesystem::absolute(dir_->dir()).filename().string();
  install_routes();
}

AnnotationService::~AnnotationService() {
  stop();
  if (trainer_.joinable()) trainer_.join();
}

int AnnotationService::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool AnnotationService::bind(const std::string& host, int port) { return server_->bind_to_port(host, port); }

bool AnnotationService::listen_after_bind() { return server_->listen_after_bind(); }

void AnnotationService::stop() { server_->stop(); }

void AnnotationService::wait_for_training() {
  std::unique_lock lock(mu_);
  training_done_.wait(lock, [this] { return !training_; });
}

void AnnotationService::start_training_locked() {
  RetrainJob job = dir_->session().prepare_retrain();
  training_ = true;
  if (trainer_.joinable()) trainer_.join();
  trainer_ = std::thread([this, job = std::move(job)] {
    RetrainOutcome outcome;
    try {
      if (options_.before_retrain) options_.before_retrain(job.iteration);
      outcome = run_retrain(job);
    } catch (const std::exception& e) {
      outcome.iteration = job.iteration;
      outcome.skipped_reason = std::string("training failed: ") + e.what();
    }
    std::lock_guard lock(mu_);
    dir_->session().install(outcome);
    try {
      dir_->persist_outputs();
    } catch (const std::exception& e) {
      std::cerr << "warning: cannot persist outputs: " << e.what() << '\n';
    }
    training_ = false;
    training_done_.notify_all();
  });
}

void AnnotationService::install_routes() {
  httplib::Server& srv = *server_;
  const std::string origin = options_.cors_origin;

  srv.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  if (!options_.ui_dir.empty()) srv.set_mount_point("/", options_.ui_dir.string());

  if (!dir_) {
    srv.Get(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      send_error(res, 404, "no active session");
    });
    srv.Post(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      send_error(res, 404, "no active session");
    });
    return;
  }

  auto progress_json = [this](const Session& s) {
    const IterationConfig& cfg = s.config();
    return json{{"pos_filled", s.state().current_pos.size()}, {"k1", cfg.k1},
                {"neg_filled", s.state().current_neg.size()}, {"k2", cfg.k2},
                {"m", s.state().iteration_annotations},       {"M", cfg.max_annotations}};
  };

  srv.Get("/api/session", [this, progress_json](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mu_);
    const Session& s = dir_->session();
    const IterationConfig& cfg = s.config();
    send_json(res, 200,
              json{{"session_id", session_id_},
                   {"status", status_name(s.status())},
                   {"iteration", s.state().iteration + 1},
                   {"completed_iterations", s.iteration_reports().size()},
                   {"config",
                    {{"T", cfg.iterations},
                     {"K1", cfg.k1},
                     {"K2", cfg.k2},
                     {"M", cfg.max_annotations},
                     {"strategy", strategy_name(cfg.strategy.kind)},
                     {"cal_k", cfg.strategy.cal_k},
                     {"seed", cfg.seed}}},
                   {"progress", progress_json(s)},
                   {"unlabeled", s.state().unlabeled.size()},
                   {"labeled", s.state().labeled.size()},
                   {"annotations", s.state().archive.size()}});
  });

  srv.Get("/api/next", [this, progress_json](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mu_);
    Session& s = dir_->session();
    if (s.status() == SessionStatus::kAwaitingRetrain) {
      res.set_header("Retry-After", std::to_string(options_.retry_after_seconds));
      send_json(res, 503, json{{"status", "training"}});
      return;
    }
    if (s.status() == SessionStatus::kFinished) {
      send_json(res, 410, json{{"status", "finished"}});
      return;
    }
    const std::string word = s.next_candidate();
    send_json(res, 200,
              json{{"word", word},
                   {"glosses", dir_->glosses(word)},
                   {"iteration", s.state().iteration + 1},
                   {"strategy", strategy_name(*s.candidate_strategy())},
                   {"progress", progress_json(s)},
                   {"session_id", session_id_}});
  });

  srv.Post("/api/label", [this](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("word") || !body["word"].is_string()) {
      send_error(res, 400, "body must be a JSON object with a string 'word'");
      return;
    }
    if (!body.contains("label") || !body["label"].is_string()) {
      send_error(res, 422, "label must be \"mental\" or \"physical\"");
      return;
    }
    const std::string label_text = body["label"].get<std::string>();
    const std::optional<Label> label =
        label_text == "mental" ? std::optional(Label::kMental)
                               : label_text == "physical" ? std::optional(Label::kPhysical) : std::nullopt;
    if (!label) {
      send_error(res, 422, "label must be \"mental\" or \"physical\"");
      return;
    }
    const std::string note = body.value("note", "");
    const std::string annotator = body.value("annotator", "annotator");

    std::lock_guard lock(mu_);
    Session& s = dir_->session();
    if (s.status() == SessionStatus::kAwaitingRetrain) {
      res.set_header("Retry-After", std::to_string(options_.retry_after_seconds));
      send_error(res, 503, "retraining in progress");
      return;
    }
    if (s.status() == SessionStatus::kFinished) {
      send_error(res, 409, "session finished");
      return;
    }
    SubmitOutcome outcome;
    try {
      outcome = s.submit(body["word"].get<std::string>(), *label, annotator, note);
    } catch (const ConflictError& e) {
      send_error(res, 409, e.what());
      return;
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
      return;
    }
    if (outcome.iteration_complete) start_training_locked();
    send_json(res, 200,
              json{{"accepted", true},
                   {"counted", outcome.counted},
                   {"iteration_complete", outcome.iteration_complete},
                   {"status", status_name(s.status())}});
  });

  srv.Get("/api/metrics", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mu_);
    json rows = json::array();
    for (const auto& it : dir_->session().iteration_reports()) {
      json row{{"iteration", it.iteration},
               {"m", it.annotations},
               {"labeled", it.labeled_size},
               {"quotas_met", it.quotas_met},
               {"retrained", it.retrained}};
      if (it.metrics) {
        row["mental"] = class_metrics_json(it.metrics->mental);
        row["physical"] = class_metrics_json(it.metrics->physical);
      } else {
        row["mental"] = nullptr;
        row["physical"] = nullptr;
      }
      rows.push_back(std::move(row));
    }
    send_json(res, 200, rows);
  });

  srv.Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mu_);
    json rows = json::array();
    for (const auto& r : dir_->session().state().archive) {
      rows.push_back(json{{"word", r.word},
                          {"label", label_name(r.label)},
                          {"iteration", r.iteration + 1},
                          {"counted", r.counted},
                          {"strategy", strategy_name(r.strategy)},
                          {"annotator", r.annotator},
                          {"note", r.note},
                          {"timestamp", r.timestamp}});
    }
    send_json(res, 200, rows);
  });
}

}  // namespace lexloop
