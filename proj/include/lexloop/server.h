#pragma once

#include <condition_variable>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "lexloop/session_store.h"

namespace httplib {
class Server;
}

namespace lexloop {

struct ServiceOptions {
  std::string cors_origin = "*";
  int retry_after_seconds = 1;
  std::filesystem::path ui_dir;  // served at "/" when set
  // Runs on the trainer thread before each retrain, outside the lock.
  std::function<void(int iteration)> before_retrain;
};

// HTTP/JSON front end over one session directory. All state mutations go
// through a single mutex; retraining runs on a background thread.
//
//   GET  /api/session   config, progress, status
//   GET  /api/next      current task (503 while training, 410 when finished)
//   POST /api/label     {word, label, note?, annotator?}
//   GET  /api/metrics   one row per completed iteration
//   GET  /api/export    every annotation with its counted flag
class AnnotationService {
 public:
  // A null directory makes every /api route answer 404.
  explicit AnnotationService(std::unique_ptr<SessionDirectory> dir, ServiceOptions options = {});
  ~AnnotationService();

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  // Binds to an ephemeral port and returns it, or -1.
  int bind_any_port(const std::string& host);
  bool bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen_after_bind();
  void stop();

  // Blocks until no retrain is running.
  void wait_for_training();

  httplib::Server& http() { return *server_; }

 private:
  void install_routes();
  void start_training_locked();

  std::unique_ptr<SessionDirectory> dir_;
  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::string session_id_;
  std::mutex mu_;
  std::condition_variable training_done_;
  bool training_ = false;
  std::thread trainer_;
};

}  // namespace lexloop
