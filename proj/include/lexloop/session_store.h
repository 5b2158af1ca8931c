#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexloop/engine.h"

namespace lexloop {

// `key = value` lines; '#' starts a comment line.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<stream>");
  static KeyValueConfig load(const std::filesystem::path& path);

  std::optional<std::string> get(std::string_view key) const;
  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }

  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

// Reads T, K1, K2, M, strategy, cal_k, seed, warm_start and the training keys.
// Unset keys keep their defaults. Throws ConfigError on a bad value.
IterationConfig iteration_config_from(const KeyValueConfig& kv);
void write_iteration_config(const IterationConfig& cfg, KeyValueConfig& kv);

// Where a session's words and features come from. Either `features` (rows serve
// as classifier input and strategy embedding) or `lexicon` + `vectors`.
struct DataSources {
  std::filesystem::path features;
  std::filesystem::path lexicon;
  std::filesystem::path vectors;
  std::filesystem::path pool;     // optional word list; default: every available word
  std::filesystem::path testset;  // optional `word<TAB>label`; excluded from the pool

  // Relative paths in `kv` are resolved against `base`.
  static DataSources from_config(const KeyValueConfig& kv, const std::filesystem::path& base);
  void write(KeyValueConfig& kv) const;
};

struct SessionData {
  FeatureTable features;
  std::vector<std::string> pool;
  std::vector<LabeledExample> testset;
  std::optional<Lexicon> lexicon;  // present when loaded from a gloss lexicon
};

SessionData load_session_data(const DataSources& sources);

using LabelMap = std::map<std::string, Label, std::less<>>;

// `word<TAB>label` per line, label in {mental, physical}.
LabelMap read_label_file(const std::filesystem::path& path);
LabelMap parse_label_file(std::istream& in, const std::string& source = "<stream>");

std::vector<std::string> read_word_list(const std::filesystem::path& path);

// annotations.log line (no trailing newline):
// iteration, word, label, strategy, counted(0|1), timestamp, annotator[, note]
std::string format_record(const SessionRecord& record);
std::optional<SessionRecord> parse_record(std::string_view line);

struct LogReadResult {
  std::vector<SessionRecord> records;
  std::optional<std::size_t> bad_line;  // 1-based line of the first invalid record
  std::string reason;
};

// Stops at the first malformed or unterminated line.
LogReadResult read_session_log(std::istream& in);
LogReadResult read_session_log(const std::filesystem::path& path);

// Append-only record log; every append reaches the disk before returning.
class SessionLog {
 public:
  explicit SessionLog(const std::filesystem::path& path);
  ~SessionLog();
  SessionLog(const SessionLog&) = delete;
  SessionLog& operator=(const SessionLog&) = delete;

  void append(const SessionRecord& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

// A session directory: `config`, `annotations.log`, `model-<t>.ckpt`, `report`.
class SessionDirectory {
 public:
  // Loads config and data, replays the log and attaches a durable record sink.
  // A log with an invalid tail is truncated to its valid prefix after the
  // original is copied to annotations.log.bad.
  static std::unique_ptr<SessionDirectory> open(const std::filesystem::path& dir);

  // Writes a fresh config file; fails if one exists.
  static void create(const std::filesystem::path& dir, const IterationConfig& cfg,
                     const DataSources& sources);

  Session& session() { return *session_; }
  const Session& session() const { return *session_; }
  const std::filesystem::path& dir() const { return dir_; }
  const Session::ReplayResult& replay_result() const { return replay_; }
  const LogReadResult& log_read() const { return log_read_; }

  // Glosses shown to annotators; empty without a lexicon.
  std::vector<std::string> glosses(std::string_view word) const;

  // Persists model-<t>.ckpt and the report for every iteration installed so far.
  void persist_outputs();

 private:
  SessionDirectory() = default;

  std::filesystem::path dir_;
  std::unique_ptr<Session> session_;
  std::unique_ptr<SessionLog> log_;
  std::optional<Lexicon> lexicon_;
  Session::ReplayResult replay_;
  LogReadResult log_read_;
  std::size_t persisted_iterations_ = 0;
};

}  // namespace lexloop
