#include "lexloop/session_store.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>

#include "lexloop/error.h"
#include "text_util.h"

namespace lexloop {

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
  KeyValueConfig kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected key = value");
    std::string key(detail::trim(view.substr(0, eq)));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    kv.set(std::move(key), std::string(detail::trim(view.substr(eq + 1))));
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open config: " + path.string());
  return parse(in, path.string());
}

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void KeyValueConfig::write(std::ostream& out) const {
  for (const auto& [key, value] : values_) out << key << " = " << value << '\n';
}

namespace {

template <typename T>
T parse_value(std::string_view key, const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("bad value for '" + std::string(key) + "': '" + text + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, const std::string& text) {
  const std::string v = to_lower(text);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean for '" + std::string(key) + "': '" + text + "'");
}

template <typename T>
void read_into(const KeyValueConfig& kv, std::initializer_list<std::string_view> keys, T& target) {
  for (auto key : keys) {
    if (auto v = kv.get(key)) {
      if constexpr (std::is_same_v<T, bool>) {
        target = parse_bool(key, *v);
      } else {
        target = parse_value<T>(key, *v);
      }
      return;
    }
  }
}

std::string number_text(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

IterationConfig iteration_config_from(const KeyValueConfig& kv) {
  IterationConfig cfg;
  read_into(kv, {"iterations", "T"}, cfg.iterations);
  read_into(kv, {"k1", "K1"}, cfg.k1);
  read_into(kv, {"k2", "K2"}, cfg.k2);
  read_into(kv, {"max_annotations", "M"}, cfg.max_annotations);
  read_into(kv, {"cal_k"}, cfg.strategy.cal_k);
  read_into(kv, {"seed"}, cfg.seed);
  read_into(kv, {"warm_start"}, cfg.warm_start);
  if (auto s = kv.get("strategy")) {
    auto kind = parse_strategy(*s);
    if (!kind) throw ConfigError("unknown strategy '" + *s + "' (valid: entropy, coreset, cal, random)");
    cfg.strategy.kind = *kind;
  }
  TrainConfig& t = cfg.train;
  read_into(kv, {"epochs"}, t.epochs);
  read_into(kv, {"lr"}, t.lr);
  read_into(kv, {"lr_drop_epoch"}, t.lr_drop_epoch);
  read_into(kv, {"lr_drop_factor"}, t.lr_drop_factor);
  read_into(kv, {"batch_size"}, t.batch_size);
  read_into(kv, {"weight_decay"}, t.weight_decay);
  read_into(kv, {"dev_fraction"}, t.dev_fraction);
  read_into(kv, {"dropout_prob"}, t.dropout_prob);
  read_into(kv, {"hidden_dim"}, t.hidden_dim);
  read_into(kv, {"threshold"}, t.threshold);
  read_into(kv, {"train_seed"}, t.seed);
  cfg.validate();
  return cfg;
}

void write_iteration_config(const IterationConfig& cfg, KeyValueConfig& kv) {
  kv.set("iterations", std::to_string(cfg.iterations));
  kv.set("k1", std::to_string(cfg.k1));
  kv.set("k2", std::to_string(cfg.k2));
  kv.set("max_annotations", std::to_string(cfg.max_annotations));
  kv.set("strategy", std::string(strategy_name(cfg.strategy.kind)));
  kv.set("cal_k", std::to_string(cfg.strategy.cal_k));
  kv.set("seed", std::to_string(cfg.seed));
  kv.set("warm_start", cfg.warm_start ? "true" : "false");
  const TrainConfig& t = cfg.train;
  kv.set("epochs", std::to_string(t.epochs));
  kv.set("lr", number_text(t.lr));
  kv.set("lr_drop_epoch", std::to_string(t.lr_drop_epoch));
  kv.set("lr_drop_factor", number_text(t.lr_drop_factor));
  kv.set("batch_size", std::to_string(t.batch_size));
  kv.set("weight_decay", number_text(t.weight_decay));
  kv.set("dev_fraction", number_text(t.dev_fraction));
  kv.set("dropout_prob", number_text(t.dropout_prob));
  kv.set("hidden_dim", std::to_string(t.hidden_dim));
  kv.set("threshold", number_text(t.threshold));
  kv.set("train_seed", std::to_string(t.seed));
}

DataSources DataSources::from_config(const KeyValueConfig& kv, const std::filesystem::path& base) {
  auto resolve = [&](std::string_view key) -> std::filesystem::path {
    auto v = kv.get(key);
    if (!v || v->empty()) return {};
    std::filesystem::path p(*v);
    return p.is_absolute() ? p : base / p;
  };
  DataSources s;
  s.features = resolve("features");
  s.lexicon = resolve("lexicon");
  s.vectors = resolve("vectors");
  s.pool = resolve("pool");
  s.testset = resolve("testset");
  return s;
}

void DataSources::write(KeyValueConfig& kv) const {
  auto put = [&](const char* key, const std::filesystem::path& p) {
    if (!p.empty()) kv.set(key, std::filesystem::absolute(p).string());
  };
  put("features", features);
  put("lexicon", lexicon);
  put("vectors", vectors);
  put("pool", pool);
  put("testset", testset);
}

LabelMap parse_label_file(std::istream& in, const std::string& source) {
  LabelMap labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty() || line.front() == '#') continue;
    auto fields = detail::split(line, '\t');
    if (fields.size() < 2) throw ParseError(source, line_no, "expected word<TAB>label");
    auto label = parse_label(fields[1]);
    if (!label) throw ParseError(source, line_no, "unknown label '" + std::string(fields[1]) + "'");
    labels[to_lower(detail::trim(fields[0]))] = *label;
  }
  return labels;
}

LabelMap read_label_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open label file: " + path.string());
  return parse_label_file(in, path.string());
}

std::vector<std::string> read_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open word list: " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view w = detail::trim(line);
    if (!w.empty() && w.front() != '#') words.push_back(to_lower(w));
  }
  return words;
}

SessionData load_session_data(const DataSources& sources) {
  SessionData data;
  LabelMap test_labels;
  if (!sources.testset.empty()) test_labels = read_label_file(sources.testset);

  std::vector<std::string> available;
  if (!sources.features.empty()) {
    EmbeddingStore store = load_vectors(sources.features);
    data.features = feature_table_from_store(store);
    available = store.tokens();
  } else if (!sources.lexicon.empty() && !sources.vectors.empty()) {
    Lexicon lexicon = parse_gloss_lexicon(sources.lexicon);
    EmbeddingStore store = load_vectors(sources.vectors);
    available = lexicon.words_with(PartOfSpeech::kAdjective);
    std::vector<std::string> wanted = sources.pool.empty() ? available : read_word_list(sources.pool);
    for (const auto& [word, _] : test_labels) wanted.push_back(word);
    std::sort(wanted.begin(), wanted.end());
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
    data.features = build_feature_table(wanted, lexicon, store);
    data.lexicon = std::move(lexicon);
  } else {
    throw ConfigError("session data needs 'features' or both 'lexicon' and 'vectors'");
  }

  data.pool = sources.pool.empty() ? available : read_word_list(sources.pool);
  std::erase_if(data.pool, [&](const std::string& w) { return test_labels.count(w) > 0; });
  for (const auto& [word, label] : test_labels) {
    auto it = data.features.find(word);
    if (it == data.features.end()) throw NotFoundError("no features for testset word '" + word + "'");
    data.testset.push_back(LabeledExample{word, it->second.features, label});
  }
  return data;
}

namespace {

std::string sanitize(std::string_view text) {
  std::string out(text);
  std::replace_if(out.begin(), out.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  return out;
}

}  // namespace

std::string format_record(const SessionRecord& r) {
  std::string line = std::to_string(r.iteration);
  line += '\t';
  line += r.word;
  line += '\t';
  line += label_name(r.label);
  line += '\t';
  line += strategy_name(r.strategy);
  line += '\t';
  line += r.counted ? '1' : '0';
  line += '\t';
  line += sanitize(r.timestamp);
  line += '\t';
  line += sanitize(r.annotator);
  if (!r.note.empty()) {
    line += '\t';
    line += sanitize(r.note);
  }
  return line;
}

std::optional<SessionRecord> parse_record(std::string_view line) {
  auto fields = detail::split(line, '\t');
  if (fields.size() != 7 && fields.size() != 8) return std::nullopt;
  SessionRecord r;
  auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), r.iteration);
  if (ec != std::errc() || ptr != fields[0].data() + fields[0].size() || r.iteration < 0) return std::nullopt;
  if (fields[1].empty()) return std::nullopt;
  r.word = std::string(fields[1]);
  auto label = parse_label(fields[2]);
  auto strategy = parse_strategy(fields[3]);
  if (!label || !strategy) return std::nullopt;
  r.label = *label;
  r.strategy = *strategy;
  if (fields[4] != "0" && fields[4] != "1") return std::nullopt;
  r.counted = fields[4] == "1";
  r.timestamp = std::string(fields[5]);
  r.annotator = std::string(fields[6]);
  if (fields.size() == 8) r.note = std::string(fields[7]);
  return r;
}

LogReadResult read_session_log(std::istream& in) {
  LogReadResult result;
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < content.size()) {
    ++line_no;
    const auto nl = content.find('\n', start);
    if (nl == std::string::npos) {
      result.bad_line = line_no;
      result.reason = "unterminated final line";
      break;
    }
    std::string_view line(content.data() + start, nl - start);
    start = nl + 1;
    auto record = parse_record(line);
    if (!record) {
      result.bad_line = line_no;
      result.reason = "malformed record";
      break;
    }
    result.records.push_back(std::move(*record));
  }
  return result;
}

LogReadResult read_session_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return read_session_log(in);
}

SessionLog::SessionLog(const std::filesystem::path& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error("cannot open log " + path.string() + ": " + std::strerror(errno));
}

SessionLog::~SessionLog() {
  if (fd_ >= 0) ::close(fd_);
}

void SessionLog::append(const SessionRecord& record) {
  const std::string line = format_record(record) + '\n';
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error("log write failed: " + std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw Error("log fsync failed: " + std::string(std::strerror(errno)));
}

void SessionDirectory::create(const std::filesystem::path& dir, const IterationConfig& cfg,
                              const DataSources& sources) {
  std::filesystem::create_directories(dir);
  const auto config_path = dir / "config";
  if (std::filesystem::exists(config_path)) throw Error("session config already exists: " + config_path.string());
  KeyValueConfig kv;
  write_iteration_config(cfg, kv);
  sources.write(kv);
  std::ofstream out(config_path);
  if (!out) throw Error("cannot write " + config_path.string());
  kv.write(out);
}

std::unique_ptr<SessionDirectory> SessionDirectory::open(const std::filesystem::path& dir) {
  std::unique_ptr<SessionDirectory> sd(new SessionDirectory());
  sd->dir_ = dir;
  const KeyValueConfig kv = KeyValueConfig::load(dir / "config");
  const IterationConfig cfg = iteration_config_from(kv);
  SessionData data = load_session_data(DataSources::from_config(kv, dir));
  sd->lexicon_ = std::move(data.lexicon);
  sd->session_ = std::make_unique<Session>(cfg, std::move(data.features), std::move(data.pool),
                                           std::move(data.testset));

  const auto log_path = dir / "annotations.log";
  if (std::filesystem::exists(log_path)) {
    sd->log_read_ = read_session_log(log_path);
    sd->replay_ = sd->session_->replay(sd->log_read_.records);
    const bool rewrite = sd->log_read_.bad_line.has_value() || sd->replay_.stopped_at.has_value();
    if (rewrite) {
      std::filesystem::copy_file(log_path, dir / "annotations.log.bad",
                                 std::filesystem::copy_options::overwrite_existing);
      std::ofstream out(log_path, std::ios::trunc | std::ios::binary);
      for (std::size_t i = 0; i < sd->replay_.applied; ++i) {
        out << format_record(sd->log_read_.records[i]) << '\n';
      }
    }
  }
  sd->log_ = std::make_unique<SessionLog>(log_path);
  SessionLog* log = sd->log_.get();
  sd->session_->set_record_sink([log](const SessionRecord& r) { log->append(r); });
  sd->persist_outputs();
  return sd;
}

std::vector<std::string> SessionDirectory::glosses(std::string_view word) const {
  std::vector<std::string> out;
  if (!lexicon_) return out;
  if (const LexiconEntry* entry = lexicon_->find(word)) {
    for (const auto& g : entry->glosses) out.push_back(g.text);
  }
  return out;
}

void SessionDirectory::persist_outputs() {
  const auto& reports = session_->iteration_reports();
  if (reports.size() == persisted_iterations_) return;
  if (const ClassifierModel* model = session_->model()) {
    save_model(*model, dir_ / ("model-" + std::to_string(reports.back().iteration) + ".ckpt"));
  }
  std::ofstream out(dir_ / "report");
  write_session_report(out, session_->report(), ReportFormat::kRecords);
  persisted_iterations_ = reports.size();
}

}  // namespace lexloop
