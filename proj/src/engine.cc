#include "lexloop/engine.h"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "lexloop/error.h"

namespace lexloop {

void IterationConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations (T) must be >= 1");
  if (k1 == 0 || k2 == 0) throw ConfigError("quotas K1 and K2 must be positive");
  if (k1 + k2 > max_annotations) throw ConfigError("K1 + K2 must not exceed M");
  if (strategy.cal_k == 0) throw ConfigError("cal_k must be >= 1");
  train.validate();
}

std::size_t PoolState::archive_only() const {
  return static_cast<std::size_t>(
      std::count_if(archive.begin(), archive.end(), [](const SessionRecord& r) { return !r.counted; }));
}

Label TruthOracle::annotate(const std::string& word) {
  auto it = truth_.find(word);
  if (it == truth_.end()) throw NotFoundError("no ground-truth label for '" + word + "'");
  return it->second;
}

std::string_view status_name(SessionStatus status) {
  switch (status) {
    case SessionStatus::kAnnotating:
      return "annotating";
    case SessionStatus::kAwaitingRetrain:
      return "training";
    case SessionStatus::kFinished:
      return "finished";
  }
  return "unknown";
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

RetrainOutcome run_retrain(const RetrainJob& job) {
  RetrainOutcome outcome;
  outcome.iteration = job.iteration;
  bool has_pos = false, has_neg = false;
  for (const auto& ex : job.data) (ex.label == Label::kMental ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    outcome.skipped_reason = "labeled pool lacks one class; keeping previous model";
    return outcome;
  }
  const ClassifierModel* warm = job.warm_start ? &*job.warm_start : nullptr;
  TrainResult result = train(job.data, job.config, warm);
  outcome.model = std::move(result.winner);
  outcome.history = std::move(result.history);
  return outcome;
}

Session::Session(IterationConfig cfg, FeatureTable features, std::vector<std::string> pool,
                 std::vector<LabeledExample> testset)
    : cfg_(std::move(cfg)),
      features_(std::move(features)),
      testset_(std::move(testset)),
      rng_(cfg_.seed),
      clock_(utc_timestamp) {
  cfg_.validate();
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (pool.empty()) throw Error("session: initial unlabeled pool is empty");
  std::optional<std::size_t> dim;
  for (const auto& word : pool) {
    auto it = features_.find(word);
    if (it == features_.end()) throw NotFoundError("no features for pool word '" + word + "'");
    if (!dim) dim = it->second.features.size();
    if (it->second.features.size() != *dim) throw DimensionError("inconsistent feature dimensions");
  }
  for (const auto& ex : testset_) {
    if (ex.features.size() != *dim) throw DimensionError("testset feature dimension mismatch");
  }
  state_.unlabeled = std::move(pool);
  initial_pool_size_ = state_.unlabeled.size();
}

PoolView Session::make_view() const {
  PoolView view;
  view.model = model();
  view.unlabeled.reserve(state_.unlabeled.size());
  for (const auto& word : state_.unlabeled) {
    const WordFeatures& wf = features_.find(word)->second;
    view.unlabeled.push_back(PoolItem{word, wf.features, wf.embedding});
  }
  view.labeled.reserve(state_.labeled.size());
  for (const auto& lw : state_.labeled) {
    const WordFeatures& wf = features_.find(lw.word)->second;
    view.labeled.push_back(LabeledItem{lw.word, wf.features, wf.embedding, lw.label});
  }
  return view;
}

std::string Session::next_candidate() {
  if (status_ != SessionStatus::kAnnotating) {
    throw Error("session is " + std::string(status_name(status_)) + ", no task available");
  }
  if (candidate_) return *candidate_;

  const PoolView view = make_view();
  StrategyKind kind = cfg_.strategy.kind;
  if (state_.iteration == 0) {
    kind = StrategyKind::kRandom;
  } else if ((kind == StrategyKind::kEntropy || kind == StrategyKind::kCal) && view.model == nullptr) {
    kind = StrategyKind::kRandom;
  } else if ((kind == StrategyKind::kCoreset || kind == StrategyKind::kCal) && view.labeled.empty()) {
    kind = StrategyKind::kRandom;
  }
  candidate_ = select(view, StrategySpec{kind, cfg_.strategy.cal_k}, rng_);
  candidate_strategy_ = kind;
  return *candidate_;
}

SubmitOutcome Session::submit(std::string_view word, Label label, std::string_view annotator,
                              std::string_view note) {
  const std::string current = next_candidate();
  if (word != current) {
    const bool seen = std::any_of(state_.archive.begin(), state_.archive.end(),
                                  [&](const SessionRecord& r) { return r.word == word; });
    throw ConflictError(seen ? "'" + std::string(word) + "' is already labeled"
                             : "'" + std::string(word) + "' is not the current task ('" + current + "')");
  }
  SessionRecord record;
  record.iteration = state_.iteration;
  record.word = current;
  record.label = label;
  record.strategy = *candidate_strategy_;
  record.counted = label == Label::kMental ? state_.current_pos.size() < cfg_.k1
                                           : state_.current_neg.size() < cfg_.k2;
  record.timestamp = clock_ ? clock_() : std::string();
  record.annotator = std::string(annotator);
  record.note = std::string(note);
  if (sink_) sink_(record);
  return apply(std::move(record));
}

SubmitOutcome Session::apply(SessionRecord record) {
  auto it = std::lower_bound(state_.unlabeled.begin(), state_.unlabeled.end(), record.word);
  state_.unlabeled.erase(it);
  ++state_.iteration_annotations;

  SubmitOutcome outcome;
  outcome.counted = record.counted;
  if (record.counted) {
    LabeledWord lw{record.word, record.label, record.iteration};
    (record.label == Label::kMental ? state_.current_pos : state_.current_neg).push_back(std::move(lw));
  }
  state_.archive.push_back(std::move(record));
  candidate_.reset();
  candidate_strategy_.reset();

  const bool quotas_met = state_.current_pos.size() == cfg_.k1 && state_.current_neg.size() == cfg_.k2;
  if (quotas_met || state_.iteration_annotations == cfg_.max_annotations) {
    close_iteration(false);
    outcome.iteration_complete = true;
  } else if (state_.unlabeled.empty()) {
    close_iteration(true);
    outcome.iteration_complete = true;
  }
  return outcome;
}

void Session::close_iteration(bool pool_exhausted) {
  IterationReport report;
  report.iteration = state_.iteration + 1;
  report.annotations = state_.iteration_annotations;
  report.positives = state_.current_pos.size();
  report.negatives = state_.current_neg.size();
  report.quotas_met = report.positives == cfg_.k1 && report.negatives == cfg_.k2;
  report.pool_exhausted = pool_exhausted;
  if (pool_exhausted) {
    warnings_.push_back("iteration " + std::to_string(report.iteration) +
                        ": unlabeled pool exhausted with partial quotas");
  }
  for (auto* buffer : {&state_.current_pos, &state_.current_neg}) {
    state_.labeled.insert(state_.labeled.end(), buffer->begin(), buffer->end());
    buffer->clear();
  }
  report.labeled_size = state_.labeled.size();
  report.archive_only = state_.archive_only();
  pending_report_ = report;
  status_ = SessionStatus::kAwaitingRetrain;
}

std::vector<LabeledExample> Session::labeled_examples() const {
  std::vector<LabeledExample> out;
  out.reserve(state_.labeled.size());
  for (const auto& lw : state_.labeled) {
    out.push_back(LabeledExample{lw.word, features_.find(lw.word)->second.features, lw.label});
  }
  return out;
}

RetrainJob Session::prepare_retrain() const {
  if (status_ != SessionStatus::kAwaitingRetrain) throw Error("no iteration awaiting retrain");
  RetrainJob job;
  job.iteration = state_.iteration;
  job.data = labeled_examples();
  job.config = cfg_.train;
  job.config.seed = splitmix64(cfg_.seed ^ splitmix64(cfg_.train.seed + static_cast<std::uint64_t>(state_.iteration)));
  if (cfg_.warm_start && model_ && model_->hidden_dim() == cfg_.train.hidden_dim) job.warm_start = model_;
  job.testset = testset_;
  return job;
}

void Session::install(const RetrainOutcome& outcome) {
  if (status_ != SessionStatus::kAwaitingRetrain || outcome.iteration != state_.iteration) {
    throw Error("retrain outcome does not match the pending iteration");
  }
  IterationReport report = *pending_report_;
  if (outcome.model) {
    model_ = outcome.model;
    report.retrained = true;
  } else {
    warnings_.push_back("iteration " + std::to_string(report.iteration) + ": " + outcome.skipped_reason);
  }
  if (model_ && !testset_.empty()) report.metrics = evaluate(*model_, testset_);
  reports_.push_back(report);
  pending_report_.reset();

  ++state_.iteration;
  state_.iteration_annotations = 0;
  if (state_.iteration >= cfg_.iterations) {
    status_ = SessionStatus::kFinished;
  } else if (state_.unlabeled.empty()) {
    warnings_.push_back("unlabeled pool exhausted before iteration " + std::to_string(state_.iteration + 1));
    status_ = SessionStatus::kFinished;
  } else {
    status_ = SessionStatus::kAnnotating;
  }
}

void Session::finish_iteration() { install(run_retrain(prepare_retrain())); }

Session::ReplayResult Session::replay(std::span<const SessionRecord> records) {
  ReplayResult result;
  RecordSink saved = std::move(sink_);
  sink_ = nullptr;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SessionRecord& rec = records[i];
    if (status_ == SessionStatus::kAwaitingRetrain) finish_iteration();
    if (status_ == SessionStatus::kFinished) {
      result.stopped_at = i;
      result.reason = "session already finished";
      break;
    }
    const std::string expected = next_candidate();
    if (rec.word != expected || rec.iteration != state_.iteration) {
      result.stopped_at = i;
      result.reason = "record '" + rec.word + "' does not match expected task '" + expected + "'";
      break;
    }
    const bool counted = rec.label == Label::kMental ? state_.current_pos.size() < cfg_.k1
                                                     : state_.current_neg.size() < cfg_.k2;
    if (counted != rec.counted) {
      result.stopped_at = i;
      result.reason = "counted flag mismatch for '" + rec.word + "'";
      break;
    }
    SessionRecord copy = rec;
    copy.strategy = *candidate_strategy_;
    apply(std::move(copy));
    ++result.applied;
  }
  if (status_ == SessionStatus::kAwaitingRetrain) finish_iteration();
  sink_ = std::move(saved);
  return result;
}

SessionReport Session::report() const {
  SessionReport r;
  r.strategy = std::string(strategy_name(cfg_.strategy.kind));
  r.seed = cfg_.seed;
  r.iterations_planned = cfg_.iterations;
  r.k1 = cfg_.k1;
  r.k2 = cfg_.k2;
  r.max_annotations = cfg_.max_annotations;
  r.iterations = reports_;
  r.final_model = model_;
  return r;
}

bool Session::conserved() const {
  return initial_pool_size_ == state_.unlabeled.size() + state_.labeled.size() +
                                   state_.current_pos.size() + state_.current_neg.size() +
                                   state_.archive_only();
}

std::size_t run_iteration(Session& session, Oracle& oracle) {
  if (session.status() == SessionStatus::kAwaitingRetrain) session.finish_iteration();
  if (session.status() != SessionStatus::kAnnotating) throw Error("session has no iteration to run");
  while (true) {
    const std::string word = session.next_candidate();
    const Label label = oracle.annotate(word);
    if (session.submit(word, label).iteration_complete) break;
  }
  const std::size_t m = session.state().iteration_annotations;
  session.finish_iteration();
  return m;
}

SessionReport run_session(Session& session, Oracle& oracle) {
  if (session.status() == SessionStatus::kAwaitingRetrain) session.finish_iteration();
  while (session.status() == SessionStatus::kAnnotating) run_iteration(session, oracle);
  return session.report();
}

}  // namespace lexloop
