#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexloop/classifier.h"
#include "lexloop/embedding.h"
#include "lexloop/eval.h"
#include "lexloop/strategies.h"

namespace lexloop {

struct IterationConfig {
  int iterations = 5;                // T
  std::size_t k1 = 20;               // positive (Mental) quota
  std::size_t k2 = 20;               // negative (Physical) quota
  std::size_t max_annotations = 120; // M
  StrategySpec strategy;
  std::uint64_t seed = 0;
  bool warm_start = false;  // retrain from the previous winner instead of from scratch
  TrainConfig train;

  void validate() const;
};

// One annotation, as appended to annotations.log.
struct SessionRecord {
  int iteration = 0;  // 0-based t
  std::string word;
  Label label = Label::kPhysical;
  StrategyKind strategy = StrategyKind::kRandom;  // strategy that produced the word
  bool counted = false;  // entered D_pos / D_neg (and so D_labeled)
  std::string timestamp;
  std::string annotator;
  std::string note;

  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

struct LabeledWord {
  std::string word;
  Label label = Label::kPhysical;
  int iteration = 0;

  friend bool operator==(const LabeledWord&, const LabeledWord&) = default;
};

struct PoolState {
  std::vector<std::string> unlabeled;  // U, sorted
  std::vector<LabeledWord> labeled;    // D_labeled
  std::vector<LabeledWord> current_pos;
  std::vector<LabeledWord> current_neg;
  std::vector<SessionRecord> archive;  // every annotation in order
  int iteration = 0;                   // t
  std::size_t iteration_annotations = 0;  // m

  std::size_t archive_only() const;  // annotations not counted into a buffer

  friend bool operator==(const PoolState&, const PoolState&) = default;
};

// Label source. Throwing aborts the current annotation; session state is left
// as it was after the last recorded annotation.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual Label annotate(const std::string& word) = 0;
};

// Simulated annotator backed by a ground-truth map.
class TruthOracle : public Oracle {
 public:
  explicit TruthOracle(std::map<std::string, Label, std::less<>> truth) : truth_(std::move(truth)) {}
  Label annotate(const std::string& word) override;
  const std::map<std::string, Label, std::less<>>& truth() const { return truth_; }

 private:
  std::map<std::string, Label, std::less<>> truth_;
};

enum class SessionStatus {
  kAnnotating,
  kAwaitingRetrain,  // iteration closed, D_labeled updated, model not yet trained
  kFinished,
};

std::string_view status_name(SessionStatus status);

struct SubmitOutcome {
  bool counted = false;
  bool iteration_complete = false;
};

// Snapshot handed to a (possibly background) trainer.
struct RetrainJob {
  int iteration = 0;
  std::vector<LabeledExample> data;
  TrainConfig config;
  std::optional<ClassifierModel> warm_start;
  std::vector<LabeledExample> testset;
};

struct RetrainOutcome {
  int iteration = 0;
  std::optional<ClassifierModel> model;  // empty when training was impossible
  std::optional<TrainHistory> history;
  std::string skipped_reason;
};

RetrainOutcome run_retrain(const RetrainJob& job);

// The annotate-then-check acquisition loop over a fixed pool. Not internally
// synchronized: one writer at a time.
class Session {
 public:
  using RecordSink = std::function<void(const SessionRecord&)>;
  using Clock = std::function<std::string()>;

  // Pool words must all be present in `features`; testset examples carry
  // their own features.
  Session(IterationConfig cfg, FeatureTable features, std::vector<std::string> pool,
          std::vector<LabeledExample> testset = {});

  const IterationConfig& config() const { return cfg_; }
  const PoolState& state() const { return state_; }
  const FeatureTable& features() const { return features_; }
  std::size_t initial_pool_size() const { return initial_pool_size_; }
  SessionStatus status() const { return status_; }
  const ClassifierModel* model() const { return model_ ? &*model_ : nullptr; }
  const std::vector<IterationReport>& iteration_reports() const { return reports_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Called with every record before state changes; a throwing sink rejects the annotation.
  void set_record_sink(RecordSink sink) { sink_ = std::move(sink); }
  void set_clock(Clock clock) { clock_ = std::move(clock); }

  // Current task word. Repeated calls return the same word until it is labeled.
  // Throws Error unless status() is kAnnotating.
  std::string next_candidate();
  std::optional<StrategyKind> candidate_strategy() const { return candidate_strategy_; }

  // Labels the current task word. ConflictError when `word` is not the current
  // task (including any previously labeled word).
  SubmitOutcome submit(std::string_view word, Label label, std::string_view annotator = "oracle",
                       std::string_view note = {});

  RetrainJob prepare_retrain() const;
  // Stores the outcome, records the iteration report and advances t.
  void install(const RetrainOutcome& outcome);
  // prepare_retrain + run_retrain + install.
  void finish_iteration();

  struct ReplayResult {
    std::size_t applied = 0;
    std::optional<std::size_t> stopped_at;  // index of the first rejected record
    std::string reason;
  };
  // Re-applies logged records in order; stops at the first record that does
  // not match the deterministic candidate sequence.
  ReplayResult replay(std::span<const SessionRecord> records);

  std::vector<LabeledExample> labeled_examples() const;
  SessionReport report() const;

  // |U_initial| == |U| + |D_labeled| + |buffers| + |archive-only|.
  bool conserved() const;

 private:
  PoolView make_view() const;
  void close_iteration(bool pool_exhausted);
  SubmitOutcome apply(SessionRecord record);

  IterationConfig cfg_;
  FeatureTable features_;
  std::vector<LabeledExample> testset_;
  PoolState state_;
  std::size_t initial_pool_size_ = 0;
  SessionStatus status_ = SessionStatus::kAnnotating;
  std::mt19937_64 rng_;
  std::optional<std::string> candidate_;
  std::optional<StrategyKind> candidate_strategy_;
  std::optional<ClassifierModel> model_;
  std::vector<IterationReport> reports_;
  std::optional<IterationReport> pending_report_;
  std::vector<std::string> warnings_;
  RecordSink sink_;
  Clock clock_;
};

// Runs one iteration to completion with the oracle, then retrains. Returns m.
std::size_t run_iteration(Session& session, Oracle& oracle);

// Runs every remaining iteration.
SessionReport run_session(Session& session, Oracle& oracle);

std::string utc_timestamp();

}  // namespace lexloop
