#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lexloop/classifier.h"

namespace lexloop {

// Mental is the positive class.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion(const ClassifierModel& model, std::span<const LabeledExample> testset);
ConfusionCounts confusion_from_labels(std::span<const Label> predicted, std::span<const Label> gold);

// A 0/0 ratio is reported as 0 with the matching *_undefined flag set.
struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

// For Physical the roles of tp/tn and fp/fn swap.
ClassMetrics prf1(const ConfusionCounts& counts, Label cls);

struct TestMetrics {
  ConfusionCounts counts;
  ClassMetrics mental;
  ClassMetrics physical;
};

TestMetrics evaluate(const ClassifierModel& model, std::span<const LabeledExample> testset);

struct IterationReport {
  int iteration = 0;
  std::size_t annotations = 0;  // m
  std::size_t positives = 0;    // |D_pos| at iteration end
  std::size_t negatives = 0;    // |D_neg| at iteration end
  std::size_t labeled_size = 0;
  std::size_t archive_only = 0;
  bool quotas_met = false;
  bool pool_exhausted = false;
  bool retrained = false;
  std::optional<TestMetrics> metrics;
};

struct SessionReport {
  std::string strategy;
  std::uint64_t seed = 0;
  int iterations_planned = 0;
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  std::size_t max_annotations = 0;
  std::vector<IterationReport> iterations;
  std::optional<ClassifierModel> final_model;
};

struct MetricMeans {
  double mental_precision = 0.0;
  double mental_recall = 0.0;
  double mental_f1 = 0.0;
  double physical_precision = 0.0;
  double physical_recall = 0.0;
  double physical_f1 = 0.0;
};

struct AggregateRow {
  int iteration = 0;
  std::size_t runs = 0;
  double mean_annotations = 0.0;
  std::size_t min_annotations = 0;
  std::size_t max_annotations = 0;
  double mean_labeled = 0.0;
  bool enough_samples = true;  // every run met both quotas
  std::optional<MetricMeans> metrics;  // present when every run has test metrics
};

struct AggregateTable {
  std::string strategy;
  std::size_t runs = 0;
  std::vector<AggregateRow> rows;
};

// Arithmetic means per iteration. Throws Error on an empty list or on
// reports with differing iteration counts.
AggregateTable aggregate_runs(std::span<const SessionReport> reports);

// "60~70"; a single value when min == max.
std::string format_range(std::size_t min, std::size_t max);

std::string format_metric(double value);      // two decimals
std::string format_percent(double fraction);  // integer percent, "12%"

enum class ReportFormat { kTable, kRecords };
std::optional<ReportFormat> parse_report_format(std::string_view name);

void write_session_report(std::ostream& out, const SessionReport& report, ReportFormat format);
void write_aggregate(std::ostream& out, const AggregateTable& table, ReportFormat format);
void write_metrics(std::ostream& out, const TestMetrics& metrics, ReportFormat format);

struct DualAnnotation {
  std::string word;
  std::optional<Label> first;
  std::optional<Label> second;
  std::optional<Label> adjudicated;
};

struct ClassDisagreement {
  std::size_t total = 0;
  std::size_t disagreements = 0;
  double rate() const {
    return total == 0 ? 0.0 : static_cast<double>(disagreements) / static_cast<double>(total);
  }
};

struct DisagreementStats {
  ClassDisagreement mental;
  ClassDisagreement physical;
  ClassDisagreement overall;
  std::vector<std::string> skipped;  // words missing a label
};

// Class attribution uses the adjudicated label, else the agreed label.
// A word missing either annotation, or disagreeing without adjudication, is skipped.
DisagreementStats disagreement_stats(std::span<const DualAnnotation> annotations);

// `word<TAB>label1<TAB>label2[<TAB>adjudicated]`.
std::vector<DualAnnotation> parse_dual_annotations(std::istream& in,
                                                   const std::string& source = "<stream>");

void write_disagreement_table(std::ostream& out, const DisagreementStats& stats);

}  // namespace lexloop
