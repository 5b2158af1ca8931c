#include "lexloop/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "lexloop/error.h"
#include "text_util.h"

namespace lexloop {

ConfusionCounts confusion_from_labels(std::span<const Label> predicted, std::span<const Label> gold) {
  if (predicted.size() != gold.size()) throw DimensionError("confusion: length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool pred_pos = predicted[i] == Label::kMental;
    const bool gold_pos = gold[i] == Label::kMental;
    if (pred_pos && gold_pos) ++c.tp;
    else if (pred_pos) ++c.fp;
    else if (gold_pos) ++c.fn;
    else ++c.tn;
  }
  return c;
}

ConfusionCounts confusion(const ClassifierModel& model, std::span<const LabeledExample> testset) {
  if (testset.empty()) throw Error("confusion: empty testset");
  std::vector<Label> predicted, gold;
  predicted.reserve(testset.size());
  gold.reserve(testset.size());
  for (const auto& ex : testset) {
    predicted.push_back(predict_class(model, ex.features));
    gold.push_back(ex.label);
  }
  return confusion_from_labels(predicted, gold);
}

ClassMetrics prf1(const ConfusionCounts& counts, Label cls) {
  const bool mental = cls == Label::kMental;
  const double tp = static_cast<double>(mental ? counts.tp : counts.tn);
  const double fp = static_cast<double>(mental ? counts.fp : counts.fn);
  const double fn = static_cast<double>(mental ? counts.fn : counts.fp);
  ClassMetrics m;
  if (tp + fp > 0) m.precision = tp / (tp + fp);
  else m.precision_undefined = true;
  if (tp + fn > 0) m.recall = tp / (tp + fn);
  else m.recall_undefined = true;
  if (m.precision + m.recall > 0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  else m.f1_undefined = true;
  return m;
}

TestMetrics evaluate(const ClassifierModel& model, std::span<const LabeledExample> testset) {
  TestMetrics t;
  t.counts = confusion(model, testset);
  t.mental = prf1(t.counts, Label::kMental);
  t.physical = prf1(t.counts, Label::kPhysical);
  return t;
}

AggregateTable aggregate_runs(std::span<const SessionReport> reports) {
  if (reports.empty()) throw Error("aggregate_runs: no reports");
  const std::size_t n_iter = reports.front().iterations.size();
  for (const auto& r : reports) {
    if (r.iterations.size() != n_iter) throw Error("aggregate_runs: mismatched iteration counts");
  }
  AggregateTable table;
  table.strategy = reports.front().strategy;
  table.runs = reports.size();
  const double n = static_cast<double>(reports.size());
  for (std::size_t i = 0; i < n_iter; ++i) {
    AggregateRow row;
    row.iteration = reports.front().iterations[i].iteration;
    row.runs = reports.size();
    row.min_annotations = reports.front().iterations[i].annotations;
    row.max_annotations = row.min_annotations;
    bool all_metrics = true;
    MetricMeans sums;
    for (const auto& r : reports) {
      const IterationReport& it = r.iterations[i];
      row.mean_annotations += static_cast<double>(it.annotations);
      row.min_annotations = std::min(row.min_annotations, it.annotations);
      row.max_annotations = std::max(row.max_annotations, it.annotations);
      row.mean_labeled += static_cast<double>(it.labeled_size);
      row.enough_samples = row.enough_samples && it.quotas_met;
      if (!it.metrics) {
        all_metrics = false;
        continue;
      }
      sums.mental_precision += it.metrics->mental.precision;
      sums.mental_recall += it.metrics->mental.recall;
      sums.mental_f1 += it.metrics->mental.f1;
      sums.physical_precision += it.metrics->physical.precision;
      sums.physical_recall += it.metrics->physical.recall;
      sums.physical_f1 += it.metrics->physical.f1;
    }
    row.mean_annotations /= n;
    row.mean_labeled /= n;
    if (all_metrics) {
      for (double* v : {&sums.mental_precision, &sums.mental_recall, &sums.mental_f1,
                        &sums.physical_precision, &sums.physical_recall, &sums.physical_f1}) {
        *v /= n;
      }
      row.metrics = sums;
    }
    table.rows.push_back(row);
  }
  return table;
}

std::string format_range(std::size_t min, std::size_t max) {
  if (min == max) return std::to_string(min);
  return std::to_string(min) + "~" + std::to_string(max);
}

std::string format_metric(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::string format_percent(double fraction) {
  return std::to_string(static_cast<long long>(std::llround(fraction * 100.0))) + "%";
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "table") return ReportFormat::kTable;
  if (name == "records") return ReportFormat::kRecords;
  return std::nullopt;
}

namespace {

using nlohmann::ordered_json;

ordered_json class_json(const ClassMetrics& m) {
  return ordered_json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                      {"undefined", m.precision_undefined || m.recall_undefined || m.f1_undefined}};
}

ordered_json metrics_json(const TestMetrics& t) {
  return ordered_json{{"tp", t.counts.tp},       {"fp", t.counts.fp},
                      {"fn", t.counts.fn},       {"tn", t.counts.tn},
                      {"mental", class_json(t.mental)}, {"physical", class_json(t.physical)}};
}

std::string format_fixed(double value, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

}  // namespace

void write_metrics(std::ostream& out, const TestMetrics& metrics, ReportFormat format) {
  if (format == ReportFormat::kRecords) {
    out << metrics_json(metrics).dump() << '\n';
    return;
  }
  const auto& c = metrics.counts;
  out << "tp " << c.tp << "  fp " << c.fp << "  fn " << c.fn << "  tn " << c.tn << '\n';
  out << "class      precision  recall     f1\n";
  for (auto [name, m] : {std::pair{"mental  ", metrics.mental}, std::pair{"physical", metrics.physical}}) {
    out << name << "   " << pad(format_metric(m.precision), 9) << "  " << pad(format_metric(m.recall), 6)
        << "  " << pad(format_metric(m.f1), 5) << '\n';
  }
}

void write_session_report(std::ostream& out, const SessionReport& report, ReportFormat format) {
  if (format == ReportFormat::kRecords) {
    out << ordered_json{{"type", "session"},
                        {"strategy", report.strategy},
                        {"seed", report.seed},
                        {"T", report.iterations_planned},
                        {"K1", report.k1},
                        {"K2", report.k2},
                        {"M", report.max_annotations}}
               .dump()
        << '\n';
    for (const auto& it : report.iterations) {
      ordered_json j{{"type", "iteration"},
                     {"iteration", it.iteration},
                     {"m", it.annotations},
                     {"positives", it.positives},
                     {"negatives", it.negatives},
                     {"labeled", it.labeled_size},
                     {"archive_only", it.archive_only},
                     {"quotas_met", it.quotas_met},
                     {"pool_exhausted", it.pool_exhausted},
                     {"retrained", it.retrained}};
      if (it.metrics) j["metrics"] = metrics_json(*it.metrics);
      out << j.dump() << '\n';
    }
    return;
  }
  out << "strategy " << report.strategy << "  seed " << report.seed << "  T=" << report.iterations_planned
      << " K1=" << report.k1 << " K2=" << report.k2 << " M=" << report.max_annotations << '\n';
  out << "iter     m  pos  neg  labeled  archive  enough  mental_f1  physical_f1\n";
  for (const auto& it : report.iterations) {
    out << pad(std::to_string(it.iteration), 4) << pad(std::to_string(it.annotations), 6)
        << pad(std::to_string(it.positives), 5) << pad(std::to_string(it.negatives), 5)
        << pad(std::to_string(it.labeled_size), 9) << pad(std::to_string(it.archive_only), 9)
        << pad(it.quotas_met ? "yes" : "no", 8);
    if (it.metrics) {
      out << pad(format_metric(it.metrics->mental.f1), 11) << pad(format_metric(it.metrics->physical.f1), 13);
    } else {
      out << pad("-", 11) << pad("-", 13);
    }
    out << '\n';
  }
}

void write_aggregate(std::ostream& out, const AggregateTable& table, ReportFormat format) {
  if (format == ReportFormat::kRecords) {
    out << ordered_json{{"type", "aggregate"}, {"strategy", table.strategy}, {"runs", table.runs}}.dump()
        << '\n';
    for (const auto& row : table.rows) {
      ordered_json j{{"type", "aggregate_iteration"},
                     {"iteration", row.iteration},
                     {"mean_m", row.mean_annotations},
                     {"min_m", row.min_annotations},
                     {"max_m", row.max_annotations},
                     {"mean_labeled", row.mean_labeled},
                     {"enough_samples", row.enough_samples}};
      if (row.metrics) {
        const MetricMeans& m = *row.metrics;
        j["mental"] = ordered_json{{"precision", m.mental_precision},
                                   {"recall", m.mental_recall},
                                   {"f1", m.mental_f1}};
        j["physical"] = ordered_json{{"precision", m.physical_precision},
                                     {"recall", m.physical_recall},
                                     {"f1", m.physical_f1}};
      }
      out << j.dump() << '\n';
    }
    return;
  }
  out << "strategy " << table.strategy << "  runs " << table.runs << '\n';
  out << "iter  words/iter  mean_m  enough  mental_P  mental_R  mental_F1  physical_P  physical_R  physical_F1\n";
  for (const auto& row : table.rows) {
    out << pad(std::to_string(row.iteration), 4)
        << pad(format_range(row.min_annotations, row.max_annotations), 12)
        << pad(format_fixed(row.mean_annotations, 1), 8) << pad(row.enough_samples ? "yes" : "no", 8);
    if (row.metrics) {
      const MetricMeans& m = *row.metrics;
      out << pad(format_metric(m.mental_precision), 10) << pad(format_metric(m.mental_recall), 10)
          << pad(format_metric(m.mental_f1), 11) << pad(format_metric(m.physical_precision), 12)
          << pad(format_metric(m.physical_recall), 12) << pad(format_metric(m.physical_f1), 13);
    }
    out << '\n';
  }
}

DisagreementStats disagreement_stats(std::span<const DualAnnotation> annotations) {
  DisagreementStats stats;
  for (const auto& a : annotations) {
    if (!a.first || !a.second) {
      stats.skipped.push_back(a.word);
      continue;
    }
    const bool differ = *a.first != *a.second;
    std::optional<Label> cls = a.adjudicated;
    if (!cls && !differ) cls = a.first;
    if (!cls) {
      stats.skipped.push_back(a.word);
      continue;
    }
    ClassDisagreement& bucket = *cls == Label::kMental ? stats.mental : stats.physical;
    ++bucket.total;
    ++stats.overall.total;
    if (differ) {
      ++bucket.disagreements;
      ++stats.overall.disagreements;
    }
  }
  return stats;
}

std::vector<DualAnnotation> parse_dual_annotations(std::istream& in, const std::string& source) {
  std::vector<DualAnnotation> out;
  std::string line;
  std::size_t line_no = 0;
  auto label_or_missing = [&](std::string_view field) -> std::optional<Label> {
    field = detail::trim(field);
    if (field.empty() || field == "-") return std::nullopt;
    auto label = parse_label(field);
    if (!label) throw ParseError(source, line_no, "unknown label '" + std::string(field) + "'");
    return label;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty() || line.front() == '#') continue;
    auto fields = detail::split(line, '\t');
    if (fields.size() < 2 || fields.size() > 4) {
      throw ParseError(source, line_no, "expected word and two or three labels");
    }
    DualAnnotation a;
    a.word = to_lower(detail::trim(fields[0]));
    a.first = label_or_missing(fields[1]);
    if (fields.size() > 2) a.second = label_or_missing(fields[2]);
    if (fields.size() > 3) a.adjudicated = label_or_missing(fields[3]);
    out.push_back(std::move(a));
  }
  return out;
}

void write_disagreement_table(std::ostream& out, const DisagreementStats& stats) {
  out << "class     total  disagreement  rate\n";
  auto row = [&](const char* name, const ClassDisagreement& c) {
    out << name << pad(std::to_string(c.total), 7) << pad(std::to_string(c.disagreements), 14)
        << pad(format_percent(c.rate()), 6) << '\n';
  };
  row("mental  ", stats.mental);
  row("physical", stats.physical);
  row("overall ", stats.overall);
}

}  // namespace lexloop
