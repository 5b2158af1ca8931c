#include "lexloop/senticompare.h"

#include <algorithm>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "lexloop/error.h"

namespace lexloop {

std::string_view subjectivity_name(Subjectivity s) {
  switch (s) {
    case Subjectivity::kSubjective:
      return "subjective";
    case Subjectivity::kObjective:
      return "objective";
    case Subjectivity::kDual:
      return "dual";
  }
  return "unknown";
}

SynsetClass classify_synset(const SentiSynset& synset) {
  return std::max(synset.pos_score, synset.neg_score) > synset.obj_score ? SynsetClass::kSubSyn
                                                                         : SynsetClass::kObjSyn;
}

WordSubjectivity classify_word(std::string_view word, std::span<const SentiSynset> synsets) {
  if (synsets.empty()) throw NotFoundError("NotInLexicon: " + std::string(word));
  WordSubjectivity w;
  w.word = std::string(word);
  for (const auto& s : synsets) {
    (classify_synset(s) == SynsetClass::kSubSyn ? w.subsyn_count : w.objsyn_count) += 1;
  }
  if (w.subsyn_count > 0 && w.objsyn_count > 0) {
    w.label = Subjectivity::kDual;
  } else if (w.subsyn_count > 0) {
    w.label = Subjectivity::kSubjective;
  } else {
    w.label = Subjectivity::kObjective;
  }
  return w;
}

SubjectivityMap classify_adjectives(std::span<const SentiSynset> synsets) {
  std::map<std::string, std::vector<SentiSynset>, std::less<>> by_term;
  for (const auto& s : synsets) {
    if (s.pos != PartOfSpeech::kAdjective) continue;
    for (const auto& term : s.terms) {
      auto& list = by_term[term];
      // A term listed twice in one synset counts once.
      if (list.empty() || list.back().synset_id != s.synset_id) list.push_back(s);
    }
  }
  SubjectivityMap out;
  for (const auto& [term, list] : by_term) out.emplace(term, classify_word(term, list));
  return out;
}

std::size_t CrossTab::row_total(Label row) const {
  const auto& r = counts[row == Label::kMental ? 0 : 1];
  return r[0] + r[1] + r[2];
}

double CrossTab::fraction(Label row, Subjectivity col) const {
  const std::size_t total = row_total(row);
  if (total == 0) return 0.0;
  return static_cast<double>(counts[row == Label::kMental ? 0 : 1][static_cast<int>(col)]) /
         static_cast<double>(total);
}

CrossTab cross_tab(const std::map<std::string, Label, std::less<>>& mpc_labels,
                   const SubjectivityMap& subjectivity) {
  CrossTab table;
  std::size_t matched = 0;
  for (const auto& [word, label] : mpc_labels) {
    auto it = subjectivity.find(word);
    if (it == subjectivity.end()) {
      ++table.mpc_only;
      continue;
    }
    ++matched;
    table.counts[label == Label::kMental ? 0 : 1][static_cast<int>(it->second.label)] += 1;
  }
  table.swn_only = subjectivity.size() - matched;
  if (matched == 0) throw Error("cross_tab: no word appears in both inputs");
  return table;
}

void write_cross_tab(std::ostream& out, const CrossTab& table, ReportFormat format) {
  constexpr Subjectivity kCols[] = {Subjectivity::kSubjective, Subjectivity::kObjective,
                                    Subjectivity::kDual};
  if (format == ReportFormat::kRecords) {
    for (Label row : {Label::kMental, Label::kPhysical}) {
      nlohmann::ordered_json j{{"type", "crosstab_row"}, {"class", label_name(row)},
                               {"total", table.row_total(row)}};
      for (Subjectivity col : kCols) {
        j[std::string(subjectivity_name(col))] = {
            {"count", table.counts[row == Label::kMental ? 0 : 1][static_cast<int>(col)]},
            {"fraction", table.fraction(row, col)}};
      }
      out << j.dump() << '\n';
    }
    out << nlohmann::ordered_json{{"type", "crosstab_excluded"},
                                  {"mpc_only", table.mpc_only},
                                  {"swn_only", table.swn_only}}
               .dump()
        << '\n';
    return;
  }
  out << "class     subjective  objective  dual  total\n";
  for (Label row : {Label::kMental, Label::kPhysical}) {
    std::string line = row == Label::kMental ? "mental  " : "physical";
    for (Subjectivity col : kCols) {
      std::string cell = format_percent(table.fraction(row, col));
      const std::size_t width = col == Subjectivity::kSubjective ? 12 : col == Subjectivity::kObjective ? 11 : 6;
      line += std::string(width > cell.size() ? width - cell.size() : 0, ' ') + cell;
    }
    std::string total = std::to_string(table.row_total(row));
    line += std::string(total.size() < 7 ? 7 - total.size() : 0, ' ') + total;
    out << line << '\n';
  }
  out << "excluded: " << table.mpc_only << " labeled words not in SentiWordNet, " << table.swn_only
      << " SentiWordNet adjectives without a label\n";
}

}  // namespace lexloop
