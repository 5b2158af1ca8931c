#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "lexloop/classifier.h"
#include "lexloop/eval.h"
#include "lexloop/lexicon.h"

namespace lexloop {

enum class SynsetClass { kSubSyn, kObjSyn };
enum class Subjectivity { kSubjective = 0, kObjective = 1, kDual = 2 };

std::string_view subjectivity_name(Subjectivity s);

// SubSyn iff max(PosScore, NegScore) > ObjScore; ties go to ObjSyn.
SynsetClass classify_synset(const SentiSynset& synset);

struct WordSubjectivity {
  std::string word;
  Subjectivity label = Subjectivity::kObjective;
  std::size_t subsyn_count = 0;
  std::size_t objsyn_count = 0;
};

// Throws NotFoundError ("NotInLexicon") when `synsets` is empty.
WordSubjectivity classify_word(std::string_view word, std::span<const SentiSynset> synsets);

using SubjectivityMap = std::map<std::string, WordSubjectivity, std::less<>>;

// Groups adjective synsets by member term and classifies every term.
SubjectivityMap classify_adjectives(std::span<const SentiSynset> synsets);

struct CrossTab {
  // rows: Mental, Physical; columns: Subjective, Objective, Dual
  std::array<std::array<std::size_t, 3>, 2> counts{};
  std::size_t mpc_only = 0;  // labeled words missing from SentiWordNet
  std::size_t swn_only = 0;  // SentiWordNet words without an MPC label

  std::size_t row_total(Label row) const;
  double fraction(Label row, Subjectivity col) const;  // 0 for an empty row
};

// Throws Error when the two word sets do not intersect.
CrossTab cross_tab(const std::map<std::string, Label, std::less<>>& mpc_labels,
                   const SubjectivityMap& subjectivity);

void write_cross_tab(std::ostream& out, const CrossTab& table, ReportFormat format);

}  // namespace lexloop
