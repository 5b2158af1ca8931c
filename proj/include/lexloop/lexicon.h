#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lexloop {

enum class PartOfSpeech : std::uint8_t { kAdjective = 0, kNoun = 1, kVerb = 2, kAdverb = 3 };

// WordNet single-letter codes: a, n, v, r. 's' (adjective satellite) maps to kAdjective.
std::optional<PartOfSpeech> parse_pos_code(std::string_view code);
char pos_code(PartOfSpeech pos);

// Bit set over PartOfSpeech.
class PosFlags {
 public:
  constexpr PosFlags() = default;

  void set(PartOfSpeech pos) { bits_ |= mask(pos); }
  bool has(PartOfSpeech pos) const { return (bits_ & mask(pos)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::uint8_t bits() const { return bits_; }

  friend bool operator==(PosFlags, PosFlags) = default;

 private:
  static constexpr std::uint8_t mask(PartOfSpeech pos) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(pos));
  }
  std::uint8_t bits_ = 0;
};

struct Gloss {
  PartOfSpeech pos;
  std::string text;

  friend bool operator==(const Gloss&, const Gloss&) = default;
};

struct LexiconEntry {
  std::string word;
  PosFlags pos_flags;
  std::vector<Gloss> glosses;  // file order

  std::vector<std::string> glosses_for(PartOfSpeech pos) const;

  // All glosses joined with "; " in file order.
  std::string aggregated_gloss() const;

  friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

// Word -> entry. Immutable once loaded; safe to share across threads.
class Lexicon {
 public:
  using Map = std::map<std::string, LexiconEntry, std::less<>>;

  // Normalizes the word to lowercase and appends the gloss; repeated words merge.
  void add(std::string_view word, PartOfSpeech pos, std::string_view gloss);

  const LexiconEntry* find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word) != nullptr; }
  bool has_pos(std::string_view word, PartOfSpeech pos) const;

  std::vector<std::string> words_with(PartOfSpeech pos) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

  friend bool operator==(const Lexicon&, const Lexicon&) = default;

 private:
  Map entries_;
};

// Gloss lexicon text format: `word<TAB>pos<TAB>gloss` per line, pos in {a,n,v,r}.
// Blank lines and lines starting with '#' are ignored.
Lexicon parse_gloss_lexicon(const std::filesystem::path& path);
Lexicon parse_gloss_lexicon(std::istream& in, const std::string& source = "<stream>");
void write_gloss_lexicon(const Lexicon& lexicon, std::ostream& out);

struct SentiSynset {
  std::string synset_id;
  PartOfSpeech pos = PartOfSpeech::kAdjective;
  double pos_score = 0.0;
  double neg_score = 0.0;
  double obj_score = 1.0;
  std::vector<std::string> terms;  // lowercase, sense suffix ("#1") stripped
  std::string gloss;
};

// SentiWordNet 3.0 TSV: POS, ID, PosScore, NegScore, SynsetTerms, Gloss.
// ObjScore = 1 - PosScore - NegScore. Throws ScoreError on an out-of-range record.
std::vector<SentiSynset> parse_sentiwordnet(const std::filesystem::path& path);
std::vector<SentiSynset> parse_sentiwordnet(std::istream& in, const std::string& source = "<stream>");

// Splits on whitespace; punctuation becomes standalone tokens. A hyphen or
// apostrophe between two word characters stays inside the token ("well-known").
std::vector<std::string> tokenize(std::string_view text);

std::string to_lower(std::string_view text);

inline constexpr std::string_view kAdjectiveTag = "JJ";
inline constexpr std::string_view kNounTag = "NN";
inline constexpr std::string_view kOtherTag = "OTHER";

struct TaggedToken {
  std::string text;
  std::string tag;

  friend bool operator==(const TaggedToken&, const TaggedToken&) = default;
};

bool is_adjective_tag(std::string_view tag);  // JJ, JJR, JJS
bool is_noun_tag(std::string_view tag);       // NN, NNS, NNP, NNPS

// Parses "word/TAG word/TAG ..." (split at the last '/').
std::vector<TaggedToken> parse_tagged(std::string_view text);

// Lexicon-backed tagger:
//   adjective only        -> JJ
//   noun only             -> NN
//   adjective and noun    -> JJ if the next token is noun-flagged, else NN
//   anything else         -> OTHER
std::vector<TaggedToken> tag_tokens(std::span<const std::string> tokens, const Lexicon& lexicon);

struct CandidatePair {
  std::string adjective;
  std::string noun;
  std::string source_review_id;

  friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

// Every adjective-tagged token immediately followed by a noun-tagged token.
std::vector<CandidatePair> extract_candidate_pairs(std::span<const TaggedToken> tokens,
                                                   std::string_view review_id = {});

// Adjectives with at least one adjective gloss, deduplicated and sorted.
std::vector<std::string> validate_and_dedup(std::span<const CandidatePair> pairs,
                                            const Lexicon& lexicon);

struct IngestResult {
  std::vector<CandidatePair> pairs;
  std::vector<std::string> adjectives;
  std::size_t reviews = 0;
};

// Corpus: one review per line; review id is the 1-based line number.
IngestResult ingest_corpus(std::istream& corpus, const Lexicon& lexicon);

}  // namespace lexloop
