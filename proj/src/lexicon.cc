#include "lexloop/lexicon.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "lexloop/error.h"
#include "text_util.h"

namespace lexloop {

std::optional<PartOfSpeech> parse_pos_code(std::string_view code) {
  if (code.size() != 1) return std::nullopt;
  switch (code[0]) {
    case 'a':
    case 's':
      return PartOfSpeech::kAdjective;
    case 'n':
      return PartOfSpeech::kNoun;
    case 'v':
      return PartOfSpeech::kVerb;
    case 'r':
      return PartOfSpeech::kAdverb;
    default:
      return std::nullopt;
  }
}

char pos_code(PartOfSpeech pos) {
  switch (pos) {
    case PartOfSpeech::kAdjective:
      return 'a';
    case PartOfSpeech::kNoun:
      return 'n';
    case PartOfSpeech::kVerb:
      return 'v';
    case PartOfSpeech::kAdverb:
      return 'r';
  }
  return '?';
}

std::vector<std::string> LexiconEntry::glosses_for(PartOfSpeech pos) const {
  std::vector<std::string> out;
  for (const auto& g : glosses) {
    if (g.pos == pos) out.push_back(g.text);
  }
  return out;
}

std::string LexiconEntry::aggregated_gloss() const {
  std::string out;
  for (const auto& g : glosses) {
    if (!out.empty()) out += "; ";
    out += g.text;
  }
  return out;
}

void Lexicon::add(std::string_view word, PartOfSpeech pos, std::string_view gloss) {
  std::string key = to_lower(detail::trim(word));
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    LexiconEntry entry;
    entry.word = key;
    it = entries_.emplace(key, std::move(entry)).first;
  }
  it->second.pos_flags.set(pos);
  it->second.glosses.push_back(Gloss{pos, std::string(detail::trim(gloss))});
}

const LexiconEntry* Lexicon::find(std::string_view word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

bool Lexicon::has_pos(std::string_view word, PartOfSpeech pos) const {
  const LexiconEntry* entry = find(word);
  return entry != nullptr && entry->pos_flags.has(pos);
}

std::vector<std::string> Lexicon::words_with(PartOfSpeech pos) const {
  std::vector<std::string> out;
  for (const auto& [word, entry] : entries_) {
    if (entry.pos_flags.has(pos)) out.push_back(word);
  }
  return out;
}

Lexicon parse_gloss_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open gloss lexicon: " + path.string());
  return parse_gloss_lexicon(in, path.string());
}

Lexicon parse_gloss_lexicon(std::istream& in, const std::string& source) {
  Lexicon lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view view = line;
    if (detail::trim(view).empty() || view.front() == '#') continue;

    auto fields = detail::split(view, '\t');
    if (fields.size() != 3) {
      throw ParseError(source, line_no, "expected 3 tab-separated fields, got " +
                                            std::to_string(fields.size()));
    }
    std::string_view word = detail::trim(fields[0]);
    if (word.empty()) throw ParseError(source, line_no, "empty word");
    if (std::any_of(word.begin(), word.end(),
                    [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
      throw ParseError(source, line_no, "word contains whitespace");
    }
    auto pos = parse_pos_code(detail::trim(fields[1]));
    if (!pos) {
      throw ParseError(source, line_no,
                       "unknown part of speech '" + std::string(fields[1]) + "'");
    }
    std::string_view gloss = detail::trim(fields[2]);
    if (gloss.empty()) throw ParseError(source, line_no, "empty gloss");
    lexicon.add(word, *pos, gloss);
  }
  return lexicon;
}

void write_gloss_lexicon(const Lexicon& lexicon, std::ostream& out) {
  for (const auto& [word, entry] : lexicon) {
    for (const auto& g : entry.glosses) {
      out << word << '\t' << pos_code(g.pos) << '\t' << g.text << '\n';
    }
  }
}

namespace {

double parse_score(std::string_view field, const std::string& source, std::size_t line_no) {
  field = detail::trim(field);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(source, line_no, "bad score '" + std::string(field) + "'");
  }
  return value;
}

std::vector<std::string> parse_synset_terms(std::string_view field) {
  std::vector<std::string> terms;
  for (std::string_view term : detail::split_whitespace(field)) {
    auto hash = term.rfind('#');
    if (hash != std::string_view::npos) term = term.substr(0, hash);
    if (!term.empty()) terms.push_back(to_lower(term));
  }
  return terms;
}

}  // namespace

std::vector<SentiSynset> parse_sentiwordnet(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open SentiWordNet file: " + path.string());
  return parse_sentiwordnet(in, path.string());
}

std::vector<SentiSynset> parse_sentiwordnet(std::istream& in, const std::string& source) {
  constexpr double kTolerance = 1e-6;
  std::vector<SentiSynset> synsets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view view = line;
    if (detail::trim(view).empty() || view.front() == '#') continue;

    auto fields = detail::split(view, '\t');
    if (fields.size() < 5) {
      throw ParseError(source, line_no, "expected 6 tab-separated fields, got " +
                                            std::to_string(fields.size()));
    }
    SentiSynset s;
    auto pos = parse_pos_code(detail::trim(fields[0]));
    if (!pos) throw ParseError(source, line_no, "unknown part of speech");
    s.pos = *pos;
    s.synset_id = std::string(detail::trim(fields[1]));
    s.pos_score = parse_score(fields[2], source, line_no);
    s.neg_score = parse_score(fields[3], source, line_no);
    s.terms = parse_synset_terms(fields[4]);
    if (fields.size() > 5) s.gloss = std::string(detail::trim(fields[5]));

    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(s.pos_score) || !in_unit(s.neg_score)) {
      throw ScoreError(s.synset_id, line_no, "score outside [0,1]");
    }
    if (s.pos_score + s.neg_score > 1.0 + kTolerance) {
      throw ScoreError(s.synset_id, line_no, "PosScore + NegScore exceeds 1");
    }
    s.obj_score = std::max(0.0, 1.0 - s.pos_score - s.neg_score);
    synsets.push_back(std::move(s));
  }
  return synsets;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80 || c == '_'; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      flush();
    } else if (is_word_char(c)) {
      current.push_back(static_cast<char>(c));
    } else {
      const bool joiner = (c == '-' || c == '\'') && !current.empty() && i + 1 < text.size() &&
                          is_word_char(static_cast<unsigned char>(text[i + 1]));
      if (joiner) {
        current.push_back(static_cast<char>(c));
      } else {
        flush();
        tokens.emplace_back(1, static_cast<char>(c));
      }
    }
  }
  flush();
  return tokens;
}

bool is_adjective_tag(std::string_view tag) {
  return tag == "JJ" || tag == "JJR" || tag == "JJS";
}

bool is_noun_tag(std::string_view tag) {
  return tag == "NN" || tag == "NNS" || tag == "NNP" || tag == "NNPS";
}

std::vector<TaggedToken> parse_tagged(std::string_view text) {
  std::vector<TaggedToken> out;
  for (std::string_view item : detail::split_whitespace(text)) {
    auto slash = item.rfind('/');
    if (slash == std::string_view::npos || slash == 0) {
      out.push_back(TaggedToken{std::string(item), std::string(kOtherTag)});
    } else {
      out.push_back(TaggedToken{std::string(item.substr(0, slash)),
                                std::string(item.substr(slash + 1))});
    }
  }
  return out;
}

std::vector<TaggedToken> tag_tokens(std::span<const std::string> tokens, const Lexicon& lexicon) {
  std::vector<TaggedToken> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string lowered = to_lower(tokens[i]);
    const LexiconEntry* entry = lexicon.find(lowered);
    std::string_view tag = kOtherTag;
    if (entry != nullptr) {
      const bool adj = entry->pos_flags.has(PartOfSpeech::kAdjective);
      const bool noun = entry->pos_flags.has(PartOfSpeech::kNoun);
      if (adj && !noun) {
        tag = kAdjectiveTag;
      } else if (noun && !adj) {
        tag = kNounTag;
      } else if (adj && noun) {
        const bool next_is_noun =
            i + 1 < tokens.size() && lexicon.has_pos(to_lower(tokens[i + 1]), PartOfSpeech::kNoun);
        tag = next_is_noun ? kAdjectiveTag : kNounTag;
      }
    }
    out.push_back(TaggedToken{tokens[i], std::string(tag)});
  }
  return out;
}

std::vector<CandidatePair> extract_candidate_pairs(std::span<const TaggedToken> tokens,
                                                   std::string_view review_id) {
  std::vector<CandidatePair> pairs;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (is_adjective_tag(tokens[i].tag) && is_noun_tag(tokens[i + 1].tag)) {
      pairs.push_back(CandidatePair{to_lower(tokens[i].text), to_lower(tokens[i + 1].text),
                                    std::string(review_id)});
    }
  }
  return pairs;
}

std::vector<std::string> validate_and_dedup(std::span<const CandidatePair> pairs,
                                            const Lexicon& lexicon) {
  std::set<std::string> kept;
  for (const auto& pair : pairs) {
    const LexiconEntry* entry = lexicon.find(pair.adjective);
    if (entry == nullptr) continue;
    const bool has_adj_gloss =
        std::any_of(entry->glosses.begin(), entry->glosses.end(),
                    [](const Gloss& g) { return g.pos == PartOfSpeech::kAdjective; });
    if (has_adj_gloss) kept.insert(pair.adjective);
  }
  return {kept.begin(), kept.end()};
}

IngestResult ingest_corpus(std::istream& corpus, const Lexicon& lexicon) {
  IngestResult result;
  std::string line;
  while (std::getline(corpus, line)) {
    ++result.reviews;
    auto tokens = tokenize(line);
    auto tagged = tag_tokens(tokens, lexicon);
    auto pairs = extract_candidate_pairs(tagged, std::to_string(result.reviews));
    result.pairs.insert(result.pairs.end(), std::make_move_iterator(pairs.begin()),
                        std::make_move_iterator(pairs.end()));
  }
  result.adjectives = validate_and_dedup(result.pairs, lexicon);
  return result;
}

}  // namespace lexloop
