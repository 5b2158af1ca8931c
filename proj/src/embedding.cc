#include "lexloop/embedding.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

#include "lexloop/error.h"
#include "text_util.h"

namespace lexloop {

EmbeddingStore::EmbeddingStore(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw DimensionError("embedding dimension must be positive");
}

void EmbeddingStore::insert(std::string token, FeatureVector values) {
  if (values.size() != dim_) {
    throw DimensionError("vector for '" + token + "' has length " +
                         std::to_string(values.size()) + ", expected " + std::to_string(dim_));
  }
  vectors_.insert_or_assign(std::move(token), std::move(values));
}

const FeatureVector* EmbeddingStore::find(std::string_view token) const {
  auto it = vectors_.find(token);
  return it == vectors_.end() ? nullptr : &it->second;
}

std::vector<std::string> EmbeddingStore::tokens() const {
  std::vector<std::string> out;
  out.reserve(vectors_.size());
  for (const auto& [token, _] : vectors_) out.push_back(token);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

template <typename T>
bool parse_number(std::string_view field, T& value) {
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  return ec == std::errc() && ptr == field.data() + field.size();
}

}  // namespace

EmbeddingStore load_vectors(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open vector file: " + path.string());
  return load_vectors(in, path.string(), warnings);
}

EmbeddingStore load_vectors(std::istream& in, const std::string& source,
                            std::vector<std::string>* warnings) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty vector file");
  auto header = detail::split_whitespace(line);
  std::size_t count = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !parse_number(header[0], count) || !parse_number(header[1], dim) ||
      dim == 0) {
    throw ParseError(source, 1, "header must be \"count dim\"");
  }

  EmbeddingStore store(dim);
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = detail::split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() != dim + 1) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(dim) + " values, got " +
                           std::to_string(fields.size() - 1));
    }
    FeatureVector values(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      if (!parse_number(fields[i + 1], values[i]) || !std::isfinite(values[i])) {
        throw ParseError(source, line_no, "bad value '" + std::string(fields[i + 1]) + "'");
      }
    }
    std::string token(fields[0]);
    if (store.find(token) != nullptr) {
      std::string message = source + ":" + std::to_string(line_no) + ": duplicate token '" +
                            token + "', keeping last";
      if (warnings != nullptr) {
        warnings->push_back(std::move(message));
      } else {
        std::cerr << "warning: " << message << '\n';
      }
    }
    store.insert(std::move(token), std::move(values));
    ++rows;
  }
  if (rows != count) {
    throw ParseError(source, line_no,
                     "header declares " + std::to_string(count) + " rows, found " +
                         std::to_string(rows));
  }
  return store;
}

void write_vectors(const EmbeddingStore& store, std::ostream& out) {
  const auto tokens = store.tokens();
  out << tokens.size() << ' ' << store.dim() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& token : tokens) {
    out << token;
    for (double v : *store.find(token)) out << ' ' << v;
    out << '\n';
  }
}

namespace {

bool is_punctuation_token(std::string_view token) {
  return std::all_of(token.begin(), token.end(),
                     [](char c) { return std::ispunct(static_cast<unsigned char>(c)); });
}

}  // namespace

WordEmbedding embed_word(std::string_view word, const Lexicon& lexicon,
                         const EmbeddingStore& store) {
  const LexiconEntry* entry = lexicon.find(word);
  if (entry == nullptr) throw NotFoundError("word not in lexicon: " + std::string(word));

  WordEmbedding result;
  result.values.assign(store.dim(), 0.0);
  for (const auto& token : tokenize(entry->aggregated_gloss())) {
    if (is_punctuation_token(token)) continue;
    ++result.tokens_total;
    const FeatureVector* v = store.find(to_lower(token));
    if (v == nullptr) continue;
    ++result.tokens_found;
    for (std::size_t i = 0; i < v->size(); ++i) result.values[i] += (*v)[i];
  }
  if (result.tokens_found > 0) {
    const double n = static_cast<double>(result.tokens_found);
    for (double& x : result.values) x /= n;
  } else if (const FeatureVector* own = store.find(entry->word)) {
    result.values = *own;
    result.used_word_vector = true;
  }
  return result;
}

FeatureVector strategy_vector(std::string_view word, const Lexicon& lexicon,
                              const EmbeddingStore& store) {
  if (const FeatureVector* own = store.find(word)) return *own;
  return embed_word(word, lexicon, store).values;
}

double l2_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionError("l2_distance: dimension mismatch " + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

FeatureTable build_feature_table(std::span<const std::string> words, const Lexicon& lexicon,
                                 const EmbeddingStore& store) {
  FeatureTable table;
  for (const auto& word : words) {
    WordEmbedding gloss = embed_word(word, lexicon, store);
    WordFeatures wf;
    const FeatureVector* own = store.find(word);
    wf.embedding = own != nullptr ? *own : gloss.values;
    wf.features = std::move(gloss.values);
    wf.coverage = gloss.coverage();
    table.emplace(word, std::move(wf));
  }
  return table;
}

FeatureTable feature_table_from_store(const EmbeddingStore& store) {
  FeatureTable table;
  for (const auto& token : store.tokens()) {
    const FeatureVector& v = *store.find(token);
    table.emplace(token, WordFeatures{v, v, 1.0});
  }
  return table;
}

}  // namespace lexloop
