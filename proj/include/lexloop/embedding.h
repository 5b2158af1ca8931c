#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexloop/lexicon.h"

namespace lexloop {

using FeatureVector = std::vector<double>;

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
};

// Token -> vector, all of length dim(). Immutable after load.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

  // Replaces an existing token. Throws DimensionError on a length mismatch.
  void insert(std::string token, FeatureVector values);
  const FeatureVector* find(std::string_view token) const;

  // Tokens in lexicographic order.
  std::vector<std::string> tokens() const;

 private:
  std::size_t dim_;
  std::unordered_map<std::string, FeatureVector, StringHash, std::equal_to<>> vectors_;
};

// Text format: header "count dim", then `token v1 ... vdim` per line.
// Duplicate tokens keep the last row and append a warning; when `warnings`
// is null they go to stderr.
EmbeddingStore load_vectors(const std::filesystem::path& path,
                            std::vector<std::string>* warnings = nullptr);
EmbeddingStore load_vectors(std::istream& in, const std::string& source = "<stream>",
                            std::vector<std::string>* warnings = nullptr);
void write_vectors(const EmbeddingStore& store, std::ostream& out);

struct WordEmbedding {
  FeatureVector values;
  std::size_t tokens_found = 0;
  std::size_t tokens_total = 0;
  bool used_word_vector = false;  // no gloss token was in the store

  double coverage() const {
    return tokens_total == 0 ? 0.0 : static_cast<double>(tokens_found) / tokens_total;
  }
};

// Mean of the store vectors of the word's aggregated gloss tokens. Throws
// NotFoundError when the word is not in the lexicon.
WordEmbedding embed_word(std::string_view word, const Lexicon& lexicon,
                         const EmbeddingStore& store);

// Vector used for strategy-space geometry: the word's own row, else the gloss mean.
FeatureVector strategy_vector(std::string_view word, const Lexicon& lexicon,
                              const EmbeddingStore& store);

double l2_distance(std::span<const double> x, std::span<const double> y);

// Classifier input plus strategy-space embedding for one pool word.
struct WordFeatures {
  FeatureVector features;
  FeatureVector embedding;
  double coverage = 1.0;
};

using FeatureTable = std::map<std::string, WordFeatures, std::less<>>;

FeatureTable build_feature_table(std::span<const std::string> words, const Lexicon& lexicon,
                                 const EmbeddingStore& store);

// Each store row serves as both features and embedding.
FeatureTable feature_table_from_store(const EmbeddingStore& store);

}  // namespace lexloop
