#include "lexloop/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "lexloop/error.h"

namespace lexloop {

SyntheticLexicon make_synthetic(const SyntheticConfig& cfg) {
  if (cfg.dim == 0 || cfg.pool_words == 0) throw ConfigError("synthetic: empty configuration");
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double offset = 0.5 * cfg.separation / std::sqrt(static_cast<double>(cfg.dim));

  SyntheticLexicon lex;
  std::size_t next_id = 0;
  auto make_group = [&](std::size_t n, std::vector<std::string>& words) {
    const auto n_mental = static_cast<std::size_t>(std::llround(cfg.mental_fraction * static_cast<double>(n)));
    std::vector<Label> labels(n, Label::kPhysical);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_mental), Label::kMental);
    std::shuffle(labels.begin(), labels.end(), rng);
    for (Label label : labels) {
      char name[16];
      std::snprintf(name, sizeof name, "w%04zu", next_id++);
      const double sign = label == Label::kMental ? 1.0 : -1.0;
      FeatureVector v(cfg.dim);
      for (double& x : v) x = sign * offset + noise(rng);
      lex.features.emplace(name, WordFeatures{v, v, 1.0});
      lex.truth.emplace(name, label);
      words.emplace_back(name);
    }
  };
  make_group(cfg.pool_words, lex.pool);
  std::vector<std::string> test_words;
  make_group(cfg.test_words, test_words);
  for (const auto& w : test_words) {
    lex.testset.push_back(LabeledExample{w, lex.features.at(w).features, lex.truth.at(w)});
  }
  return lex;
}

void write_synthetic(const SyntheticLexicon& lex, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::size_t dim = lex.features.empty() ? 1 : lex.features.begin()->second.features.size();
  EmbeddingStore store(dim);
  for (const auto& [word, wf] : lex.features) store.insert(word, wf.features);
  {
    std::ofstream out(dir / "features.vec");
    write_vectors(store, out);
  }
  {
    std::ofstream out(dir / "pool.txt");
    for (const auto& w : lex.pool) out << w << '\n';
  }
  {
    std::ofstream out(dir / "truth.tsv");
    for (const auto& [word, label] : lex.truth) out << word << '\t' << label_name(label) << '\n';
  }
  {
    std::ofstream out(dir / "testset.tsv");
    for (const auto& ex : lex.testset) out << ex.word << '\t' << label_name(ex.label) << '\n';
  }
}

}  // namespace lexloop
