#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lexloop/session_store.h"

namespace lexloop {

// Two isotropic unit-variance Gaussians whose means are `separation` apart;
// the component decides the ground-truth label.
struct SyntheticConfig {
  std::size_t pool_words = 500;
  std::size_t test_words = 100;
  std::size_t dim = 8;
  double separation = 3.0;
  double mental_fraction = 0.26;
  std::uint64_t seed = 2022;
};

struct SyntheticLexicon {
  FeatureTable features;  // pool and testset words
  std::vector<std::string> pool;
  std::vector<LabeledExample> testset;
  LabelMap truth;  // every word
};

SyntheticLexicon make_synthetic(const SyntheticConfig& cfg);

// Writes features.vec, pool.txt, truth.tsv and testset.tsv into `dir`.
void write_synthetic(const SyntheticLexicon& lex, const std::filesystem::path& dir);

}  // namespace lexloop
