#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexloop/classifier.h"

namespace lexloop {

enum class StrategyKind { kEntropy, kCoreset, kCal, kRandom };

std::string_view strategy_name(StrategyKind kind);  // "entropy" | "coreset" | "cal" | "random"
std::optional<StrategyKind> parse_strategy(std::string_view name);

inline constexpr std::size_t kDefaultCalNeighbors = 10;

struct StrategySpec {
  StrategyKind kind = StrategyKind::kEntropy;
  std::size_t cal_k = kDefaultCalNeighbors;
};

// Non-owning views into the caller's feature storage.
struct PoolItem {
  std::string_view word;
  std::span<const double> features;   // classifier input
  std::span<const double> embedding;  // strategy space
};

struct LabeledItem {
  std::string_view word;
  std::span<const double> features;
  std::span<const double> embedding;
  Label label = Label::kPhysical;
};

struct PoolView {
  std::vector<PoolItem> unlabeled;
  std::vector<LabeledItem> labeled;
  const ClassifierModel* model = nullptr;
};

// All selectors throw Error on an empty unlabeled pool and break score ties
// by the lexicographically smallest word.

// argmin |p - 0.5|.
std::string select_entropy(const PoolView& view);

// argmax over unlabeled of the min L2 distance to any labeled word.
std::string select_coreset(const PoolView& view);

// argmax of the mean KL(Bern(p_neighbor) || Bern(p_candidate)) over the
// candidate's k nearest labeled words (k capped at the labeled count).
std::string select_cal(const PoolView& view, std::size_t k = kDefaultCalNeighbors);

// Uniform over the unlabeled list order.
std::string select_random(const PoolView& view, std::mt19937_64& rng);

std::string select(const PoolView& view, const StrategySpec& spec, std::mt19937_64& rng);

inline constexpr double kKlClamp = 1e-7;

// Bernoulli KL(p || q), natural log, both clamped to [1e-7, 1 - 1e-7].
double bernoulli_kl(double p, double q);

// Per-candidate CAL score, exposed for reporting and tests.
double cal_score(const PoolView& view, const PoolItem& candidate, std::size_t k);

}  // namespace lexloop
