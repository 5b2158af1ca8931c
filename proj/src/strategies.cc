#include "lexloop/strategies.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lexloop/error.h"

namespace lexloop {

std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kEntropy:
      return "entropy";
    case StrategyKind::kCoreset:
      return "coreset";
    case StrategyKind::kCal:
      return "cal";
    case StrategyKind::kRandom:
      return "random";
  }
  return "unknown";
}

std::optional<StrategyKind> parse_strategy(std::string_view name) {
  for (auto kind : {StrategyKind::kEntropy, StrategyKind::kCoreset, StrategyKind::kCal,
                    StrategyKind::kRandom}) {
    if (to_lower(name) == strategy_name(kind)) return kind;
  }
  return std::nullopt;
}

namespace {

void require_unlabeled(const PoolView& view, std::string_view who) {
  if (view.unlabeled.empty()) throw Error(std::string(who) + ": unlabeled pool is empty");
}

void require_model(const PoolView& view, std::string_view who) {
  if (view.model == nullptr) throw Error(std::string(who) + ": no classifier model");
}

// Keeps the highest score; equal scores go to the smaller word.
class Best {
 public:
  void offer(double score, std::string_view word) {
    if (!have_ || score > score_ || (score == score_ && word < word_)) {
      have_ = true;
      score_ = score;
      word_ = word;
    }
  }
  std::string word() const { return std::string(word_); }

 private:
  bool have_ = false;
  double score_ = 0.0;
  std::string_view word_;
};

double clamp_probability(double p) { return std::clamp(p, kKlClamp, 1.0 - kKlClamp); }

}  // namespace

std::string select_entropy(const PoolView& view) {
  require_unlabeled(view, "entropy");
  require_model(view, "entropy");
  Best best;
  for (const auto& item : view.unlabeled) {
    best.offer(-std::abs(forward(*view.model, item.features) - 0.5), item.word);
  }
  return best.word();
}

std::string select_coreset(const PoolView& view) {
  require_unlabeled(view, "coreset");
  if (view.labeled.empty()) throw Error("coreset requires labeled seeds");
  Best best;
  for (const auto& item : view.unlabeled) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& seed : view.labeled) {
      nearest = std::min(nearest, l2_distance(item.embedding, seed.embedding));
    }
    best.offer(nearest, item.word);
  }
  return best.word();
}

double bernoulli_kl(double p, double q) {
  p = clamp_probability(p);
  q = clamp_probability(q);
  return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
}

namespace {

struct Neighbor {
  double distance;
  std::string_view word;
  std::size_t index;
};

double cal_score_with(const PoolView& view, const PoolItem& candidate, std::size_t k,
                      std::span<const double> labeled_probs, std::vector<Neighbor>& scratch) {
  scratch.clear();
  for (std::size_t i = 0; i < view.labeled.size(); ++i) {
    scratch.push_back(
        Neighbor{l2_distance(candidate.embedding, view.labeled[i].embedding), view.labeled[i].word, i});
  }
  const std::size_t take = std::min(k, scratch.size());
  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(take),
                    scratch.end(), [](const Neighbor& a, const Neighbor& b) {
                      return a.distance != b.distance ? a.distance < b.distance : a.word < b.word;
                    });
  // Sum in labeled order so candidates sharing a neighbor set tie bit-for-bit.
  std::sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(take),
            [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
  const double p_candidate = forward(*view.model, candidate.features);
  double total = 0.0;
  for (std::size_t i = 0; i < take; ++i) {
    total += bernoulli_kl(labeled_probs[scratch[i].index], p_candidate);
  }
  return total / static_cast<double>(take);
}

std::vector<double> labeled_probabilities(const PoolView& view) {
  std::vector<double> probs;
  probs.reserve(view.labeled.size());
  for (const auto& item : view.labeled) probs.push_back(forward(*view.model, item.features));
  return probs;
}

}  // namespace

double cal_score(const PoolView& view, const PoolItem& candidate, std::size_t k) {
  require_model(view, "cal");
  if (view.labeled.empty()) throw Error("cal requires labeled seeds");
  if (k == 0) throw ConfigError("cal_k must be >= 1");
  std::vector<Neighbor> scratch;
  return cal_score_with(view, candidate, k, labeled_probabilities(view), scratch);
}

std::string select_cal(const PoolView& view, std::size_t k) {
  require_unlabeled(view, "cal");
  require_model(view, "cal");
  if (view.labeled.empty()) throw Error("cal requires labeled seeds");
  if (k == 0) throw ConfigError("cal_k must be >= 1");
  const std::vector<double> probs = labeled_probabilities(view);
  std::vector<Neighbor> scratch;
  Best best;
  for (const auto& item : view.unlabeled) {
    best.offer(cal_score_with(view, item, k, probs, scratch), item.word);
  }
  return best.word();
}

std::string select_random(const PoolView& view, std::mt19937_64& rng) {
  require_unlabeled(view, "random");
  std::uniform_int_distribution<std::size_t> pick(0, view.unlabeled.size() - 1);
  return std::string(view.unlabeled[pick(rng)].word);
}

std::string select(const PoolView& view, const StrategySpec& spec, std::mt19937_64& rng) {
  switch (spec.kind) {
    case StrategyKind::kEntropy:
      return select_entropy(view);
    case StrategyKind::kCoreset:
      return select_coreset(view);
    case StrategyKind::kCal:
      return select_cal(view, spec.cal_k);
    case StrategyKind::kRandom:
      return select_random(view, rng);
  }
  throw Error("unknown strategy");
}

}  // namespace lexloop
