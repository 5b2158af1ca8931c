#pragma once

// Brute-force reference implementations. They share no code with the
// library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "lexloop/classifier.h"
#include "lexloop/strategies.h"

namespace oracle {

using lexloop::ClassifierModel;
using lexloop::Label;
using lexloop::LabeledExample;

inline double naive_logit(const ClassifierModel& m, const std::vector<double>& x) {
  const auto& p = m.params;
  if (p.hidden_dim == 0) {
    double z = p.output_bias;
    for (std::size_t i = 0; i < x.size(); ++i) z += p.output_weights[i] * x[i];
    return z;
  }
  double z = p.output_bias;
  for (std::size_t j = 0; j < p.hidden_dim; ++j) {
    double a = p.hidden_bias[j];
    for (std::size_t i = 0; i < x.size(); ++i) a += p.hidden_weights[j * p.input_dim + i] * x[i];
    z += p.output_weights[j] * std::tanh(a);
  }
  return z;
}

inline double naive_probability(const ClassifierModel& m, const std::vector<double>& x) {
  return 1.0 / (1.0 + std::exp(-naive_logit(m, x)));
}

inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double kl(double p, double q) {
  auto c = [](double v) { return std::min(std::max(v, 1e-7), 1.0 - 1e-7); };
  p = c(p);
  q = c(q);
  return p * std::log(p / q) + (1 - p) * std::log((1 - p) / (1 - q));
}

struct Item {
  std::string word;
  std::vector<double> features;
  std::vector<double> embedding;
  Label label = Label::kPhysical;
};

// A randomized selection problem with its own storage.
struct Instance {
  std::vector<Item> unlabeled;
  std::vector<Item> labeled;
  ClassifierModel model;
  std::size_t k = 10;

  lexloop::PoolView view() const {
    lexloop::PoolView v;
    for (const auto& it : unlabeled) v.unlabeled.push_back({it.word, it.features, it.embedding});
    for (const auto& it : labeled) v.labeled.push_back({it.word, it.features, it.embedding, it.label});
    v.model = &model;
    return v;
  }
};

// Full scan; ties resolved by scanning words in sorted order and keeping the first maximum.
template <typename Score>
std::string argmax_sorted(std::vector<Item> items, Score score) {
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.word < b.word; });
  std::string best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& it : items) {
    const double s = score(it);
    if (best.empty() || s > best_score) {
      best = it.word;
      best_score = s;
    }
  }
  return best;
}

inline std::string entropy_choice(const Instance& in) {
  return argmax_sorted(in.unlabeled,
                       [&](const Item& it) { return binary_entropy(naive_probability(in.model, it.features)); });
}

inline std::string coreset_choice(const Instance& in) {
  return argmax_sorted(in.unlabeled, [&](const Item& it) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& l : in.labeled) nearest = std::min(nearest, euclid(it.embedding, l.embedding));
    return nearest;
  });
}

inline double cal_value(const Instance& in, const Item& it) {
  std::vector<std::pair<double, std::string>> order;
  for (const auto& l : in.labeled) order.emplace_back(euclid(it.embedding, l.embedding), l.word);
  std::sort(order.begin(), order.end());
  const std::size_t take = std::min(in.k, order.size());
  const double q = naive_probability(in.model, it.features);
  std::set<std::string> chosen;
  for (std::size_t i = 0; i < take; ++i) chosen.insert(order[i].second);
  double total = 0.0;
  for (const auto& l : in.labeled) {
    if (chosen.count(l.word)) total += kl(naive_probability(in.model, l.features), q);
  }
  return total / static_cast<double>(take);
}

inline std::string cal_choice(const Instance& in) {
  return argmax_sorted(in.unlabeled, [&](const Item& it) { return cal_value(in, it); });
}

// Pool <= 30, labeled <= 15, dims <= 8. Half the instances use integer grid
// coordinates and some items duplicate earlier ones, so exact ties occur.
inline Instance random_instance(std::mt19937_64& rng) {
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool grid = uniform(0, 1) == 0;
  const std::size_t fdim = static_cast<std::size_t>(uniform(1, 8));
  const std::size_t edim = static_cast<std::size_t>(uniform(1, 8));
  const std::size_t n_pool = static_cast<std::size_t>(uniform(1, 30));
  const std::size_t n_lab = static_cast<std::size_t>(uniform(1, 15));

  std::set<std::string> names;
  while (names.size() < n_pool + n_lab) {
    std::string w;
    const int len = uniform(1, 3);
    for (int i = 0; i < len; ++i) w.push_back(static_cast<char>('a' + uniform(0, 5)));
    names.insert(w);
  }
  std::vector<std::string> shuffled(names.begin(), names.end());
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  auto coord = [&] { return grid ? static_cast<double>(uniform(-2, 2)) : normal(rng); };
  std::vector<Item> all;
  for (std::size_t i = 0; i < n_pool + n_lab; ++i) {
    Item it;
    it.word = shuffled[i];
    if (!all.empty() && uniform(0, 4) == 0) {
      const Item& src = all[static_cast<std::size_t>(uniform(0, static_cast<int>(all.size()) - 1))];
      it.features = src.features;
      it.embedding = src.embedding;
    } else {
      for (std::size_t d = 0; d < fdim; ++d) it.features.push_back(coord());
      for (std::size_t d = 0; d < edim; ++d) it.embedding.push_back(coord());
    }
    it.label = uniform(0, 1) ? Label::kMental : Label::kPhysical;
    all.push_back(std::move(it));
  }

  Instance in;
  in.unlabeled.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_pool));
  in.labeled.assign(all.begin() + static_cast<std::ptrdiff_t>(n_pool), all.end());
  const std::size_t hidden = uniform(0, 2) == 0 ? static_cast<std::size_t>(uniform(1, 4)) : 0;
  in.model = ClassifierModel(fdim, hidden);
  std::vector<double> flat(in.model.params.size());
  for (double& w : flat) w = 0.7 * normal(rng);
  in.model.params.assign(flat);
  in.k = static_cast<std::size_t>(uniform(1, 12));
  return in;
}

// Mean BCE plus 0.5 * wd * ||W||^2 over the flat parameter vector.
inline double reference_loss(const ClassifierModel& shape, const std::vector<double>& flat,
                             const std::vector<LabeledExample>& batch, double wd) {
  ClassifierModel m = shape;
  m.params.assign(flat);
  double total = 0.0;
  for (const auto& ex : batch) {
    const double p = naive_probability(m, ex.features);
    total += ex.label == Label::kMental ? -std::log(p) : -std::log(1.0 - p);
  }
  double norm = 0.0;
  for (double w : m.params.hidden_weights) norm += w * w;
  for (double w : m.params.output_weights) norm += w * w;
  return total / static_cast<double>(batch.size()) + 0.5 * wd * norm;
}

// Central differences of reference_loss.
inline std::vector<double> numeric_gradient(const ClassifierModel& model,
                                            const std::vector<LabeledExample>& batch, double wd,
                                            double step = 1e-5) {
  const std::vector<double> base = model.params.flatten();
  std::vector<double> grad(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    std::vector<double> plus = base, minus = base;
    plus[i] += step;
    minus[i] -= step;
    grad[i] = (reference_loss(model, plus, batch, wd) - reference_loss(model, minus, batch, wd)) / (2 * step);
  }
  return grad;
}

// |a - b| / max(|a|, |b|, floor): relative error with a floor so coordinates
// that are zero up to rounding do not divide by noise.
inline double relative_error(double a, double b, double floor = 1e-5) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

struct GradientSample {
  ClassifierModel model;
  std::vector<LabeledExample> batch;
  double weight_decay = 0.0;
};

inline GradientSample random_gradient_sample(std::mt19937_64& rng, std::size_t hidden_dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t dim = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
  GradientSample s;
  s.model = ClassifierModel(dim, hidden_dim);
  std::vector<double> flat(s.model.params.size());
  for (double& w : flat) w = normal(rng);
  s.model.params.assign(flat);
  for (std::size_t i = 0; i < n; ++i) {
    LabeledExample ex;
    ex.word = "x" + std::to_string(i);
    for (std::size_t d = 0; d < dim; ++d) ex.features.push_back(normal(rng));
    ex.label = std::bernoulli_distribution(0.5)(rng) ? Label::kMental : Label::kPhysical;
    s.batch.push_back(std::move(ex));
  }
  s.weight_decay = std::uniform_real_distribution<double>(0.0, 0.1)(rng);
  return s;
}

// Maximum per-coordinate relative error between analytic and numeric gradients.
inline double gradient_check(const GradientSample& s) {
  const auto analytic = lexloop::loss_and_gradient(s.model, s.batch, s.weight_decay).gradient.flatten();
  const auto numeric = numeric_gradient(s.model, s.batch, s.weight_decay);
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) worst = std::max(worst, relative_error(analytic[i], numeric[i]));
  return worst;
}

}  // namespace oracle
