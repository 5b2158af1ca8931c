#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "lexloop/classifier.h"
#include "lexloop/error.h"
#include "oracles.h"
#include "temp_dir.h"

using namespace lexloop;

namespace {

LabeledExample ex(std::string w, FeatureVector f, Label l) { return LabeledExample{std::move(w), std::move(f), l}; }

// Two 2-dim clusters, 20 points each, far apart.
std::vector<LabeledExample> separable(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<LabeledExample> data;
  for (int i = 0; i < 20; ++i) data.push_back(ex("m" + std::to_string(i), {2 + noise(rng), 2 + noise(rng)}, Label::kMental));
  for (int i = 0; i < 20; ++i) data.push_back(ex("p" + std::to_string(i), {-2 + noise(rng), -2 + noise(rng)}, Label::kPhysical));
  return data;
}

}  // namespace

TEST_CASE("forward") {
  ClassifierModel m(3);
  const FeatureVector x = {1, -2, 0.5};
  CHECK(forward(m, x) == 0.5);

  m.params.output_bias = std::log(3.0);
  CHECK(forward(m, x) == doctest::Approx(0.75).epsilon(1e-12));

  m.params.output_weights = {0.2, -0.1, 0.4};
  m.params.output_bias = -0.3;
  // z = 0.2 + 0.2 + 0.2 - 0.3 = 0.3
  CHECK(std::abs(forward(m, x) - 1.0 / (1.0 + std::exp(-0.3))) < 1e-12);

  CHECK_THROWS_AS(forward(m, FeatureVector{1, 2}), DimensionError);
}

TEST_CASE("forward: hidden layer matches a hand computation") {
  ClassifierModel m(2, 2);
  m.params.hidden_weights = {0.5, -1.0, 0.25, 0.75};
  m.params.hidden_bias = {0.1, -0.2};
  m.params.output_weights = {1.5, -0.5};
  m.params.output_bias = 0.05;
  const FeatureVector x = {2, 1};
  const double h0 = std::tanh(0.5 * 2 - 1.0 * 1 + 0.1);
  const double h1 = std::tanh(0.25 * 2 + 0.75 * 1 - 0.2);
  const double z = 1.5 * h0 - 0.5 * h1 + 0.05;
  CHECK(std::abs(forward(m, x) - 1.0 / (1.0 + std::exp(-z))) < 1e-12);
}

TEST_CASE("forward is stable for extreme logits") {
  ClassifierModel m(1);
  m.params.output_weights = {1.0};
  CHECK(forward(m, FeatureVector{800}) == 1.0);
  CHECK(forward(m, FeatureVector{-800}) >= 0.0);
  CHECK(std::isfinite(loss_and_gradient(m, std::vector{ex("a", {-800}, Label::kMental)}).loss));
}

TEST_CASE("predict_class uses a strict threshold") {
  CHECK(classify_probability(0.51) == Label::kMental);
  CHECK(classify_probability(0.5) == Label::kPhysical);
  CHECK(classify_probability(0.49) == Label::kPhysical);
  ClassifierModel m(1);
  CHECK(predict_class(m, FeatureVector{3}) == Label::kPhysical);  // p == 0.5
}

TEST_CASE("loss_and_gradient: closed forms") {
  ClassifierModel m(2);
  const std::vector batch = {ex("a", {1, 1}, Label::kMental)};
  CHECK(loss_and_gradient(m, batch).loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  m.params.output_weights = {40, 40};
  const LossGradient lg = loss_and_gradient(m, batch);
  CHECK(lg.loss < 1e-30);
  for (double g : lg.gradient.flatten()) CHECK(std::abs(g) < 1e-30);

  // decay term excludes the bias
  ClassifierModel d(2);
  d.params.output_weights = {3, 4};
  d.params.output_bias = 100;
  const std::vector far = {ex("a", {0, 0}, Label::kMental)};
  const double bce = std::log1p(std::exp(-100.0));
  CHECK(loss_and_gradient(d, far, 0.1).loss == doctest::Approx(bce + 0.5 * 0.1 * 25).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937_64 rng(1234);
  for (std::size_t hidden : {std::size_t{0}, std::size_t{3}}) {
    CAPTURE(hidden);
    for (int sample = 0; sample < 20; ++sample) {
      const auto s = oracle::random_gradient_sample(rng, hidden);
      const double ref = oracle::reference_loss(s.model, s.model.params.flatten(), s.batch, s.weight_decay);
      CHECK(loss_and_gradient(s.model, s.batch, s.weight_decay).loss == doctest::Approx(ref).epsilon(1e-12));
      CHECK(oracle::gradient_check(s) < 1e-4);
    }
  }
}

TEST_CASE("train: separable clusters reach perfect dev accuracy") {
  TrainConfig cfg;
  cfg.seed = 9;
  const auto data = separable(1);
  const TrainResult r = train(data, cfg);
  CHECK(r.history.epochs.size() == 20);
  CHECK(r.history.dev_size == 8);
  CHECK(r.history.train_size == 32);
  CHECK(r.history.epochs[static_cast<std::size_t>(r.history.winner_epoch)].dev_accuracy == 1.0);
  CHECK(accuracy(r.winner, data) == 1.0);
}

TEST_CASE("train: learning-rate schedule") {
  TrainConfig cfg;
  const TrainResult r = train(separable(2), cfg);
  for (const auto& e : r.history.epochs) CHECK(e.lr == (e.epoch >= 10 ? 0.1 / 10 : 0.1));
}

TEST_CASE("train: duplicated pair lowers the loss") {
  std::vector<LabeledExample> data;
  for (int i = 0; i < 5; ++i) {
    data.push_back(ex("m" + std::to_string(i), {1, 0.5}, Label::kMental));
    data.push_back(ex("p" + std::to_string(i), {-0.5, -1}, Label::kPhysical));
  }
  const TrainResult r = train(data, TrainConfig{});
  CHECK(r.history.epochs.back().train_loss < r.history.initial_train_loss);

  // one example of each class: both stay in train, selection falls back to train
  const std::vector<LabeledExample> pair = {data[0], data[1]};
  const TrainResult tiny = train(pair, TrainConfig{});
  CHECK(tiny.history.dev_size == 0);
  CHECK(tiny.history.epochs.back().train_loss < tiny.history.initial_train_loss);
}

TEST_CASE("train: single class is rejected") {
  const std::vector data = {ex("a", {1}, Label::kMental), ex("b", {2}, Label::kMental)};
  CHECK_THROWS_WITH_AS(train(data, TrainConfig{}), doctest::Contains("needs both classes"), Error);
}

TEST_CASE("train is deterministic for a seed") {
  for (std::size_t hidden : {std::size_t{0}, std::size_t{4}}) {
    TrainConfig cfg;
    cfg.seed = 77;
    cfg.hidden_dim = hidden;
    const auto data = separable(3);
    const TrainResult a = train(data, cfg);
    const TrainResult b = train(data, cfg);
    CHECK(a.winner == b.winner);
    cfg.seed = 78;
    CHECK_FALSE(train(data, cfg).winner == a.winner);
  }
}

TEST_CASE("train: full-batch logistic loss is monotone on the separable fixture") {
  TrainConfig cfg;
  cfg.batch_size = 1000;
  cfg.weight_decay = 0.0;
  cfg.lr = 0.05;
  cfg.seed = 4;
  const TrainResult r = train(separable(4), cfg);
  double previous = r.history.initial_train_loss;
  for (const auto& e : r.history.epochs) {
    CHECK(e.train_loss <= previous + 1e-9);
    previous = e.train_loss;
  }
}

TEST_CASE("train: hidden-layer variant learns the clusters") {
  TrainConfig cfg;
  cfg.hidden_dim = 8;
  cfg.batch_size = 8;
  cfg.seed = 5;
  const auto data = separable(5);
  CHECK(accuracy(train(data, cfg).winner, data) == 1.0);
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.dev_fraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.lr_drop_epoch = 21;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("checkpoint round trip is exact") {
  TempDir tmp;
  std::mt19937_64 rng(8);
  for (std::size_t hidden : {std::size_t{0}, std::size_t{5}}) {
    const auto s = oracle::random_gradient_sample(rng, hidden);
    ClassifierModel m = s.model;
    m.threshold = 0.4;
    save_model(m, tmp / "m.ckpt");
    CHECK(load_model(tmp / "m.ckpt") == m);
  }
  std::istringstream junk("not a model\n");
  CHECK_THROWS_AS(load_model(junk), ParseError);
}
