#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexloop/embedding.h"

namespace lexloop {

// Mental is the positive class throughout.
enum class Label : std::uint8_t { kPhysical = 0, kMental = 1 };

std::string_view label_name(Label label);  // "mental" | "physical"
std::optional<Label> parse_label(std::string_view text);

struct LabeledExample {
  std::string word;
  FeatureVector features;
  Label label = Label::kPhysical;
};

// Parameter layout shared by models and gradients. With hidden_dim == 0 the
// model is plain logistic regression and the hidden arrays are empty.
struct Parameters {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::vector<double> hidden_weights;  // hidden_dim x input_dim, row-major
  std::vector<double> hidden_bias;     // hidden_dim
  std::vector<double> output_weights;  // hidden_dim, or input_dim when logistic
  double output_bias = 0.0;

  static Parameters zeros(std::size_t input_dim, std::size_t hidden_dim);

  std::size_t size() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

struct ClassifierModel {
  Parameters params;
  double threshold = 0.5;

  ClassifierModel() = default;
  explicit ClassifierModel(std::size_t input_dim, std::size_t hidden_dim = 0)
      : params(Parameters::zeros(input_dim, hidden_dim)) {}

  std::size_t input_dim() const { return params.input_dim; }
  std::size_t hidden_dim() const { return params.hidden_dim; }

  friend bool operator==(const ClassifierModel&, const ClassifierModel&) = default;
};

// Pre-sigmoid score. Dropout never applies here.
double logit(const ClassifierModel& model, std::span<const double> x);

// P(Mental | x). Throws DimensionError when x has the wrong length.
double forward(const ClassifierModel& model, std::span<const double> x);

// Mental iff forward(model, x) > threshold (strict).
Label predict_class(const ClassifierModel& model, std::span<const double> x);
Label classify_probability(double probability, double threshold = 0.5);

struct LossGradient {
  double loss = 0.0;
  Parameters gradient;
};

// Mean binary cross-entropy plus weight_decay * 0.5 * ||W||^2 (biases excluded).
LossGradient loss_and_gradient(const ClassifierModel& model,
                               std::span<const LabeledExample> batch, double weight_decay = 0.0);

struct TrainConfig {
  int epochs = 20;
  double lr = 0.1;
  int lr_drop_epoch = 10;
  double lr_drop_factor = 10.0;
  std::size_t batch_size = 32;
  double weight_decay = 0.001;
  double dev_fraction = 0.2;
  std::uint64_t seed = 0;
  double dropout_prob = 0.3;
  std::size_t hidden_dim = 0;
  double threshold = 0.5;

  // Throws ConfigError on a violated invariant.
  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double dev_accuracy = 0.0;
};

struct TrainHistory {
  double initial_train_loss = 0.0;
  std::vector<EpochRecord> epochs;
  int winner_epoch = 0;
  std::size_t train_size = 0;
  std::size_t dev_size = 0;
};

struct TrainResult {
  ClassifierModel winner;
  TrainHistory history;
};

// Stratified train/dev split, mini-batch gradient descent with decoupled weight
// decay and a step learning-rate drop; returns the epoch snapshot with the best
// dev accuracy (earliest on ties). Throws Error("needs both classes") on
// single-class data. A non-null warm_start must match the feature and hidden dims.
TrainResult train(std::span<const LabeledExample> data, const TrainConfig& cfg,
                  const ClassifierModel* warm_start = nullptr);

double accuracy(const ClassifierModel& model, std::span<const LabeledExample> data);

// Versioned text checkpoint; parameters are written as hex floats so a
// save/load cycle is exact.
void save_model(const ClassifierModel& model, std::ostream& out);
ClassifierModel load_model(std::istream& in, const std::string& source = "<stream>");
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace lexloop
