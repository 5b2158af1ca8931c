#include "lexloop/classifier.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "lexloop/error.h"
#include "text_util.h"

namespace lexloop {

std::string_view label_name(Label label) {
  return label == Label::kMental ? "mental" : "physical";
}

std::optional<Label> parse_label(std::string_view text) {
  std::string lowered = to_lower(detail::trim(text));
  if (lowered == "mental" || lowered == "1") return Label::kMental;
  if (lowered == "physical" || lowered == "0") return Label::kPhysical;
  return std::nullopt;
}

Parameters Parameters::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  Parameters p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.hidden_weights.assign(hidden_dim * input_dim, 0.0);
  p.hidden_bias.assign(hidden_dim, 0.0);
  p.output_weights.assign(hidden_dim > 0 ? hidden_dim : input_dim, 0.0);
  return p;
}

std::size_t Parameters::size() const {
  return hidden_weights.size() + hidden_bias.size() + output_weights.size() + 1;
}

std::vector<double> Parameters::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  flat.insert(flat.end(), hidden_weights.begin(), hidden_weights.end());
  flat.insert(flat.end(), hidden_bias.begin(), hidden_bias.end());
  flat.insert(flat.end(), output_weights.begin(), output_weights.end());
  flat.push_back(output_bias);
  return flat;
}

void Parameters::assign(std::span<const double> flat) {
  if (flat.size() != size()) throw DimensionError("parameter vector has the wrong length");
  auto it = flat.begin();
  for (auto* block : {&hidden_weights, &hidden_bias, &output_weights}) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(block->size()), block->begin());
    it += static_cast<std::ptrdiff_t>(block->size());
  }
  output_bias = *it;
}

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void check_dim(const ClassifierModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim()) {
    throw DimensionError("feature vector has length " + std::to_string(x.size()) +
                         ", model expects " + std::to_string(model.input_dim()));
  }
}

// Hidden activations (after tanh and optional dropout scaling).
void hidden_layer(const Parameters& p, std::span<const double> x, const double* mask,
                  std::vector<double>& pre, std::vector<double>& out) {
  pre.assign(p.hidden_dim, 0.0);
  out.assign(p.hidden_dim, 0.0);
  for (std::size_t j = 0; j < p.hidden_dim; ++j) {
    const double* row = &p.hidden_weights[j * p.input_dim];
    double a = p.hidden_bias[j];
    for (std::size_t k = 0; k < p.input_dim; ++k) a += row[k] * x[k];
    pre[j] = std::tanh(a);
    out[j] = mask != nullptr ? pre[j] * mask[j] : pre[j];
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Adds d(loss_i)/d(params) into grad and returns loss_i.
double accumulate_example(const Parameters& p, const LabeledExample& ex, const double* mask,
                          Parameters& grad, std::vector<double>& act, std::vector<double>& out) {
  const std::span<const double> x = ex.features;
  const double y = ex.label == Label::kMental ? 1.0 : 0.0;
  double z = p.output_bias;
  if (p.hidden_dim == 0) {
    z += dot(p.output_weights, x);
  } else {
    hidden_layer(p, x, mask, act, out);
    z += dot(p.output_weights, out);
  }
  const double dz = sigmoid(z) - y;
  grad.output_bias += dz;
  if (p.hidden_dim == 0) {
    for (std::size_t k = 0; k < p.input_dim; ++k) grad.output_weights[k] += dz * x[k];
  } else {
    for (std::size_t j = 0; j < p.hidden_dim; ++j) {
      grad.output_weights[j] += dz * out[j];
      double da = dz * p.output_weights[j] * (1.0 - act[j] * act[j]);
      if (mask != nullptr) da *= mask[j];
      grad.hidden_bias[j] += da;
      double* row = &grad.hidden_weights[j * p.input_dim];
      for (std::size_t k = 0; k < p.input_dim; ++k) row[k] += da * x[k];
    }
  }
  return softplus(z) - y * z;
}

double squared_weight_norm(const Parameters& p) {
  return dot(p.hidden_weights, p.hidden_weights) + dot(p.output_weights, p.output_weights);
}

// masks: one hidden_dim block per example, or empty for no dropout.
LossGradient batch_loss_and_gradient(const ClassifierModel& model,
                                     std::span<const LabeledExample> batch,
                                     std::span<const double> masks, double weight_decay) {
  if (batch.empty()) throw Error("loss_and_gradient: empty batch");
  const Parameters& p = model.params;
  LossGradient result;
  result.gradient = Parameters::zeros(p.input_dim, p.hidden_dim);
  std::vector<double> act, out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    check_dim(model, batch[i].features);
    const double* mask = masks.empty() ? nullptr : &masks[i * p.hidden_dim];
    result.loss += accumulate_example(p, batch[i], mask, result.gradient, act, out);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  result.loss *= inv;
  Parameters& g = result.gradient;
  for (double& v : g.hidden_weights) v *= inv;
  for (double& v : g.hidden_bias) v *= inv;
  for (double& v : g.output_weights) v *= inv;
  g.output_bias *= inv;
  if (weight_decay > 0.0) {
    result.loss += 0.5 * weight_decay * squared_weight_norm(p);
    for (std::size_t i = 0; i < g.hidden_weights.size(); ++i)
      g.hidden_weights[i] += weight_decay * p.hidden_weights[i];
    for (std::size_t i = 0; i < g.output_weights.size(); ++i)
      g.output_weights[i] += weight_decay * p.output_weights[i];
  }
  return result;
}

}  // namespace

double logit(const ClassifierModel& model, std::span<const double> x) {
  check_dim(model, x);
  const Parameters& p = model.params;
  if (p.hidden_dim == 0) return p.output_bias + dot(p.output_weights, x);
  std::vector<double> act, out;
  hidden_layer(p, x, nullptr, act, out);
  return p.output_bias + dot(p.output_weights, out);
}

double forward(const ClassifierModel& model, std::span<const double> x) {
  return sigmoid(logit(model, x));
}

Label classify_probability(double probability, double threshold) {
  return probability > threshold ? Label::kMental : Label::kPhysical;
}

Label predict_class(const ClassifierModel& model, std::span<const double> x) {
  return classify_probability(forward(model, x), model.threshold);
}

LossGradient loss_and_gradient(const ClassifierModel& model,
                               std::span<const LabeledExample> batch, double weight_decay) {
  return batch_loss_and_gradient(model, batch, {}, weight_decay);
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (lr_drop_epoch > epochs) throw ConfigError("lr_drop_epoch must be <= epochs");
  if (!(lr_drop_factor > 0.0)) throw ConfigError("lr_drop_factor must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be nonnegative");
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) throw ConfigError("dev_fraction must be in (0,1)");
  if (dropout_prob < 0.0 || dropout_prob >= 1.0) throw ConfigError("dropout_prob must be in [0,1)");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must be in (0,1)");
}

double accuracy(const ClassifierModel& model, std::span<const LabeledExample> data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : data) correct += predict_class(model, ex.features) == ex.label;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace {

double mean_loss(const ClassifierModel& model, std::span<const LabeledExample> data) {
  double total = 0.0;
  for (const auto& ex : data) {
    const double z = logit(model, ex.features);
    const double y = ex.label == Label::kMental ? 1.0 : 0.0;
    total += softplus(z) - y * z;
  }
  return data.empty() ? 0.0 : total / static_cast<double>(data.size());
}

void init_hidden(Parameters& p, std::mt19937_64& rng) {
  const double limit_in = std::sqrt(6.0 / static_cast<double>(p.input_dim + p.hidden_dim));
  const double limit_out = std::sqrt(6.0 / static_cast<double>(p.hidden_dim + 1));
  std::uniform_real_distribution<double> in_dist(-limit_in, limit_in);
  std::uniform_real_distribution<double> out_dist(-limit_out, limit_out);
  for (double& w : p.hidden_weights) w = in_dist(rng);
  for (double& w : p.output_weights) w = out_dist(rng);
}

}  // namespace

TrainResult train(std::span<const LabeledExample> data, const TrainConfig& cfg,
                  const ClassifierModel* warm_start) {
  cfg.validate();
  if (data.empty()) throw Error("train: no examples");
  const std::size_t dim = data.front().features.size();
  bool has_pos = false, has_neg = false;
  for (const auto& ex : data) {
    if (ex.features.size() != dim) throw DimensionError("train: inconsistent feature lengths");
    (ex.label == Label::kMental ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw Error("train: needs both classes");

  std::mt19937_64 rng(cfg.seed);

  // Stratified split; a class with fewer than two members stays in train.
  std::vector<LabeledExample> train_set, dev_set;
  for (Label cls : {Label::kMental, Label::kPhysical}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i].label == cls) idx.push_back(i);
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    std::size_t dev_n = 0;
    if (idx.size() >= 2) {
      dev_n = static_cast<std::size_t>(std::llround(cfg.dev_fraction * static_cast<double>(idx.size())));
      dev_n = std::clamp<std::size_t>(dev_n, 1, idx.size() - 1);
    }
    for (std::size_t i = 0; i < idx.size(); ++i) {
      (i < dev_n ? dev_set : train_set).push_back(data[idx[i]]);
    }
  }
  const std::span<const LabeledExample> selection_set =
      dev_set.empty() ? std::span<const LabeledExample>(train_set) : dev_set;

  ClassifierModel model(dim, cfg.hidden_dim);
  model.threshold = cfg.threshold;
  if (warm_start != nullptr) {
    if (warm_start->input_dim() != dim || warm_start->hidden_dim() != cfg.hidden_dim) {
      throw DimensionError("train: warm-start model shape mismatch");
    }
    model = *warm_start;
    model.threshold = cfg.threshold;
  } else if (cfg.hidden_dim > 0) {
    init_hidden(model.params, rng);
  }

  TrainResult result;
  result.history.train_size = train_set.size();
  result.history.dev_size = dev_set.size();
  result.history.initial_train_loss = mean_loss(model, train_set);

  const bool use_dropout = cfg.hidden_dim > 0 && cfg.dropout_prob > 0.0;
  std::bernoulli_distribution keep(1.0 - cfg.dropout_prob);
  const double keep_scale = use_dropout ? 1.0 / (1.0 - cfg.dropout_prob) : 1.0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<LabeledExample> batch;
  std::vector<double> masks;
  double best_accuracy = -1.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = epoch >= cfg.lr_drop_epoch ? cfg.lr / cfg.lr_drop_factor : cfg.lr;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
      masks.clear();
      if (use_dropout) {
        masks.resize(batch.size() * cfg.hidden_dim);
        for (double& m : masks) m = keep(rng) ? keep_scale : 0.0;
      }
      const LossGradient lg = batch_loss_and_gradient(model, batch, masks, 0.0);

      Parameters& p = model.params;
      const Parameters& g = lg.gradient;
      for (std::size_t i = 0; i < p.hidden_weights.size(); ++i)
        p.hidden_weights[i] -= lr * (g.hidden_weights[i] + cfg.weight_decay * p.hidden_weights[i]);
      for (std::size_t i = 0; i < p.hidden_bias.size(); ++i) p.hidden_bias[i] -= lr * g.hidden_bias[i];
      for (std::size_t i = 0; i < p.output_weights.size(); ++i)
        p.output_weights[i] -= lr * (g.output_weights[i] + cfg.weight_decay * p.output_weights[i]);
      p.output_bias -= lr * g.output_bias;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.lr = lr;
    record.train_loss = mean_loss(model, train_set);
    record.dev_accuracy = accuracy(model, selection_set);
    result.history.epochs.push_back(record);
    if (record.dev_accuracy > best_accuracy) {
      best_accuracy = record.dev_accuracy;
      result.winner = model;
      result.history.winner_epoch = epoch;
    }
  }
  return result;
}

namespace {

constexpr std::string_view kCheckpointMagic = "lexloop-model";
constexpr int kCheckpointVersion = 1;

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

void write_block(std::ostream& out, std::string_view name, const std::vector<double>& values) {
  out << name << ' ' << values.size();
  for (double v : values) out << ' ' << hex(v);
  out << '\n';
}

double parse_hex(const std::string& token, const std::string& source, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw ParseError(source, line, "bad number '" + token + "'");
  }
  return v;
}

}  // namespace

void save_model(const ClassifierModel& model, std::ostream& out) {
  const Parameters& p = model.params;
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "input_dim " << p.input_dim << '\n';
  out << "hidden_dim " << p.hidden_dim << '\n';
  out << "threshold " << hex(model.threshold) << '\n';
  write_block(out, "hidden_weights", p.hidden_weights);
  write_block(out, "hidden_bias", p.hidden_bias);
  write_block(out, "output_weights", p.output_weights);
  out << "output_bias " << hex(p.output_bias) << '\n';
}

ClassifierModel load_model(std::istream& in, const std::string& source) {
  std::size_t line_no = 0;
  std::string line;
  auto next_fields = [&](std::string_view expected_key) {
    if (!std::getline(in, line)) throw ParseError(source, line_no + 1, "truncated checkpoint");
    ++line_no;
    auto views = detail::split_whitespace(line);
    std::vector<std::string> fields(views.begin(), views.end());
    if (fields.empty() || fields[0] != expected_key) {
      throw ParseError(source, line_no, "expected '" + std::string(expected_key) + "'");
    }
    return fields;
  };
  auto header = next_fields(kCheckpointMagic);
  if (header.size() != 2 || header[1] != std::to_string(kCheckpointVersion)) {
    throw ParseError(source, line_no, "unsupported checkpoint version");
  }
  auto read_size = [&](std::string_view key) {
    auto f = next_fields(key);
    if (f.size() != 2) throw ParseError(source, line_no, "bad " + std::string(key));
    return static_cast<std::size_t>(std::stoull(f[1]));
  };
  const std::size_t input_dim = read_size("input_dim");
  const std::size_t hidden_dim = read_size("hidden_dim");
  ClassifierModel model(input_dim, hidden_dim);
  {
    auto f = next_fields("threshold");
    if (f.size() != 2) throw ParseError(source, line_no, "bad threshold");
    model.threshold = parse_hex(f[1], source, line_no);
  }
  auto read_block = [&](std::string_view key, std::vector<double>& values) {
    auto f = next_fields(key);
    if (f.size() < 2 || std::stoull(f[1]) != values.size() || f.size() != values.size() + 2) {
      throw ParseError(source, line_no, "bad block '" + std::string(key) + "'");
    }
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = parse_hex(f[i + 2], source, line_no);
  };
  read_block("hidden_weights", model.params.hidden_weights);
  read_block("hidden_bias", model.params.hidden_bias);
  read_block("output_weights", model.params.output_weights);
  {
    auto f = next_fields("output_bias");
    if (f.size() != 2) throw ParseError(source, line_no, "bad output_bias");
    model.params.output_bias = parse_hex(f[1], source, line_no);
  }
  return model;
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model: " + path.string());
  save_model(model, out);
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open model: " + path.string());
  return load_model(in, path.string());
}

}  // namespace lexloop
