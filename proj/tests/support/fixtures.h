#pragma once

#include <string>

#include "lexloop/engine.h"
#include "lexloop/synthetic.h"

// Labels alternate Mental, Physical, Mental, ... by call order.
class AlternatingOracle : public lexloop::Oracle {
 public:
  lexloop::Label annotate(const std::string&) override {
    return (calls_++ % 2 == 0) ? lexloop::Label::kMental : lexloop::Label::kPhysical;
  }

 private:
  std::size_t calls_ = 0;
};

class ConstantOracle : public lexloop::Oracle {
 public:
  explicit ConstantOracle(lexloop::Label label) : label_(label) {}
  lexloop::Label annotate(const std::string&) override { return label_; }

 private:
  lexloop::Label label_;
};

// Delegates to another oracle and throws on the n-th call (0-based).
class FailingOracle : public lexloop::Oracle {
 public:
  FailingOracle(lexloop::Oracle& inner, std::size_t fail_at) : inner_(inner), fail_at_(fail_at) {}
  lexloop::Label annotate(const std::string& word) override {
    if (calls_++ == fail_at_) throw std::runtime_error("annotator went away");
    return inner_.annotate(word);
  }

 private:
  lexloop::Oracle& inner_;
  std::size_t fail_at_;
  std::size_t calls_ = 0;
};

inline lexloop::SyntheticLexicon small_synthetic(std::size_t pool = 300, std::uint64_t seed = 2022) {
  lexloop::SyntheticConfig cfg;
  cfg.pool_words = pool;
  cfg.test_words = 60;
  cfg.seed = seed;
  return lexloop::make_synthetic(cfg);
}

inline lexloop::Session make_session(const lexloop::SyntheticLexicon& lex, lexloop::IterationConfig cfg) {
  lexloop::Session s(cfg, lex.features, lex.pool, lex.testset);
  s.set_clock([] { return std::string("2022-01-01T00:00:00Z"); });
  return s;
}
