#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fixtures.h"
#include "lexloop/error.h"
#include "lexloop/session_store.h"
#include "temp_dir.h"

using namespace lexloop;
namespace fs = std::filesystem;

namespace {

DataSources synthetic_sources(const fs::path& data_dir) {
  DataSources s;
  s.features = data_dir / "features.vec";
  s.pool = data_dir / "pool.txt";
  s.testset = data_dir / "testset.tsv";
  return s;
}

// Labels `n` tasks through the directory's durable sink.
void annotate(SessionDirectory& dir, const LabelMap& truth, int n) {
  for (int i = 0; i < n; ++i) {
    Session& s = dir.session();
    if (s.status() == SessionStatus::kAwaitingRetrain) {
      s.finish_iteration();
      dir.persist_outputs();
    }
    const std::string w = s.next_candidate();
    s.submit(w, truth.at(w), "tester");
  }
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct SessionFixture {
  TempDir tmp;
  SyntheticLexicon lex = small_synthetic(300, 4);
  fs::path session_dir = tmp / "session";

  explicit SessionFixture(StrategyKind kind = StrategyKind::kEntropy) {
    write_synthetic(lex, tmp / "data");
    IterationConfig cfg;
    cfg.seed = 21;
    cfg.strategy.kind = kind;
    SessionDirectory::create(session_dir, cfg, synthetic_sources(tmp / "data"));
  }
};

}  // namespace

TEST_CASE("key-value config") {
  std::istringstream in("# comment\nT = 3\n K1=7 \nstrategy = cal\n\nseed = 12\n");
  const KeyValueConfig kv = KeyValueConfig::parse(in);
  const IterationConfig cfg = iteration_config_from(kv);
  CHECK(cfg.iterations == 3);
  CHECK(cfg.k1 == 7);
  CHECK(cfg.k2 == 20);
  CHECK(cfg.strategy.kind == StrategyKind::kCal);
  CHECK(cfg.seed == 12);

  KeyValueConfig out;
  write_iteration_config(cfg, out);
  std::stringstream text;
  out.write(text);
  const IterationConfig back = iteration_config_from(KeyValueConfig::parse(text));
  CHECK(back.iterations == 3);
  CHECK(back.k1 == 7);
  CHECK(back.strategy.kind == StrategyKind::kCal);
  CHECK(back.train.lr == cfg.train.lr);

  std::istringstream bad("strategy = bald\n");
  CHECK_THROWS_AS(iteration_config_from(KeyValueConfig::parse(bad)), ConfigError);
  std::istringstream bad_num("K1 = many\n");
  CHECK_THROWS_AS(iteration_config_from(KeyValueConfig::parse(bad_num)), ConfigError);
  std::istringstream no_eq("K1 20\n");
  CHECK_THROWS_AS(KeyValueConfig::parse(no_eq), ParseError);
}

TEST_CASE("log records round trip") {
  SessionRecord r{2, "happy", Label::kMental, StrategyKind::kCal, true, "2022-05-01T10:00:00Z", "ann1", ""};
  CHECK(parse_record(format_record(r)) == r);
  r.note = "borderline";
  CHECK(parse_record(format_record(r)) == r);
  CHECK_FALSE(parse_record("1\thappy\tmental").has_value());
  CHECK_FALSE(parse_record("x\thappy\tmental\tcal\t1\tts\tann").has_value());
  CHECK_FALSE(parse_record("1\thappy\tmaybe\tcal\t1\tts\tann").has_value());
  CHECK_FALSE(parse_record("1\thappy\tmental\tcal\t2\tts\tann").has_value());
}

TEST_CASE("read_session_log stops at an unterminated line") {
  std::istringstream in("0\ta\tmental\trandom\t1\tt\tx\n0\tb\tphysical\trandom\t1\tt\tx\n0\tc\tmen");
  const LogReadResult r = read_session_log(in);
  CHECK(r.records.size() == 2);
  CHECK(r.bad_line == std::size_t{3});
}

TEST_CASE("create refuses an existing session") {
  SessionFixture f;
  CHECK_THROWS_AS(SessionDirectory::create(f.session_dir, IterationConfig{}, DataSources{}), Error);
}

TEST_CASE("every annotation is on disk before submit returns") {
  SessionFixture f;
  auto dir = SessionDirectory::open(f.session_dir);
  annotate(*dir, f.lex.truth, 3);
  const LogReadResult log = read_session_log(f.session_dir / "annotations.log");
  REQUIRE(log.records.size() == 3);
  CHECK(log.records == dir->session().state().archive);
}

TEST_CASE("resume after 17 annotations reproduces the state") {
  SessionFixture f(StrategyKind::kCal);
  PoolState before;
  {
    auto dir = SessionDirectory::open(f.session_dir);
    annotate(*dir, f.lex.truth, 17);
    before = dir->session().state();
  }
  auto dir = SessionDirectory::open(f.session_dir);
  CHECK(dir->replay_result().applied == 17);
  CHECK(dir->session().state() == before);
  CHECK_FALSE(fs::exists(f.session_dir / "annotations.log.bad"));
}

TEST_CASE("truncated final line resumes after 16 annotations") {
  SessionFixture f;
  PoolState after16;
  {
    auto dir = SessionDirectory::open(f.session_dir);
    annotate(*dir, f.lex.truth, 16);
    after16 = dir->session().state();
    annotate(*dir, f.lex.truth, 1);
  }
  const fs::path log = f.session_dir / "annotations.log";
  const std::string text = read_file(log);
  fs::resize_file(log, text.size() - 5);

  auto dir = SessionDirectory::open(f.session_dir);
  CHECK(dir->log_read().bad_line == std::size_t{17});
  CHECK(dir->session().state() == after16);
  CHECK(fs::exists(f.session_dir / "annotations.log.bad"));
  CHECK(read_session_log(log).records.size() == 16);

  // appending continues from the valid prefix
  annotate(*dir, f.lex.truth, 1);
  const LogReadResult reread = read_session_log(log);
  CHECK_FALSE(reread.bad_line.has_value());
  CHECK(reread.records.size() == 17);
}

TEST_CASE("resume across an iteration boundary restores the model") {
  SessionFixture f(StrategyKind::kEntropy);
  PoolState before;
  ClassifierModel model;
  {
    auto dir = SessionDirectory::open(f.session_dir);
    Session& s = dir->session();
    TruthOracle oracle(f.lex.truth);
    while (s.state().iteration < 2 || s.state().iteration_annotations < 9) {
      if (s.status() == SessionStatus::kAwaitingRetrain) {
        s.finish_iteration();
        dir->persist_outputs();
        continue;
      }
      const std::string w = s.next_candidate();
      s.submit(w, oracle.annotate(w));
    }
    before = s.state();
    model = *s.model();
    CHECK(fs::exists(f.session_dir / "model-1.ckpt"));
    CHECK(fs::exists(f.session_dir / "model-2.ckpt"));
    CHECK(load_model(f.session_dir / "model-2.ckpt") == model);
  }
  auto dir = SessionDirectory::open(f.session_dir);
  CHECK(dir->session().state() == before);
  REQUIRE(dir->session().model() != nullptr);
  CHECK(*dir->session().model() == model);
}

TEST_CASE("a log from a different configuration stops replay at the first mismatch") {
  SessionFixture f;
  {
    auto dir = SessionDirectory::open(f.session_dir);
    annotate(*dir, f.lex.truth, 5);
  }
  std::ofstream(f.session_dir / "annotations.log", std::ios::app)
      << "0\tnot-a-pool-word\tmental\trandom\t1\tt\tx\n";
  auto dir = SessionDirectory::open(f.session_dir);
  CHECK(dir->replay_result().applied == 5);
  CHECK(dir->replay_result().stopped_at == std::size_t{5});
  CHECK(read_session_log(f.session_dir / "annotations.log").records.size() == 5);
}

TEST_CASE("session data from a gloss lexicon and word vectors") {
  TempDir tmp;
  std::ofstream(tmp / "lex.gloss") << "happy\ta\tfeeling joy\nsad\ta\tfeeling sorrow\nrock\tn\ta stone\n"
                                      "hard\ta\tlike a stone\n";
  std::ofstream(tmp / "vec.txt") << "4 2\nfeeling 1 0\njoy 0 1\nsorrow 0 -1\nstone 5 5\n";
  std::ofstream(tmp / "test.tsv") << "hard\tphysical\n";
  DataSources src;
  src.lexicon = tmp / "lex.gloss";
  src.vectors = tmp / "vec.txt";
  src.testset = tmp / "test.tsv";
  const SessionData data = load_session_data(src);
  CHECK(data.pool == std::vector<std::string>{"happy", "sad"});
  REQUIRE(data.testset.size() == 1);
  CHECK(data.testset[0].features == FeatureVector{5, 5});
  CHECK(data.features.at("happy").features == FeatureVector{0.5, 0.5});
  REQUIRE(data.lexicon.has_value());

  DataSources none;
  CHECK_THROWS_AS(load_session_data(none), ConfigError);
}
