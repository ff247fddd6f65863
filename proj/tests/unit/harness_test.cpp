#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "smarttodo/corpus.hpp"
#include "smarttodo/harness.hpp"

using namespace smarttodo;
using namespace smarttodo::harness;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("smarttodo_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Small dimensions so every stage trains in seconds.
PipelineConfig small_config(const fs::path& dir, std::uint64_t seed = 5) {
  return load_config({}, {{"pipeline.seed", std::to_string(seed)},
                          {"paths.output", dir.string()},
                          {"paths.classifier", (dir / "classifier").string()},
                          {"paths.generator", (dir / "generator").string()},
                          {"synth.n_instances", "240"},
                          {"commitment.embed_dim", "16"},
                          {"commitment.hidden", "16"},
                          {"commitment.attention_dim", "8"},
                          {"commitment.max_epochs", "6"},
                          {"selection.dim", "32"},
                          {"seq2seq.embed_dim", "16"},
                          {"seq2seq.hidden", "32"},
                          {"seq2seq.attention_dim", "32"},
                          {"seq2seq.batch_size", "16"},
                          {"seq2seq.max_epochs", "5"}});
}

/// Trained classifier and generator under `dir`, and the corpus they saw.
struct Trained {
  PipelineConfig cfg;
  corpus::SynthResult synth;
  corpus::DatasetSplit split;
  std::shared_ptr<const selection::WordVectorTable> table;
};

Trained train_all(const fs::path& dir, std::uint64_t seed = 5) {
  Trained t;
  t.cfg = small_config(dir, seed);
  t.synth = corpus::synth_corpus_detailed(t.cfg.synth);
  t.split = corpus::split_dataset(t.synth.instances, t.cfg.split, numeric::derive_seed(t.cfg.seed, "split"));
  t.table = word_vectors(t.cfg, t.synth.instances);
  train_classifier_stage(t.cfg, t.split);
  const auto provider = make_provider(t.cfg.provider, t.cfg, t.table);
  train_generator_stage(t.cfg, t.split, *provider);
  return t;
}

const Trained& shared() {
  static const Trained t = train_all(scratch("shared"));
  return t;
}

std::vector<corpus::EmailThread> threads_of(const std::vector<corpus::TodoInstance>& data) {
  std::vector<corpus::EmailThread> out;
  for (const auto& inst : data) out.push_back(inst.thread);
  return out;
}

struct EnvGuard {
  std::string name;
  EnvGuard(std::string n, const std::string& value) : name(std::move(n)) { ::setenv(name.c_str(), value.c_str(), 1); }
  ~EnvGuard() { ::unsetenv(name.c_str()); }
};

}  // namespace

TEST(Config, Defaults) {
  const auto c = load_config();
  EXPECT_DOUBLE_EQ(c.threshold, 0.9);
  EXPECT_EQ(c.tau, 10u);
  EXPECT_EQ(c.k, 2u);
  EXPECT_EQ(c.provider, "wv-max");
  EXPECT_EQ(c.model.variant, seq2seq::Variant::Copy);
  EXPECT_EQ(c.model.embed_dim, 100u);
  EXPECT_EQ(c.model.hidden, 256u);
  EXPECT_EQ(c.train.batch_size, 64u);
  EXPECT_EQ(c.beam.width, 5u);
}

TEST(Config, FileThenEnvironmentThenOverride) {
  const auto dir = scratch("precedence");
  const auto ini = dir / "c.ini";
  std::ofstream(ini) << "[pipeline]\ntau = 7\nk = 3\nthreshold = 0.5\n";

  auto c = load_config(ini.string());
  EXPECT_EQ(c.tau, 7u);
  EXPECT_EQ(c.k, 3u);

  EnvGuard env("SMARTTODO_PIPELINE_TAU", "8");
  c = load_config(ini.string());
  EXPECT_EQ(c.tau, 8u);
  EXPECT_DOUBLE_EQ(c.threshold, 0.5);

  c = load_config(ini.string(), {{"pipeline.tau", "9"}});
  EXPECT_EQ(c.tau, 9u);
  EXPECT_EQ(c.k, 3u);
}

TEST(Config, UnknownKeysAndBadValuesAreErrors) {
  const auto dir = scratch("unknown");
  const auto ini = dir / "c.ini";
  std::ofstream(ini) << "[seq2seq]\nhiden = 3\n";
  EXPECT_THROW(load_config(ini.string()), HarnessError);
  EXPECT_THROW(load_config({}, {{"pipeline.nope", "1"}}), HarnessError);
  EXPECT_THROW(load_config({}, {{"pipeline.tau", "ten"}}), HarnessError);
  EXPECT_THROW(load_config({}, {{"pipeline.threshold", "1.5"}}), HarnessError);
  EXPECT_THROW(load_config({}, {{"pipeline.provider", "glove"}}), HarnessError);
  EXPECT_THROW(load_config({}, {{"seq2seq.variant", "pointer"}}), Seq2SeqError);
  EXPECT_THROW(load_config({}, {{"seq2seq.patience_rule", "some"}}), HarnessError);
  EXPECT_THROW(load_config((dir / "missing.ini").string()), HarnessError);
}

TEST(Config, DumpLoadRoundTrip) {
  auto c = load_config({}, {{"pipeline.seed", "11"},
                            {"pipeline.threshold", "0.123456789012345"},
                            {"seq2seq.variant", "bifocal"},
                            {"seq2seq.patience_rule", "all"},
                            {"selection.subword", "true"},
                            {"paths.corpus", "data/x.jsonl"}});
  const auto text = dump_config(c);
  const auto ini = scratch("roundtrip") / "c.ini";
  std::ofstream(ini) << text;
  const auto back = load_config(ini.string());
  EXPECT_EQ(dump_config(back), text);
  EXPECT_EQ(back.model.variant, seq2seq::Variant::Bifocal);
  EXPECT_EQ(back.train.patience_rule, numeric::PatienceRule::AllMetricsStall);
  EXPECT_DOUBLE_EQ(back.threshold, 0.123456789012345);
  EXPECT_TRUE(back.word_vectors.subword);
  EXPECT_EQ(back.model.seed, c.model.seed);
}

TEST(Config, GlobalSeedFansOutToStageSeeds) {
  const auto a = load_config({}, {{"pipeline.seed", "3"}});
  const auto b = load_config({}, {{"pipeline.seed", "3"}});
  const auto c = load_config({}, {{"pipeline.seed", "4"}});
  EXPECT_EQ(a.model.seed, b.model.seed);
  EXPECT_EQ(a.train.seed, b.train.seed);
  EXPECT_NE(a.model.seed, c.model.seed);
  EXPECT_NE(a.synth.seed, a.classifier.seed);
  EXPECT_NE(a.model.seed, a.train.seed);
  EXPECT_NE(a.word_vectors.seed, a.synth.seed);
}

TEST(Pipeline, MissingCheckpointIsAnError) {
  auto cfg = small_config(scratch("missing"));
  EXPECT_THROW(load_models(cfg, nullptr), HarnessError);
  EXPECT_THROW(load_instances(""), HarnessError);
  EXPECT_THROW(load_instances((scratch("missing") / "none.jsonl").string()), CorpusError);
}

TEST(Pipeline, NoTodoBelowThresholdProperty) {
  const auto& t = shared();
  const auto models = load_models(t.cfg, t.table);
  const auto threads = threads_of(t.split.test);
  auto cfg = t.cfg;
  std::vector<double> scores;
  for (const auto& o : run_pipeline(models, cfg, threads)) scores.push_back(o.max_score);
  std::sort(scores.begin(), scores.end());
  for (double threshold : {0.0, scores[scores.size() / 2], scores.back(), 1.0}) {
    cfg.threshold = threshold;
    for (const auto& o : run_pipeline(models, cfg, threads)) {
      EXPECT_EQ(o.todo.has_value(), o.max_score >= threshold) << o.email_id << " at " << threshold;
      EXPECT_EQ(o.commitment.has_value(), o.todo.has_value());
    }
  }
}

TEST(Pipeline, NoSentencesMeansNoTodo) {
  const auto& t = shared();
  const auto models = load_models(t.cfg, t.table);
  corpus::EmailThread thread;
  thread.candidate.id = "empty";
  const auto out = run_pipeline(models, t.cfg, {thread});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_FALSE(out[0].todo.has_value());
  EXPECT_TRUE(to_json(out[0])["todo"].is_null());
}

TEST(Pipeline, PlantedEntityReachesTheTodo) {
  const auto& t = shared();
  const auto models = load_models(t.cfg, t.table);
  std::map<std::string, std::string> entity;
  for (std::size_t i = 0; i < t.synth.instances.size(); ++i) {
    entity[t.synth.instances[i].thread.candidate.id] = t.synth.plans[i].entity;
  }
  std::size_t gated = 0, hits = 0;
  for (const auto& o : run_pipeline(models, t.cfg, threads_of(t.split.test))) {
    if (!o.todo) continue;
    ++gated;
    const auto toks = text::tokenize(*o.todo);
    hits += std::count(toks.begin(), toks.end(), entity.at(o.email_id)) > 0;
  }
  ASSERT_GT(gated, t.split.test.size() / 2);
  EXPECT_GE(static_cast<double>(hits) / static_cast<double>(gated), 0.9) << hits << " of " << gated;
}

TEST(Pipeline, SameConfigSameOutputs) {
  const auto& t = shared();
  const auto a = load_models(t.cfg, t.table);
  const auto b = load_models(t.cfg, t.table);
  const auto threads = threads_of(t.split.test);
  const auto x = run_pipeline(a, t.cfg, threads);
  const auto y = run_pipeline(b, t.cfg, threads);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(to_json(x[i]).dump(), to_json(y[i]).dump());
}

TEST(Pipeline, SameSeedByteIdenticalCheckpoints) {
  const auto& t = shared();
  const auto dir = scratch("again");
  const auto again = train_all(dir);
  for (const char* f : {"classifier", "generator"}) {
    for (const auto& e : fs::directory_iterator(fs::path(t.cfg.paths.output) / f)) {
      EXPECT_EQ(read_file(e.path()), read_file(dir / f / e.path().filename())) << e.path();
    }
  }
}

TEST(SelectionEval, MonotoneInKAndFixedLayout) {
  const auto& t = shared();
  const selection::TfBinary tf;
  const selection::WordVecPool mean(t.table, selection::Pooling::Mean), max(t.table, selection::Pooling::Max);
  const auto r = run_selection_eval(t.synth.instances, {&tf, &mean, &max}, t.cfg.tau);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].provider, tf.name());
  for (const auto& row : r.rows) {
    EXPECT_GE(r.value(row.provider, 3), r.value(row.provider, 2)) << row.provider;
    EXPECT_EQ(row.evaluated, t.synth.instances.size());
  }
  const auto table = r.table();
  const auto jsonl = r.jsonl();
  EXPECT_EQ(table.substr(0, table.find('\n')), "provider    K=2   K=3      n");
  EXPECT_EQ(std::count(jsonl.begin(), jsonl.end(), '\n'), 6);
  EXPECT_THROW(r.value("tf", 4), HarnessError);
}

TEST(SelectionEval, UnlabeledInstancesAreAnError) {
  auto data = shared().synth.instances;
  for (auto& inst : data) inst.helpful_labels.reset();
  const selection::TfBinary tf;
  EXPECT_THROW(run_selection_eval(data, {&tf}), HarnessError);
}

TEST(Experiment, FixedRowOrderAndReproducibleBytes) {
  const auto& t = shared();
  auto cfg = t.cfg;
  cfg.train.max_epochs = 2;
  const selection::TfBinary tf;
  const std::vector<seq2seq::Variant> variants{seq2seq::Variant::Copy, seq2seq::Variant::Vanilla};
  const auto a = run_experiment(cfg, t.split, tf, variants);
  const auto b = run_experiment(cfg, t.split, tf, variants);
  ASSERT_EQ(a.rows.size(), 3u);
  EXPECT_EQ(a.rows[0].system, "concatenate");
  EXPECT_EQ(a.rows[1].system, "vanilla");
  EXPECT_EQ(a.rows[2].system, "copy");
  EXPECT_EQ(a.table(), b.table());
  EXPECT_EQ(a.jsonl(), b.jsonl());
  EXPECT_EQ(a.row("copy").outputs, b.row("copy").outputs);
  EXPECT_EQ(a.row("copy").metrics.n_instances, t.split.test.size());
  EXPECT_THROW(a.row("bifocal"), HarnessError);
}

TEST(RunLog, AppendOnlyWithReloadableSnapshot) {
  const auto dir = scratch("runlog");
  const auto path = (dir / "run.log.jsonl").string();
  const auto cfg = small_config(dir);
  {
    RunLog log(path, cfg, "train-gen");
    log.epoch("copy", {1, 2.5, 0.25, 9.0, 0.1, true});
  }
  const auto first = read_file(path);
  {
    RunLog log(path, cfg, "evaluate");
    log.event("done", {{"rows", 4}});
  }
  const auto both = read_file(path);
  ASSERT_EQ(both.substr(0, first.size()), first);

  std::istringstream lines(both);
  std::vector<nlohmann::json> records;
  for (std::string line; std::getline(lines, line);) records.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[0]["event"], "start");
  EXPECT_EQ(records[0]["version"], kVersion);
  EXPECT_EQ(records[1]["stage"], "copy");
  EXPECT_EQ(records[3]["rows"], 4);

  const auto ini = dir / "snapshot.ini";
  std::ofstream(ini) << records[0]["config"].get<std::string>();
  EXPECT_EQ(dump_config(load_config(ini.string())), dump_config(cfg));
}

TEST(Cli, ErrorsExitNonzeroWithOneLineNamingTheStage) {
  const auto dir = scratch("cli");
  const std::string cli = SMARTTODO_CLI;
  const auto run = [&](const std::string& args) {
    const auto err = dir / "err.txt";
    const int status = std::system((cli + " " + args + " > /dev/null 2> " + err.string()).c_str());
    return std::pair{status, read_file(err)};
  };
  const auto [s1, e1] = run("pipeline --input " + (dir / "none.jsonl").string());
  EXPECT_NE(s1, 0);
  EXPECT_EQ(e1.rfind("smarttodo: corpus: ", 0), 0u) << e1;
  EXPECT_EQ(std::count(e1.begin(), e1.end(), '\n'), 1);

  const auto [s2, e2] = run("synth --out " + (dir / "c.jsonl").string() + " --set seq2seq.bogus=1");
  EXPECT_NE(s2, 0);
  EXPECT_EQ(e2, "smarttodo: harness: unknown config key seq2seq.bogus\n");

  const auto [s3, e3] = run("synth --out " + (dir / "c.jsonl").string() + " --n 5");
  EXPECT_EQ(s3, 0) << e3;
  EXPECT_EQ(corpus::load_corpus((dir / "c.jsonl").string()).instances.size(), 5u);

  const auto [s4, e4] = run("pipeline --input " + (dir / "c.jsonl").string() + " --output " + dir.string() +
                            " --classifier " + (dir / "nope").string() + " --provider tf");
  EXPECT_NE(s4, 0);
  EXPECT_EQ(e4.rfind("smarttodo: harness: missing classifier", 0), 0u) << e4;
}
