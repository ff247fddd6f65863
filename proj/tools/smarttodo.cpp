#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smarttodo/commitment.hpp"
#include "smarttodo/corpus.hpp"
#include "smarttodo/harness.hpp"
#include "smarttodo/selection.hpp"
#include "smarttodo/seq2seq.hpp"

using namespace smarttodo;
using harness::PipelineConfig;

namespace {

/// Options shared by every subcommand; each flag becomes a config override.
struct Common {
  std::string config;
  std::vector<std::string> set;
  std::map<std::string, std::string> flags;

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "INI config file");
    app->add_option("--set", set, "Override a config key: section.key=value (repeatable)");
    flag(app, "--seed", "pipeline.seed", "Global seed");
    flag(app, "--corpus", "paths.corpus", "Corpus file (JSON lines)");
    flag(app, "--output", "paths.output", "Output directory");
    flag(app, "--vectors", "paths.vectors", "Word-vector file for wv-* providers");
    flag(app, "--classifier", "paths.classifier", "Classifier checkpoint directory");
    flag(app, "--generator", "paths.generator", "Generator checkpoint directory");
    flag(app, "--provider", "pipeline.provider", "Selection provider: tf, wv-mean, wv-max, file");
    flag(app, "--k", "pipeline.k", "Selected sentences per instance");
    flag(app, "--tau", "pipeline.tau", "Frequent tokens added to the context");
    flag(app, "--threshold", "pipeline.threshold", "Commitment score threshold");
    flag(app, "--variant", "seq2seq.variant", "Generator variant: vanilla, copy, bifocal");
    flag(app, "--beam", "seq2seq.beam", "Beam width");
    flag(app, "--epochs", "seq2seq.max_epochs", "Maximum generator epochs");
  }

  void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(name, [this, key](const std::string& v) { flags[key] = v; }, help);
  }

  PipelineConfig load() const {
    auto overrides = flags;
    for (const auto& s : set) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw HarnessError("--set expects section.key=value, got '" + s + "'");
      overrides[s.substr(0, eq)] = s.substr(eq + 1);
    }
    return harness::load_config(config, overrides);
  }
};

void write_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw HarnessError("cannot write " + path);
  out << text;
}

std::shared_ptr<const selection::WordVectorTable> vectors_for(const PipelineConfig& cfg,
                                                             const std::vector<corpus::TodoInstance>& data,
                                                             const std::string& provider) {
  if (provider != "wv-mean" && provider != "wv-max") return nullptr;
  auto table = harness::word_vectors(cfg, data);
  if (!cfg.paths.vectors.empty() && !std::filesystem::exists(cfg.paths.vectors)) {
    table->save(cfg.paths.vectors);
    std::cerr << "trained word vectors saved to " << cfg.paths.vectors << "\n";
  }
  return table;
}

corpus::DatasetSplit split_of(const PipelineConfig& cfg, const std::vector<corpus::TodoInstance>& data) {
  return corpus::split_dataset(data, cfg.split, numeric::derive_seed(cfg.seed, "split"));
}

void log_epoch(const std::string& stage, const seq2seq::EpochLog& e) {
  std::cerr << stage << " epoch " << e.epoch << ": loss " << harness::fixed(e.train_loss)
            << ", validation accuracy " << harness::fixed(e.validation_accuracy) << ", perplexity "
            << harness::fixed(e.validation_perplexity) << (e.best ? " *" : "") << "\n";
}

std::vector<seq2seq::Variant> parse_variants(const std::string& list) {
  std::vector<seq2seq::Variant> out;
  std::stringstream ss(list);
  for (std::string v; std::getline(ss, v, ',');) out.push_back(seq2seq::parse_variant(v));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Commitment detection, context selection and To-Do generation for email"};
  app.require_subcommand(1);
  std::string stage = "cli";

  Common common;

  auto* synth = app.add_subcommand("synth", "Write a seeded synthetic corpus");
  std::string synth_out;
  std::size_t synth_n = 0;
  synth->add_option("--out", synth_out, "Output file")->required();
  synth->add_option("--n", synth_n, "Number of instances (default from config)");

  auto* train_clf = app.add_subcommand("train-classifier", "Train the commitment classifier");
  auto* extract = app.add_subcommand("extract", "Score sentences and list commitments above threshold");
  std::string extract_input;
  extract->add_option("--input", extract_input, "Corpus file whose candidate emails are scored")->required();

  auto* select = app.add_subcommand("select", "Select helpful context sentences");
  bool select_eval = false;
  select->add_flag("--eval", select_eval, "Print the at-least-one-helpful table instead");

  auto* train_gen = app.add_subcommand("train-gen", "Train a To-Do generator");
  auto* generate = app.add_subcommand("generate", "Generate To-Dos for annotated records");
  std::string gen_ckpt, gen_input;
  generate->add_option("--ckpt", gen_ckpt, "Generator checkpoint directory")->required();
  generate->add_option("--input", gen_input, "Corpus file")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Train and compare generators on the test split");
  std::string eval_variants = "vanilla,copy,bifocal";
  evaluate->add_option("--variants", eval_variants, "Comma-separated variants");

  auto* pipeline = app.add_subcommand("pipeline", "Run detection, selection and generation end to end");
  std::string pipe_input;
  pipeline->add_option("--input", pipe_input, "Corpus file whose threads are processed")->required();

  for (auto* sub : {synth, train_clf, extract, select, train_gen, generate, evaluate, pipeline}) {
    common.add_to(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    stage = "config";
    PipelineConfig cfg = common.load();

    if (*synth) {
      stage = "synth";
      auto spec = cfg.synth;
      if (synth_n) spec.n_instances = synth_n;
      const auto data = corpus::synth_corpus(spec);
      corpus::save_corpus(synth_out, data);
      std::cerr << "wrote " << data.size() << " instances to " << synth_out << "\n";
      return 0;
    }

    stage = "corpus";
    if (*extract) cfg.paths.corpus = extract_input;
    if (*generate) cfg.paths.corpus = gen_input;
    if (*pipeline) cfg.paths.corpus = pipe_input;
    const auto data = harness::load_instances(cfg.paths.corpus);
    std::filesystem::create_directories(cfg.paths.output);
    harness::RunLog log(cfg.paths.output + "/run.log.jsonl", cfg, app.get_subcommands().front()->get_name());

    if (*train_clf) {
      stage = "commitment";
      const auto split = split_of(cfg, data);
      const auto r = harness::train_classifier_stage(cfg, split);
      const auto m = commitment::evaluate_classifier(r.model, commitment::labeled_sentences(split.test));
      for (const auto& e : r.log) {
        log.event("classifier_epoch", {{"epoch", e.epoch}, {"train_loss", e.train_loss},
                                       {"validation_accuracy", e.validation_accuracy}});
      }
      std::cout << "best epoch " << r.best_epoch << "; test accuracy " << harness::fixed(m.accuracy)
                << ", precision " << harness::fixed(m.precision) << ", recall " << harness::fixed(m.recall)
                << "\nsaved to " << cfg.paths.classifier << "\n";
      return 0;
    }

    if (*extract) {
      stage = "commitment";
      const auto clf = commitment::CommitmentClassifier::load(cfg.paths.classifier);
      std::vector<corpus::EmailMessage> emails;
      for (const auto& inst : data) emails.push_back(inst.thread.candidate);
      for (const auto& c : commitment::extract_candidates(clf, emails, cfg.threshold)) {
        nlohmann::ordered_json j;
        j["email_id"] = emails[c.email].id;
        j["sentence"] = c.sentence;
        j["text"] = c.text;
        j["score"] = c.score;
        std::cout << j.dump() << "\n";
      }
      return 0;
    }

    if (*select) {
      stage = "selection";
      if (select_eval) {
        const auto table = vectors_for(cfg, data, "wv-max");
        const selection::TfBinary tf;
        const selection::WordVecPool mean(table, selection::Pooling::Mean), max(table, selection::Pooling::Max);
        const auto report = harness::run_selection_eval(data, {&tf, &mean, &max}, cfg.tau);
        write_file(cfg.paths.output + "/selection.txt", report.table());
        write_file(cfg.paths.output + "/selection.jsonl", report.jsonl());
        std::cout << report.table();
        return 0;
      }
      const auto provider = harness::make_provider(cfg.provider, cfg, vectors_for(cfg, data, cfg.provider));
      for (const auto& inst : data) {
        nlohmann::ordered_json j;
        j["id"] = inst.id;
        j["selected"] = harness::selected_sentences(inst, *provider, cfg.k, cfg.tau);
        std::cout << j.dump() << "\n";
      }
      return 0;
    }

    if (*train_gen) {
      stage = "seq2seq";
      const auto split = split_of(cfg, data);
      const auto provider = harness::make_provider(cfg.provider, cfg, vectors_for(cfg, data, cfg.provider));
      const auto r = harness::train_generator_stage(cfg, split, *provider, [&](const seq2seq::EpochLog& e) {
        log_epoch(seq2seq::to_string(cfg.model.variant), e);
        log.epoch(seq2seq::to_string(cfg.model.variant), e);
      });
      std::cout << "best epoch " << r.best_epoch << " of " << r.log.size() << "; saved to "
                << cfg.paths.generator << "\n";
      return 0;
    }

    if (*generate) {
      stage = "seq2seq";
      const auto model = seq2seq::load_model(gen_ckpt);
      const auto provider = harness::make_provider(cfg.provider, cfg, vectors_for(cfg, data, cfg.provider));
      for (const auto& inst : data) {
        const auto in = seq2seq::serialize_input(inst, harness::selected_sentences(inst, *provider, cfg.k, cfg.tau));
        nlohmann::ordered_json j;
        j["id"] = inst.id;
        j["todo"] = seq2seq::beam_search(model, in, cfg.beam).str();
        std::cout << j.dump() << "\n";
      }
      return 0;
    }

    if (*evaluate) {
      stage = "harness";
      const auto split = split_of(cfg, data);
      const auto provider = harness::make_provider(cfg.provider, cfg, vectors_for(cfg, data, cfg.provider));
      const auto report = harness::run_experiment(cfg, split, *provider, parse_variants(eval_variants), true,
                                                  [&](const std::string& s, const seq2seq::EpochLog& e) {
                                                    log_epoch(s, e);
                                                    log.epoch(s, e);
                                                  });
      write_file(cfg.paths.output + "/generation.txt", report.table());
      write_file(cfg.paths.output + "/generation.jsonl", report.jsonl());
      std::cout << report.table();
      return 0;
    }

    if (*pipeline) {
      stage = "pipeline";
      const auto table = vectors_for(cfg, data, cfg.provider);
      const auto models = harness::load_models(cfg, table);
      std::vector<corpus::EmailThread> threads;
      for (const auto& inst : data) threads.push_back(inst.thread);
      std::string out;
      for (const auto& o : harness::run_pipeline(models, cfg, threads)) out += harness::to_json(o).dump() + "\n";
      write_file(cfg.paths.output + "/todos.jsonl", out);
      std::cout << out;
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "smarttodo: " << e.stage() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "smarttodo: " << stage << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
