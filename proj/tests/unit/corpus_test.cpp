#include <algorithm>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "smarttodo/corpus.hpp"
#include "smarttodo/text.hpp"

using namespace smarttodo;
using namespace smarttodo::corpus;

namespace {

const char* kValidRecord =
    R"({"id":"r1","candidate":{"from":"Bob","to":["Alice"],"subject":"Hello?",)"
    R"("body":"Hi Alice. I will send it to you.","sent_time":200,"extra":1},)"
    R"("commitment_index":1,"annotations":["Send it to Alice"],"unknown":true})";

const char* kThreadRecord =
    R"({"id":"r2","candidate":{"from":"Bob","to":["Alice"],"subject":"Re: sales",)"
    R"("body":"Sure. I will send the sales report.","sent_time":500},)"
    R"("previous":{"id":"m0","from":"Alice","to":["Bob"],"subject":"sales",)"
    R"("body":"Could you send me the sales report?","sent_time":100},)"
    R"("commitment_index":1,"annotations":["Send sales report to Alice","Send the report"],)"
    R"("helpful_labels":[false,false,true]})";

LoadResult parse(const std::string& text, bool strict = true) {
  std::istringstream in(text);
  return parse_corpus(in, LoadOptions{strict});
}

std::vector<TodoInstance> make_instances(std::size_t n) {
  SynthSpec spec;
  spec.n_instances = n;
  spec.entity_pool = 50;
  spec.seed = 99;
  return synth_corpus(spec);
}

}  // namespace

TEST(LoadCorpus, SingleValidRecord) {
  const auto r = parse(std::string(kValidRecord) + "\n");
  ASSERT_EQ(r.instances.size(), 1u);
  const auto& inst = r.instances[0];
  EXPECT_EQ(inst.id, "r1");
  EXPECT_EQ(inst.thread.candidate.id, "r1/c");
  EXPECT_EQ(inst.commitment_sentence(), "I will send it to you.");
  EXPECT_FALSE(inst.thread.previous.has_value());
  EXPECT_FALSE(inst.helpful_labels.has_value());
}

TEST(LoadCorpus, ThreadLinkageResolved) {
  const auto r = parse(kThreadRecord);
  ASSERT_EQ(r.instances.size(), 1u);
  const auto& t = r.instances[0].thread;
  ASSERT_TRUE(t.previous.has_value());
  EXPECT_EQ(t.candidate.reply_to_id, std::optional<std::string>("m0"));
  EXPECT_EQ(r.instances[0].all_sentences().size(), 3u);
}

TEST(LoadCorpus, IndexOutOfRangeNamesLineAndField) {
  std::string bad = kValidRecord;
  bad.replace(bad.find("\"commitment_index\":1"), 20, "\"commitment_index\":7");
  try {
    parse("\n" + bad);
    FAIL() << "expected a schema error";
  } catch (const CorpusError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("commitment_index"), std::string::npos) << msg;
  }
}

TEST(LoadCorpus, NonStrictCollectsDiagnostics) {
  std::string missing = kThreadRecord;
  missing.replace(missing.find("\"subject\":\"Re: sales\","), 22, "");
  const std::string text = std::string(kValidRecord) + "\n" + missing + "\n" +
                           std::string(kThreadRecord) + "\n";
  const auto r = parse(text, false);
  EXPECT_EQ(r.instances.size(), 2u);
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].line, 2u);
  EXPECT_EQ(r.diagnostics[0].field, "candidate.subject");
}

TEST(LoadCorpus, SchemaViolations) {
  auto field_of = [](std::string rec) {
    const auto r = parse(rec, false);
    return r.diagnostics.empty() ? std::string("<none>") : r.diagnostics[0].field;
  };
  std::string s = kThreadRecord;
  EXPECT_EQ(field_of("{not json"), "");
  EXPECT_EQ(field_of(std::string(s).replace(s.find("[false,false,true]"), 18, "[true]")),
            "helpful_labels");
  EXPECT_EQ(field_of(std::string(s).replace(s.find("\"sent_time\":100"), 15, "\"sent_time\":900")),
            "previous.sent_time");
  EXPECT_EQ(field_of(std::string(kValidRecord).replace(std::string(kValidRecord).find("[\"Send it"),
                                                       20, "[]")),
            "annotations");
  const std::string twice = std::string(kValidRecord) + "\n" + kValidRecord;
  const auto r = parse(twice, false);
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].field, "id");
}

TEST(LoadCorpus, UnreadableFile) {
  EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl"), CorpusError);
}

TEST(LoadCorpus, SerializeRoundTripProperty) {
  const auto original = make_instances(200);
  const std::string text = serialize_corpus(original);
  const auto back = parse(text).instances;
  EXPECT_EQ(back, original);
  EXPECT_EQ(serialize_corpus(back), text);
  const auto hand = parse(std::string(kValidRecord) + "\n" + kThreadRecord).instances;
  EXPECT_EQ(parse(serialize_corpus(hand)).instances, hand);
}

TEST(SplitDataset, SmallArithmetic) {
  const auto inst = make_instances(10);
  const auto s = split_dataset(inst, {0.8, 0.1, 0.1}, 4);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.validation.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
}

TEST(SplitDataset, DefaultRatios) {
  std::vector<TodoInstance> inst(9349);
  for (std::size_t i = 0; i < inst.size(); ++i) inst[i].id = std::to_string(i);
  const auto s = split_dataset(inst, SplitRatios{}, 1);
  EXPECT_EQ(s.train.size(), 7349u);
  EXPECT_EQ(s.validation.size(), 1000u);
  EXPECT_EQ(s.test.size(), 1000u);
}

TEST(SplitDataset, Deterministic) {
  const auto inst = make_instances(30);
  const auto a = split_dataset(inst, {0.6, 0.2, 0.2}, 17);
  const auto b = split_dataset(inst, {0.6, 0.2, 0.2}, 17);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_EQ(a.test, b.test);
  const auto c = split_dataset(inst, {0.6, 0.2, 0.2}, 18);
  EXPECT_NE(a.train, c.train);
}

TEST(SplitDataset, Errors) {
  const auto inst = make_instances(5);
  EXPECT_THROW(split_dataset(inst, {0.5, 0.2, 0.2}, 1), CorpusError);
  EXPECT_THROW(split_dataset(inst, {1.2, -0.1, -0.1}, 1), CorpusError);
  EXPECT_THROW(split_dataset({inst[0], inst[1]}, {0.8, 0.1, 0.1}, 1), CorpusError);
}

TEST(SplitDataset, DisjointExhaustiveProperty) {
  numeric::Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.below(60);
    std::vector<TodoInstance> inst(n);
    for (std::size_t i = 0; i < n; ++i) inst[i].id = "i" + std::to_string(i);
    const double v = rng.uniform(0.0, 0.5);
    const double t = rng.uniform(0.0, 1.0 - v);
    const SplitRatios ratios{1.0 - v - t, v, t};
    const auto s = split_dataset(inst, ratios, rng.next());
    std::multiset<std::string> ids;
    for (const auto* part : {&s.train, &s.validation, &s.test}) {
      for (const auto& x : *part) ids.insert(x.id);
    }
    ASSERT_EQ(ids.size(), n);
    ASSERT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), n);
    ASSERT_EQ(s.validation.size(), static_cast<std::size_t>(std::floor(n * v + 1e-7)));
    ASSERT_EQ(s.test.size(), static_cast<std::size_t>(std::floor(n * t + 1e-7)));
  }
}

TEST(ChooseReference, Examples) {
  EXPECT_EQ(choose_reference({"send report to Bob", "send the quarterly report to Bob"}),
            "send report to Bob");
  EXPECT_EQ(choose_reference({"only one"}), "only one");
  EXPECT_EQ(choose_reference({"send it now", "mail it today"}), "send it now");
  EXPECT_THROW(choose_reference(std::vector<std::string>{}), CorpusError);
}

TEST(ChooseReference, NeverLongerThanAnyInputProperty) {
  numeric::Rng rng(8);
  const std::vector<std::string> words = {"send", "the", "report", "to", "bob", ",", "now"};
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> anns(1 + rng.below(3));
    for (auto& a : anns) {
      const std::size_t len = 1 + rng.below(8);
      for (std::size_t k = 0; k < len; ++k) a += (k ? " " : "") + words[rng.below(words.size())];
    }
    const std::size_t chosen = text::tokenize(choose_reference(anns)).size();
    for (const auto& a : anns) ASSERT_LE(chosen, text::tokenize(a).size());
  }
}

TEST(Synth, SingleInstanceHasOneHelpfulInCandidate) {
  SynthSpec spec;
  spec.n_instances = 1;
  const auto inst = synth_corpus(spec);
  ASSERT_EQ(inst.size(), 1u);
  const auto& labels = *inst[0].helpful_labels;
  const std::size_t n_c = inst[0].candidate_sentences().size();
  std::size_t in_c = 0;
  for (std::size_t k = 0; k < n_c; ++k) {
    if (labels[k]) {
      ++in_c;
      EXPECT_NE(k, inst[0].commitment_sentence_index);
    }
  }
  EXPECT_EQ(in_c, 1u);
  EXPECT_EQ(std::count(labels.begin(), labels.end(), true), 1);
}

TEST(Synth, SameSeedByteIdentical) {
  SynthSpec spec;
  spec.n_instances = 300;
  spec.seed = 5;
  EXPECT_EQ(serialize_corpus(synth_corpus(spec)), serialize_corpus(synth_corpus(spec)));
  spec.seed = 6;
  const auto other = serialize_corpus(synth_corpus(spec));
  spec.seed = 5;
  EXPECT_NE(serialize_corpus(synth_corpus(spec)), other);
}

TEST(Synth, EmptyEntityPoolIsAnError) {
  SynthSpec spec;
  spec.entity_pool = 0;
  EXPECT_THROW(synth_corpus(spec), CorpusError);
}

TEST(Synth, InstancesSatisfyLoaderInvariants) {
  SynthSpec spec;
  spec.n_instances = 500;
  const auto inst = synth_corpus(spec);
  EXPECT_EQ(parse(serialize_corpus(inst)).instances.size(), 500u);
}

TEST(Synth, PlantedStructureProperty) {
  SynthSpec spec;
  spec.n_instances = 1000;
  spec.seed = 77;
  const auto res = synth_corpus_detailed(spec);
  const auto fixed = corpus::detail::fixed_vocabulary();
  for (std::size_t i = 0; i < res.instances.size(); ++i) {
    const auto& inst = res.instances[i];
    const auto& plan = res.plans[i];
    const auto ref = corpus::detail::content_lemmas(reference_of(inst));
    const auto sentences = inst.all_sentences();
    const std::string h = inst.commitment_sentence();
    EXPECT_NE(text::tokenize(h).size(), 0u);
    ASSERT_TRUE((*inst.helpful_labels)[plan.helpful_index]);

    const auto helpful = corpus::detail::content_lemmas(sentences[plan.helpful_index]);
    const std::size_t best = corpus::detail::overlap(helpful, ref);
    ASSERT_GE(best, 2u) << inst.id;
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      if (k == plan.helpful_index || k == inst.commitment_sentence_index) continue;
      ASSERT_LT(corpus::detail::overlap(corpus::detail::content_lemmas(sentences[k]), ref), best)
          << inst.id << " sentence " << k;
      ASSERT_FALSE((*inst.helpful_labels)[k]);
    }

    const auto ref_tokens = text::tokenize(reference_of(inst));
    ASSERT_NE(std::find(ref_tokens.begin(), ref_tokens.end(), plan.entity), ref_tokens.end());
    ASSERT_EQ(fixed.count(plan.entity), 0u);
    const auto h_tokens = text::tokenize(h);
    ASSERT_NE(std::find(h_tokens.begin(), h_tokens.end(), plan.entity), h_tokens.end());
    ASSERT_TRUE(text::is_stopword("will") &&
                (h.rfind("I will", 0) == 0 || h.rfind("I'll", 0) == 0 || h.rfind("I shall", 0) == 0));
  }
}

TEST(Synth, EntityOovRateAgainstTrainedTargetVocabulary) {
  SynthSpec spec;
  spec.n_instances = 2000;
  const auto res = synth_corpus_detailed(spec);
  std::unordered_map<std::string, std::string> entity_of;
  for (std::size_t i = 0; i < res.instances.size(); ++i) {
    entity_of[res.instances[i].id] = res.plans[i].entity;
  }
  const auto split = split_dataset(res.instances, {0.8, 0.1, 0.1}, 1);
  std::vector<std::vector<std::string>> targets;
  for (const auto& inst : split.train) targets.push_back(text::tokenize(reference_of(inst)));
  const auto vocab = text::build_vocabulary(targets);
  std::size_t oov = 0, total = 0;
  for (const auto& inst : res.instances) {
    for (const auto& t : text::tokenize(reference_of(inst))) {
      if (t != entity_of[inst.id]) continue;
      ++total;
      oov += vocab.contains(t) ? 0 : 1;
    }
  }
  ASSERT_EQ(total, 2000u);
  EXPECT_GE(static_cast<double>(oov) / total, 0.95);
}
