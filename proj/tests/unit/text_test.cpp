#include <cstdio>
#include <filesystem>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "smarttodo/text.hpp"

using namespace smarttodo::text;
using Tokens = std::vector<std::string>;

namespace {

std::string random_string(std::mt19937_64& rng) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,:;!?'\"-()\t\n";
  std::uniform_int_distribution<std::size_t> len(0, 24);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[pick(rng)]);
  return s;
}

std::string random_word(std::mt19937_64& rng) {
  static const char* suffixes[] = {"", "s", "es", "ies", "ed", "ied", "ing", "ss", "sses", "eed"};
  std::uniform_int_distribution<std::size_t> len(1, 9);
  std::uniform_int_distribution<int> letter(0, 25);
  std::uniform_int_distribution<std::size_t> suf(0, std::size(suffixes) - 1);
  std::string w;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) w.push_back(static_cast<char>('a' + letter(rng)));
  return w + suffixes[suf(rng)];
}

}  // namespace

TEST(Tokenize, Clitic) {
  EXPECT_EQ(tokenize("I'll send it."), (Tokens{"i", "'ll", "send", "it", "."}));
}

TEST(Tokenize, Empty) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, WhitespaceSplit) { EXPECT_EQ(tokenize("Bug 62"), (Tokens{"bug", "62"})); }

TEST(Tokenize, NegationAndNumbers) {
  EXPECT_EQ(tokenize("Don't pay $3.50 at 10:00, ok?"),
            (Tokens{"do", "n't", "pay", "$", "3.50", "at", "10:00", ",", "ok", "?"}));
}

TEST(Tokenize, TypographicApostrophe) {
  EXPECT_EQ(tokenize("I\xE2\x80\x99m here"), (Tokens{"i", "'m", "here"}));
}

TEST(Tokenize, QuotesArePunctuation) {
  EXPECT_EQ(tokenize("'hello' world"), (Tokens{"'", "hello", "'", "world"}));
}

TEST(Tokenize, CollapsesWhitespace) {
  EXPECT_EQ(tokenize("  a \t\n b  "), (Tokens{"a", "b"}));
}

TEST(Tokenize, IdempotentOnJoinedOutputFuzz) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    const std::string s = random_string(rng);
    const Tokens once = tokenize(s);
    ASSERT_EQ(tokenize(join(once)), once) << "input: " << s;
  }
}

TEST(SplitSentences, TwoSentences) {
  EXPECT_EQ(split_sentences("Hi. I will send it."), (Tokens{"Hi.", "I will send it."}));
}

TEST(SplitSentences, NoTerminator) {
  EXPECT_EQ(split_sentences("I will send it"), (Tokens{"I will send it"}));
}

TEST(SplitSentences, AbbreviationGuard) {
  EXPECT_EQ(split_sentences("e.g. we ship Friday. Thanks."),
            (Tokens{"e.g. we ship Friday.", "Thanks."}));
}

TEST(SplitSentences, BlankLineSplits) {
  EXPECT_EQ(split_sentences("Hello Bob\n\nI will send the report"),
            (Tokens{"Hello Bob", "I will send the report"}));
}

TEST(SplitSentences, SingleNewlineDoesNotSplit) {
  EXPECT_EQ(split_sentences("I will send\nthe report."), (Tokens{"I will send the report."}));
}

TEST(SplitSentences, TerminatorInsideTokenDoesNotSplit) {
  EXPECT_EQ(split_sentences("Version 3.5 is out! Really?! Yes."),
            (Tokens{"Version 3.5 is out!", "Really?!", "Yes."}));
}

TEST(SplitSentences, EmptyAndBlankInputs) {
  EXPECT_TRUE(split_sentences("").empty());
  EXPECT_TRUE(split_sentences("  \n\n \n").empty());
}

TEST(SplitSentences, NeverEmptyFuzz) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5000; ++i) {
    for (const auto& s : split_sentences(random_string(rng))) ASSERT_FALSE(s.empty());
  }
}

TEST(Lemmatize, Examples) {
  EXPECT_EQ(lemmatize("databases"), "database");
  EXPECT_EQ(lemmatize("sent"), "send");
  EXPECT_EQ(lemmatize("database"), "database");
}

TEST(Lemmatize, SuffixRules) {
  EXPECT_EQ(lemmatize("tickets"), "ticket");
  EXPECT_EQ(lemmatize("batches"), "batch");
  EXPECT_EQ(lemmatize("classes"), "class");
  EXPECT_EQ(lemmatize("companies"), "company");
  EXPECT_EQ(lemmatize("status"), "status");
  EXPECT_EQ(lemmatize("updated"), "update");
  EXPECT_EQ(lemmatize("shipped"), "ship");
  EXPECT_EQ(lemmatize("running"), "run");
  EXPECT_EQ(lemmatize("making"), "make");
  EXPECT_EQ(lemmatize("finalized"), "finalize");
  EXPECT_EQ(lemmatize("copied"), "copy");
  EXPECT_EQ(lemmatize("agreed"), "agreed");
  EXPECT_EQ(lemmatize("Reports"), "report");
  EXPECT_EQ(lemmatize("62"), "62");
  EXPECT_EQ(lemmatize("."), ".");
}

TEST(Lemmatize, IrregularValuesAreFixedPoints) {
  for (const auto& [form, lemma] : irregular_lemmas()) {
    EXPECT_EQ(lemmatize(lemma), lemma) << form;
    EXPECT_EQ(lemmatize(form), lemma) << form;
  }
}

TEST(Lemmatize, IdempotentFuzz) {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 10000; ++i) {
    const std::string w = (i % 2 == 0) ? random_word(rng) : random_string(rng);
    const std::string once = lemmatize(w);
    ASSERT_EQ(lemmatize(once), once) << "input: " << w;
  }
}

TEST(Stopwords, Examples) {
  EXPECT_TRUE(is_stopword("the"));
  EXPECT_FALSE(is_stopword("server"));
  EXPECT_TRUE(is_stopword("will"));
  EXPECT_TRUE(is_stopword("'ll"));
}

TEST(Stopwords, InventorySize) {
  EXPECT_GE(stopwords().size(), 140u);
  EXPECT_LE(stopwords().size(), 180u);
}

TEST(Stopwords, ContentTokens) {
  EXPECT_TRUE(is_content_token("report"));
  EXPECT_TRUE(is_content_token("62"));
  EXPECT_FALSE(is_content_token("the"));
  EXPECT_FALSE(is_content_token("."));
}

TEST(Vocabulary, ThresholdKeepsFrequentTokens) {
  const std::vector<Tokens> corpus = {tokenize("a a b")};
  const Vocabulary v = build_vocabulary(corpus);
  EXPECT_TRUE(v.contains("a"));
  EXPECT_FALSE(v.contains("b"));
}

TEST(Vocabulary, EmptyCorpusHasSpecialsOnly) {
  const Vocabulary v = build_vocabulary(std::vector<Tokens>{});
  EXPECT_EQ(v.tokens(), default_specials());
  EXPECT_EQ(v.special_count(), 9u);
}

TEST(Vocabulary, TiesOrderedLexicographically) {
  const std::vector<Tokens> corpus = {{"y", "x", "y", "x", "z", "y", "x", "w", "w", "w", "w"}};
  const Vocabulary v = build_vocabulary(corpus);
  const std::size_t base = default_specials().size();
  EXPECT_EQ(v.token(base), "w");
  EXPECT_EQ(v.token(base + 1), "x");
  EXPECT_EQ(v.token(base + 2), "y");
  EXPECT_FALSE(v.contains("z"));
}

TEST(Vocabulary, SpecialsOccupyLowestIds) {
  const Vocabulary v = build_vocabulary(std::vector<Tokens>{{"<unk>", "<unk>", "q", "q"}});
  EXPECT_EQ(v.id("<pad>"), Vocabulary::kPadId);
  EXPECT_EQ(v.id("<unk>"), Vocabulary::kUnkId);
  EXPECT_EQ(v.id("<s>"), Vocabulary::kBosId);
  EXPECT_EQ(v.id("</s>"), Vocabulary::kEosId);
  EXPECT_EQ(v.id("<sent>"), 7u);
  EXPECT_EQ(v.size(), 10u);
}

TEST(Vocabulary, OovMapsToUnk) {
  const Vocabulary v = build_vocabulary(std::vector<Tokens>{{"a", "a"}});
  const TokenSequence seq = encode(v, {"a", "zzz"});
  EXPECT_EQ(seq.ids, (std::vector<std::size_t>{9, Vocabulary::kUnkId}));
  EXPECT_EQ(seq.tokens.size(), seq.ids.size());
}

TEST(Vocabulary, DecodeOutOfRangeThrows) {
  const Vocabulary v;
  const std::vector<long long> neg = {-1};
  EXPECT_THROW(decode(v, std::span<const long long>(neg)), smarttodo::TextError);
  const std::vector<std::size_t> big = {v.size()};
  EXPECT_THROW(decode(v, std::span<const std::size_t>(big)), smarttodo::TextError);
}

TEST(Vocabulary, RoundTripsFuzz) {
  std::mt19937_64 rng(3);
  std::vector<Tokens> corpus;
  for (int i = 0; i < 200; ++i) corpus.push_back(tokenize(random_string(rng)));
  const Vocabulary v = build_vocabulary(corpus, 1);
  std::set<std::string> distinct;
  for (const auto& seq : corpus) distinct.insert(seq.begin(), seq.end());
  for (const auto& t : distinct) ASSERT_TRUE(v.contains(t)) << t;
  for (const auto& seq : corpus) {
    ASSERT_EQ(decode(v, std::span<const std::size_t>(encode(v, seq).ids)), seq);
  }
  std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::size_t> ids(8);
    for (auto& id : ids) id = pick(rng);
    ASSERT_EQ(encode(v, decode(v, std::span<const std::size_t>(ids))).ids, ids);
  }
}

TEST(Vocabulary, PersistenceRoundTrip) {
  const Vocabulary v = build_vocabulary(std::vector<Tokens>{{"b", "a", "b", "a", "c", "c", "c"}});
  const auto path = std::filesystem::temp_directory_path() / "smarttodo_vocab_test.txt";
  v.save(path.string());
  const Vocabulary back = Vocabulary::load(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(back, v);
  EXPECT_EQ(back.token(9), "c");
}
