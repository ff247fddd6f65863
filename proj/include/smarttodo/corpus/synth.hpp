#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "smarttodo/corpus/types.hpp"
#include "smarttodo/error.hpp"
#include "smarttodo/numeric/random.hpp"
#include "smarttodo/text/lemmatizer.hpp"
#include "smarttodo/text/sentence_splitter.hpp"
#include "smarttodo/text/tokenizer.hpp"

namespace smarttodo::corpus {

struct SynthSpec {
  std::size_t n_instances = 2000;
  /// Number of distinct filler words used by distractor sentences.
  std::size_t vocab_size = 120;
  /// Number of distinct generated entity names.
  std::size_t entity_pool = 10000;
  std::uint64_t seed = 1;
};

/// What was planted in one generated instance.
struct SynthPlan {
  std::string entity;  // lowercase surface token
  std::string verb;
  std::string adjective;
  std::string document;
  std::string time;
  std::size_t helpful_index = 0;  // into all_sentences()
};

struct SynthResult {
  std::vector<TodoInstance> instances;
  std::vector<SynthPlan> plans;
};

namespace synth_words {

inline const std::vector<std::string_view>& verbs() {
  static const std::vector<std::string_view> v = {"send",    "forward", "share",  "email",
                                                  "submit",  "deliver", "mail",   "circulate",
                                                  "present", "pass",    "upload", "return"};
  return v;
}

inline const std::vector<std::string_view>& adjectives() {
  static const std::vector<std::string_view> v = {
      "quarterly", "revised", "final",    "annual",      "monthly",   "weekly",
      "detailed",  "latest",  "signed",   "preliminary", "corrected", "internal"};
  return v;
}

inline const std::vector<std::string_view>& documents() {
  static const std::vector<std::string_view> v = {
      "report", "slides",   "deck",   "contract", "invoice",  "proposal", "budget",
      "spreadsheet", "agenda", "minutes", "forecast", "memo",   "summary",  "roadmap",
      "estimate", "itinerary", "checklist", "timeline"};
  return v;
}

inline const std::vector<std::string_view>& times() {
  static const std::vector<std::string_view> v = {
      "tomorrow",     "today",      "by friday",    "by monday", "next week",
      "this afternoon", "tonight",  "by tuesday",   "on thursday", "before noon",
      "by wednesday", "this evening"};
  return v;
}

inline const std::vector<std::string_view>& names() {
  static const std::vector<std::string_view> v = {
      "Alice", "Bob",   "Carol",  "Dave",  "Erin",  "Frank", "Grace", "Heidi",
      "Ivan",  "Judy",  "Mallory", "Oscar", "Peggy", "Rupert", "Sybil", "Trent",
      "Victor", "Walter", "Wendy", "Zoe"};
  return v;
}

/// Real filler words, cycling noun, adjective, verb.
inline const std::vector<std::string_view>& fillers() {
  static const std::vector<std::string_view> v = {
      "weather",  "sunny",    "enjoy",   "lunch",     "noisy",    "fix",     "parking",
      "quiet",    "visit",    "coffee",  "broken",    "watch",    "garden",  "busy",
      "cook",     "traffic",  "cold",    "paint",     "train",    "warm",    "clean",
      "holiday",  "crowded",  "play",    "printer",   "lovely",   "walk",    "kitchen",
      "funny",    "bake",     "music",   "strange",   "repair",   "movie",   "delicious",
      "borrow",   "soccer",   "loud",    "water",     "dinner",   "empty",   "climb",
      "concert",  "bright",   "wash",    "bicycle",   "tiny",     "plant",   "window",
      "huge",     "carry",    "elevator", "sleepy",   "order",    "picnic",  "rainy",
      "drive",    "birthday", "shiny",   "follow",    "camera",   "gentle",  "fold",
      "laptop",   "dusty",    "open",    "charger",   "purple",   "lift",    "umbrella",
      "cozy",     "sing",     "jacket",  "friendly",  "dance",    "museum",  "fresh",
      "swim",     "beach",    "heavy",   "rent",      "mountain", "spicy",   "chase",
      "river",    "sleek",    "knit",    "hotel",     "ancient",  "sketch",  "airport",
      "modern",   "stir",     "pizza",   "curious",   "juggle",   "sandwich", "fancy",
      "whistle",  "guitar",   "rusty",   "polish",    "kitten",   "fluffy",  "feed",
      "puppy",    "muddy",    "hike",    "lamp",      "chilly",   "grill",   "ferry",
      "clever",   "tease",    "basket",  "sticky",    "trim",     "carpet",  "giant",
      "scrub"};
  return v;
}

}  // namespace synth_words

namespace detail {

inline std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

/// Pseudo-word such as "zorvak": consonant-initial, never ending in 's'.
inline std::string entity_word(numeric::Rng& rng) {
  static constexpr std::string_view onset = "bdfgklmnprtvz";
  static constexpr std::string_view vowel = "aeiou";
  static constexpr std::string_view coda = "kmnrtx";
  std::string w;
  const std::size_t syllables = 2 + rng.below(2);
  for (std::size_t i = 0; i < syllables; ++i) {
    w.push_back(onset[rng.below(onset.size())]);
    w.push_back(vowel[rng.below(vowel.size())]);
    if (rng.bernoulli(0.5)) w.push_back(coda[rng.below(coda.size())]);
  }
  if (coda.find(w.back()) == std::string_view::npos) w.push_back(coda[rng.below(coda.size())]);
  return w;
}

/// Pseudo-word filler: vowel-initial, so never an entity.
inline std::string filler_word(numeric::Rng& rng) {
  static constexpr std::string_view vowel = "aeiou";
  static constexpr std::string_view cons = "bdfglmnprtv";
  std::string w;
  w.push_back(vowel[rng.below(vowel.size())]);
  for (std::size_t i = 0; i < 2; ++i) {
    w.push_back(cons[rng.below(cons.size())]);
    w.push_back(vowel[rng.below(vowel.size())]);
  }
  w.push_back(cons[rng.below(cons.size())]);
  return w;
}

inline std::unordered_set<std::string> fixed_vocabulary() {
  std::unordered_set<std::string> out;
  auto add_all = [&](const std::vector<std::string_view>& words) {
    for (auto w : words) {
      for (auto& t : text::tokenize(w)) out.insert(t);
    }
  };
  add_all(synth_words::verbs());
  add_all(synth_words::adjectives());
  add_all(synth_words::documents());
  add_all(synth_words::times());
  add_all(synth_words::names());
  add_all(synth_words::fillers());
  return out;
}

inline std::set<std::string> content_lemmas(std::string_view sentence) {
  std::set<std::string> out;
  for (const auto& t : text::tokenize(sentence)) {
    if (text::is_content_token(t)) out.insert(text::lemmatize(t));
  }
  return out;
}

inline std::size_t overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += b.count(x);
  return n;
}

template <class T>
const T& pick(numeric::Rng& rng, const std::vector<T>& items) {
  return items[rng.below(items.size())];
}

struct Fillers {
  std::vector<std::string> nouns, adjectives, verbs;
};

inline Fillers make_fillers(std::size_t vocab_size, std::uint64_t seed) {
  if (vocab_size < 3) throw CorpusError("synth vocab_size must be at least 3");
  Fillers f;
  const auto& real = synth_words::fillers();
  std::vector<std::string> words;
  for (std::size_t i = 0; i < vocab_size && i < real.size(); ++i) words.emplace_back(real[i]);
  for (std::size_t i = 0; i < words.size(); ++i) {
    (i % 3 == 0 ? f.nouns : i % 3 == 1 ? f.adjectives : f.verbs).push_back(words[i]);
  }
  numeric::Rng rng(numeric::derive_seed(seed, "synth.fillers"));
  std::unordered_set<std::string> used(words.begin(), words.end());
  while (used.size() < vocab_size) {
    std::string w = filler_word(rng);
    if (used.insert(w).second) f.nouns.push_back(w);
  }
  return f;
}

inline std::vector<std::string> make_entities(std::size_t pool, std::uint64_t seed) {
  if (pool == 0) throw CorpusError("synth entity_pool must be non-empty");
  numeric::Rng rng(numeric::derive_seed(seed, "synth.entities"));
  const auto reserved = fixed_vocabulary();
  std::unordered_set<std::string> seen;
  std::vector<std::string> out;
  out.reserve(pool);
  std::size_t attempts = 0;
  while (out.size() < pool) {
    if (++attempts > pool * 100 + 1000) throw CorpusError("synth entity_pool too large");
    std::string w = entity_word(rng);
    if (reserved.count(w) || text::is_stopword(w) || !seen.insert(w).second) continue;
    out.push_back(std::move(w));
  }
  return out;
}

inline std::string distractor(numeric::Rng& rng, const Fillers& f) {
  const auto& n = f.nouns;
  const auto& a = f.adjectives.empty() ? f.nouns : f.adjectives;
  const auto& v = f.verbs.empty() ? f.nouns : f.verbs;
  switch (rng.below(10)) {
    case 0: return "The " + pick(rng, n) + " near the " + pick(rng, n) + " is " + pick(rng, a) + " again.";
    case 1: return "Did anyone " + pick(rng, v) + " the " + pick(rng, n) + " yet?";
    case 2: return "I heard the " + pick(rng, n) + " was " + pick(rng, a) + ".";
    case 3: return "We could " + pick(rng, v) + " the " + pick(rng, n) + " after the " + pick(rng, n) + ".";
    case 4: return "My " + pick(rng, n) + " has been " + pick(rng, a) + " lately.";
    case 5: return "Someone left a " + pick(rng, a) + " " + pick(rng, n) + " by the " + pick(rng, n) + ".";
    case 6: return "The " + pick(rng, n) + " and the " + pick(rng, n) + " both look " + pick(rng, a) + ".";
    case 7: return "Let me know if the " + pick(rng, n) + " is " + pick(rng, a) + ".";
    case 8: return "Our " + pick(rng, n) + " got " + pick(rng, a) + " during the " + pick(rng, n) + "!";
    default: return "Maybe we can " + pick(rng, v) + " and " + pick(rng, v) + " at the " + pick(rng, n) + ".";
  }
}

}  // namespace detail

/// Generates threads with one planted commitment sentence H, one planted
/// helpful sentence in e_c sharing the verb, adjective and document with the
/// reference, distractors sharing no content lemma with it, and a reference
/// To-Do naming a generated entity that no fixed word list contains.
inline SynthResult synth_corpus_detailed(const SynthSpec& spec) {
  if (spec.n_instances < 1) throw CorpusError("synth n_instances must be at least 1");
  using detail::pick;
  const auto entities = detail::make_entities(spec.entity_pool, spec.seed);
  const auto fillers = detail::make_fillers(spec.vocab_size, spec.seed);
  std::vector<std::size_t> entity_order(entities.size());
  for (std::size_t i = 0; i < entity_order.size(); ++i) entity_order[i] = i;
  numeric::Rng rng(numeric::derive_seed(spec.seed, "synth.instances"));
  rng.shuffle(entity_order);

  std::vector<std::string> verbs(synth_words::verbs().begin(), synth_words::verbs().end());
  std::vector<std::string> adjs(synth_words::adjectives().begin(), synth_words::adjectives().end());
  std::vector<std::string> docs(synth_words::documents().begin(), synth_words::documents().end());
  std::vector<std::string> times(synth_words::times().begin(), synth_words::times().end());
  std::vector<std::string> names(synth_words::names().begin(), synth_words::names().end());

  SynthResult result;
  for (std::size_t i = 0; i < spec.n_instances; ++i) {
    SynthPlan plan;
    const std::string entity_cap = detail::capitalize(entities[entity_order[i % entities.size()]]);
    plan.entity = text::detail::lower_ascii(entity_cap);
    plan.verb = pick(rng, verbs);
    plan.adjective = pick(rng, adjs);
    plan.document = pick(rng, docs);
    plan.time = pick(rng, times);
    const std::string sender = pick(rng, names);
    std::string recipient = pick(rng, names);
    while (recipient == sender) recipient = pick(rng, names);

    const std::string& v = plan.verb;
    const std::string& a = plan.adjective;
    const std::string& d = plan.document;
    const std::string& t = plan.time;

    std::string commitment;
    switch (rng.below(5)) {
      case 0: commitment = "I will " + v + " the " + d + " to " + entity_cap + " " + t + "."; break;
      case 1: commitment = "I'll " + v + " the " + d + " to " + entity_cap + " " + t + "."; break;
      case 2: commitment = "I shall " + v + " the " + d + " over to " + entity_cap + " " + t + "."; break;
      case 3: commitment = "I will make sure to " + v + " the " + d + " to " + entity_cap + " " + t + "."; break;
      default: commitment = "I'll " + v + " it to " + entity_cap + " " + t + "."; break;
    }
    std::string helpful;
    switch (rng.below(4)) {
      case 0: helpful = "You asked me to " + v + " the " + a + " " + d + "."; break;
      case 1: helpful = "Thanks for the reminder to " + v + " the " + a + " " + d + "."; break;
      case 2: helpful = "Sorry for the delay on the " + a + " " + d + " you wanted me to " + v + "."; break;
      default: helpful = pick(rng, names) + " reminded me that we need to " + v + " the " + a + " " + d + "."; break;
    }
    std::string subject;
    switch (rng.below(4)) {
      case 0: subject = detail::capitalize(a) + " " + d; break;
      case 1: subject = "Re: " + a + " " + d; break;
      case 2: subject = "Question about the " + a + " " + d; break;
      default: subject = detail::capitalize(a) + " " + d + " status"; break;
    }

    const std::string reference = detail::capitalize(v) + " " + a + " " + d + " to " + entity_cap + " " + t + ".";
    std::vector<std::string> annotations = {reference};
    if (rng.bernoulli(0.5)) {
      std::string longer = detail::capitalize(v) + " the " + a + " " + d + " to " + entity_cap + " " + t + ".";
      if (rng.bernoulli(0.5)) {
        annotations.insert(annotations.begin(), std::move(longer));
      } else {
        annotations.push_back(std::move(longer));
      }
    }

    const auto reference_lemmas = detail::content_lemmas(reference);
    auto make_distractor = [&] {
      for (;;) {
        std::string s = detail::distractor(rng, fillers);
        if (detail::overlap(detail::content_lemmas(s), reference_lemmas) == 0) return s;
      }
    };

    // e_c body: greeting, shuffled {H, helpful, distractors}, sign-off.
    std::vector<std::string> middle = {commitment, helpful};
    const std::size_t n_distract = 1 + rng.below(3);
    for (std::size_t k = 0; k < n_distract; ++k) middle.push_back(make_distractor());
    rng.shuffle(middle);
    const std::string greeting = "Hi " + recipient + ",";
    const std::string signoff = "Thanks,\n" + sender;
    std::string body = greeting + "\n\n";
    for (std::size_t k = 0; k < middle.size(); ++k) body += (k ? " " : "") + middle[k];
    body += "\n\n" + signoff;

    TodoInstance inst;
    char id_buf[32];
    std::snprintf(id_buf, sizeof id_buf, "synth-%06zu", i + 1);
    inst.id = id_buf;
    auto& cand = inst.thread.candidate;
    cand.id = inst.id + "/c";
    cand.from = sender;
    cand.to = {recipient};
    if (rng.bernoulli(0.3)) {
      std::string cc = pick(rng, names);
      if (cc != recipient && cc != sender) cand.to.push_back(cc);
    }
    cand.subject = subject;
    cand.body = body;
    cand.sent_time = 1500000000 + static_cast<std::int64_t>(i) * 7200 +
                     static_cast<std::int64_t>(rng.below(3600));

    if (rng.bernoulli(0.5)) {
      EmailMessage prev;
      prev.id = inst.id + "/p";
      prev.from = recipient;
      prev.to = {sender};
      prev.subject = subject.rfind("Re: ", 0) == 0 ? subject.substr(4) : subject;
      prev.sent_time = cand.sent_time - 600 - static_cast<std::int64_t>(rng.below(86400));
      std::string pbody = "Hi " + sender + ",\n\n";
      const std::size_t n_prev = 1 + rng.below(3);
      for (std::size_t k = 0; k < n_prev; ++k) pbody += (k ? " " : "") + make_distractor();
      pbody += "\n\nBest,\n" + recipient;
      prev.body = pbody;
      cand.reply_to_id = prev.id;
      inst.thread.previous = std::move(prev);
    }

    const auto sentences = inst.candidate_sentences();
    if (sentences.size() != middle.size() + 2) {
      throw CorpusError("synth: sentence split mismatch for " + inst.id);
    }
    std::size_t helpful_at = sentences.size();
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      if (sentences[k] == commitment) inst.commitment_sentence_index = k;
      if (sentences[k] == helpful) helpful_at = k;
    }
    std::vector<bool> labels(sentences.size() + inst.previous_sentences().size(), false);
    labels[helpful_at] = true;
    inst.helpful_labels = std::move(labels);
    inst.annotations = std::move(annotations);
    plan.helpful_index = helpful_at;

    result.instances.push_back(std::move(inst));
    result.plans.push_back(std::move(plan));
  }
  return result;
}

inline std::vector<TodoInstance> synth_corpus(const SynthSpec& spec) {
  return synth_corpus_detailed(spec).instances;
}

}  // namespace smarttodo::corpus
