#include <iostream>

#include "smarttodo/corpus.hpp"
#include "smarttodo/selection.hpp"
#include "smarttodo/seq2seq.hpp"

using namespace smarttodo;

/// Trains a small copy model on synthetic threads and decodes one held-out
/// instance.
int main() {
  const auto data = corpus::synth_corpus({.n_instances = 300, .seed = 4});
  const auto split = corpus::split_dataset(data, {}, 4);
  const selection::TfBinary tf;

  const auto examples = [&](const std::vector<corpus::TodoInstance>& insts) {
    std::vector<seq2seq::Example> out;
    for (const auto& inst : insts) {
      std::vector<std::string> context;
      for (auto& s : selection::select_top_k(selection::selection_input(inst), tf, 2)) context.push_back(s.text);
      out.push_back(seq2seq::make_example(inst, context));
    }
    return out;
  };
  const auto train = examples(split.train), validation = examples(split.validation), test = examples(split.test);

  seq2seq::ModelConfig model;
  model.embed_dim = 16;
  model.hidden = 32;
  model.attention_dim = 32;
  seq2seq::TrainConfig cfg;
  cfg.batch_size = 16;
  cfg.max_epochs = 5;
  const auto r = seq2seq::train_seq2seq(train, validation, model, cfg, [](const seq2seq::EpochLog& e) {
    std::cout << "epoch " << e.epoch << " validation accuracy " << e.validation_accuracy << "\n";
  });

  const auto& ex = test.front();
  std::cout << "input:     " << ex.input.str() << "\n"
            << "reference: " << text::join(ex.target, " ") << "\n"
            << "generated: " << seq2seq::beam_search(r.model, ex.input).str() << "\n";
}
