#pragma once

#include "smarttodo/text/lemmatizer.hpp"
#include "smarttodo/text/sentence_splitter.hpp"
#include "smarttodo/text/tokenizer.hpp"
#include "smarttodo/text/vocabulary.hpp"
