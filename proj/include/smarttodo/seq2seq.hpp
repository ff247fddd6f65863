#pragma once

#include "smarttodo/seq2seq/decode.hpp"
#include "smarttodo/seq2seq/input.hpp"
#include "smarttodo/seq2seq/model.hpp"
#include "smarttodo/seq2seq/train.hpp"
