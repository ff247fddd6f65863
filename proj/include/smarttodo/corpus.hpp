#pragma once

#include "smarttodo/corpus/io.hpp"
#include "smarttodo/corpus/split.hpp"
#include "smarttodo/corpus/synth.hpp"
#include "smarttodo/corpus/types.hpp"
