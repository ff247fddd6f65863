#pragma once

#include "smarttodo/selection/context.hpp"
#include "smarttodo/selection/providers.hpp"
#include "smarttodo/selection/select.hpp"
#include "smarttodo/selection/word_vectors.hpp"
