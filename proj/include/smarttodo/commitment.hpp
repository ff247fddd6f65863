#pragma once

#include "smarttodo/commitment/classifier.hpp"
