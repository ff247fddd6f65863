#pragma once

#include "smarttodo/harness/config.hpp"
#include "smarttodo/harness/pipeline.hpp"
#include "smarttodo/harness/report.hpp"
