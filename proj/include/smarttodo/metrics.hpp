#pragma once

#include "smarttodo/metrics/bleu.hpp"
#include "smarttodo/metrics/kappa.hpp"
#include "smarttodo/metrics/likelihood.hpp"
#include "smarttodo/metrics/report.hpp"
#include "smarttodo/metrics/rouge.hpp"
