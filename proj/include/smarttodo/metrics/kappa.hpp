#pragma once

#include <map>
#include <vector>

#include "smarttodo/error.hpp"

namespace smarttodo::metrics {

/// Cohen's kappa (p_o - p_e) / (1 - p_e) with p_e from the two raters'
/// marginals. Defined as 1.0 when p_e = 1.
template <class Label>
double cohen_kappa(const std::vector<Label>& a, const std::vector<Label>& b) {
  if (a.size() != b.size()) throw MetricsError("cohen_kappa: label lists differ in length");
  if (a.empty()) throw MetricsError("cohen_kappa: no labels");
  const double n = static_cast<double>(a.size());
  std::map<Label, double> ma, mb;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma[a[i]] += 1.0;
    mb[b[i]] += 1.0;
    if (a[i] == b[i]) agree += 1.0;
  }
  double pe = 0.0;
  for (const auto& [label, count] : ma) {
    auto it = mb.find(label);
    if (it != mb.end()) pe += (count / n) * (it->second / n);
  }
  const double po = agree / n;
  if (pe >= 1.0) return 1.0;
  return (po - pe) / (1.0 - pe);
}

}  // namespace smarttodo::metrics
