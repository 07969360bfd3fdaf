#pragma once

// Per-topic Jensen-Shannon divergence between consecutive slices and the
// outlier rule that turns divergences into emerging-topic flags.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "topicstream/matrix.hpp"

namespace topicstream {

// sum_i P_i ln(P_i / Q_i) with 0 ln 0 = 0. Throws Error(kValidation) on a
// length mismatch or when P_i > 0 meets Q_i = 0.
double KlDivergence(std::span<const double> p, std::span<const double> q);

// Symmetric, bounded by ln 2.
double JsDivergence(std::span<const double> p, std::span<const double> q);

enum class OutlierMethod {
  kBoxplot,  // Q3 + 1.5 IQR
  kMad,      // median + 3 * 1.4826 * MAD
};

std::optional<OutlierMethod> ParseOutlierMethod(std::string_view name);
std::string_view OutlierMethodName(OutlierMethod method);

// Linear interpolation at position (n-1)q of the sorted values.
double Quantile(std::span<const double> sorted, double q);

// +infinity for fewer than four values.
double OutlierThreshold(std::span<const double> values,
                        OutlierMethod method = OutlierMethod::kBoxplot);

struct DivergenceReport {
  std::size_t slice = 0;
  std::vector<double> js;
  double threshold = 0.0;
  std::vector<int> anomalies;  // ascending, js[k] > threshold
};

DivergenceReport Detect(const RealMatrix& phi_t, const RealMatrix& phi_prev,
                        OutlierMethod method = OutlierMethod::kBoxplot,
                        std::size_t slice = 0);

}  // namespace topicstream
