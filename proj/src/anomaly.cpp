#include "topicstream/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "topicstream/error.hpp"

namespace topicstream {

double KlDivergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ValidationError("kl_divergence: dimension mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) {
      throw ValidationError("kl_divergence: P has mass where Q has none");
    }
    total += p[i] * std::log(p[i] / q[i]);
  }
  return total;
}

double JsDivergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ValidationError("js_divergence: dimension mismatch");
  }
  // Mixture of the two inputs; every support point of p or q is covered.
  std::vector<double> mixture(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) mixture[i] = 0.5 * (p[i] + q[i]);
  const double js = 0.5 * KlDivergence(p, mixture) + 0.5 * KlDivergence(q, mixture);
  return std::clamp(js, 0.0, std::numbers::ln2);
}

std::optional<OutlierMethod> ParseOutlierMethod(std::string_view name) {
  if (name == "boxplot") return OutlierMethod::kBoxplot;
  if (name == "mad") return OutlierMethod::kMad;
  return std::nullopt;
}

std::string_view OutlierMethodName(OutlierMethod method) {
  return method == OutlierMethod::kMad ? "mad" : "boxplot";
}

double Quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
}

double OutlierThreshold(std::span<const double> values, OutlierMethod method) {
  if (values.size() < 4) return std::numeric_limits<double>::infinity();
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (method == OutlierMethod::kBoxplot) {
    const double q1 = Quantile(sorted, 0.25);
    const double q3 = Quantile(sorted, 0.75);
    return q3 + 1.5 * (q3 - q1);
  }
  const double median = Quantile(sorted, 0.5);
  std::vector<double> dev(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    dev[i] = std::abs(sorted[i] - median);
  }
  std::sort(dev.begin(), dev.end());
  return median + 3.0 * 1.4826 * Quantile(dev, 0.5);
}

DivergenceReport Detect(const RealMatrix& phi_t, const RealMatrix& phi_prev,
                        OutlierMethod method, std::size_t slice) {
  if (phi_t.rows() != phi_prev.rows() || phi_t.cols() != phi_prev.cols()) {
    throw ValidationError("detect: topic-word matrices differ in shape");
  }
  DivergenceReport report;
  report.slice = slice;
  report.js.resize(phi_t.rows());
  for (std::size_t k = 0; k < phi_t.rows(); ++k) {
    report.js[k] = JsDivergence(phi_t.row(k), phi_prev.row(k));
  }
  report.threshold = OutlierThreshold(report.js, method);
  for (std::size_t k = 0; k < report.js.size(); ++k) {
    if (report.js[k] > report.threshold) {
      report.anomalies.push_back(static_cast<int>(k));
    }
  }
  return report;
}

}  // namespace topicstream
