#include "pathloss/metrics.hpp"

#include <cmath>
#include <numeric>

#include "pathloss/errors.hpp"

namespace pathloss {

EvalReport compute_metrics(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size()) {
    throw ContractError("prediction and label counts differ");
  }
  if (labels.empty()) throw EmptyInputError("no samples to evaluate");
  EvalReport r;
  r.count = labels.size();
  r.errors.resize(r.count);
  double sse = 0.0;
  for (std::size_t i = 0; i < r.count; ++i) {
    r.errors[i] = predictions[i] - labels[i];
    if (!std::isfinite(r.errors[i])) throw NumericError("non-finite prediction error");
    sse += r.errors[i] * r.errors[i];
  }
  const auto n = static_cast<double>(r.count);
  r.rmse = std::sqrt(sse / n);
  const SummaryStat s = summarize(r.errors);
  r.mean_error = s.mean;
  r.sd_error = s.sd;
  return r;
}

SummaryStat summarize(std::span<const double> values) {
  if (values.empty()) throw EmptyInputError("no values to summarize");
  SummaryStat s;
  s.count = values.size();
  const auto n = static_cast<double>(s.count);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

void Histogram::add(double error) {
  if (std::isnan(error)) throw NumericError("cannot bin NaN");
  const double k = std::floor(error + 0.5);
  if (k < kLow) {
    ++underflow;
  } else if (k > kHigh) {
    ++overflow;
  } else {
    ++counts[static_cast<std::size_t>(k - kLow)];
  }
}

std::size_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), underflow + overflow);
}

Histogram error_histogram(std::span<const double> errors) {
  Histogram h;
  for (double e : errors) h.add(e);
  return h;
}

}  // namespace pathloss
