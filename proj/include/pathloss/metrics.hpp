#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pathloss {

/// Signed errors (predicted - measured, dB) of one model on one holdout set.
struct EvalReport {
  std::string model;
  std::string city;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> link_ids;
  std::vector<double> errors;
  double rmse = 0.0;
  double mean_error = 0.0;
  /// Sample standard deviation (n - 1), so rmse^2 = mean^2 + sd^2 (n - 1) / n.
  double sd_error = 0.0;
  std::size_t count = 0;
};

/// Throws ContractError on length mismatch and EmptyInputError on empty input.
EvalReport compute_metrics(std::span<const double> predictions, std::span<const double> labels);

/// Mean and sample standard deviation; sd is 0 for a single value.
struct SummaryStat {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t count = 0;
};
SummaryStat summarize(std::span<const double> values);

/// 1 dB bins centred on the integers -40..40 (bin k covers [k - 0.5, k + 0.5))
/// plus underflow and overflow counts.
struct Histogram {
  static constexpr int kLow = -40;
  static constexpr int kHigh = 40;
  std::vector<std::size_t> counts = std::vector<std::size_t>(kHigh - kLow + 1, 0);
  std::size_t underflow = 0;
  std::size_t overflow = 0;

  void add(double error);
  std::size_t total() const;
  static double bin_low(std::size_t k) { return kLow + static_cast<double>(k) - 0.5; }
  static double bin_high(std::size_t k) { return kLow + static_cast<double>(k) + 0.5; }
};

Histogram error_histogram(std::span<const double> errors);

}  // namespace pathloss
