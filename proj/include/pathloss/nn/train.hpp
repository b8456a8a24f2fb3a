#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathloss/nn/adam.hpp"
#include "pathloss/nn/checkpoint.hpp"
#include "pathloss/nn/model.hpp"

namespace pathloss::nn {

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 256;
  std::size_t epochs = 200;
  double dropout_rate = 0.25;
  std::uint64_t seed = 0;
  /// Samples per forward/backward chunk inside a batch; bounds activation
  /// memory without changing the result of a step.
  std::size_t micro_batch = 32;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig defaults = {});

/// Inputs flattened per sample plus regression targets.
struct Dataset {
  Shape sample_shape;
  std::vector<float> inputs;
  std::vector<double> labels;
  std::vector<std::uint64_t> ids;

  std::size_t size() const { return labels.size(); }
  std::size_t sample_size() const { return element_count(sample_shape); }
  /// Batch tensor (count, sample_shape...) of the given sample indices.
  Tensor<float> gather(std::span<const std::size_t> indices) const;
  Dataset subset(std::span<const std::size_t> indices) const;
};

struct EpochRecord {
  std::size_t epoch = 0;  ///< 1-based
  double train_rmse = 0.0;
  double validation_rmse = 0.0;
};

struct TrainResult {
  Checkpoint best;
  std::size_t best_epoch = 0;  ///< 0 when no epoch completed
  double best_validation_rmse = 0.0;
  std::vector<EpochRecord> history;
  bool aborted = false;
  std::string diagnostic;
};

/// 1-based index of the first minimum. Throws EmptyInputError.
std::size_t select_best_epoch(std::span<const double> validation_rmse);

/// Sets the output affine to the label mean and standard deviation.
void calibrate_output(Sequential<float>& model, std::span<const double> labels);

std::vector<double> predict_dataset(Sequential<float>& model, const Dataset& data,
                                    std::size_t micro_batch = 64);
double rmse(std::span<const double> predictions, std::span<const double> labels);

/// One Adam step on the mean squared error of `batch`. Returns the batch MSE
/// measured in training mode.
double gradient_step(Sequential<float>& model, Adam<float>& adam, const Dataset& data,
                     std::span<const std::size_t> batch, std::size_t micro_batch);

/// Epoch loop with per-epoch shuffling and validation; keeps the parameters of
/// the epoch with the lowest validation RMSE (earliest on ties) and leaves them
/// loaded in `model`. Numeric divergence stops training and returns the last
/// good checkpoint with a diagnostic.
TrainResult train_model(Sequential<float>& model, const Dataset& train, const Dataset& validation,
                        const TrainConfig& config,
                        const std::function<void(const EpochRecord&)>& on_epoch = {});

struct OverfitResult {
  std::size_t steps = 0;
  double train_rmse = 0.0;
  bool reached = false;
};

/// Steps through shuffled batches until the evaluation-mode training RMSE
/// drops below `target_rmse` (checked every `check_every` steps) or
/// `max_steps` is reached.
OverfitResult fit_until(Sequential<float>& model, const Dataset& data, const TrainConfig& config,
                        std::size_t max_steps, double target_rmse, std::size_t check_every);

}  // namespace pathloss::nn
