#include "pathloss/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pathloss/rng.hpp"

namespace pathloss::nn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (epochs == 0) throw ConfigError("epoch count must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
  if (micro_batch == 0) throw ConfigError("micro batch must be positive");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
          {"epochs", c.epochs},               {"dropout_rate", c.dropout_rate},
          {"seed", c.seed},                   {"micro_batch", c.micro_batch}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  try {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
    c.seed = j.value("seed", c.seed);
    c.micro_batch = j.value("micro_batch", c.micro_batch);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("training config: ") + e.what());
  }
  c.validate();
  return c;
}

Tensor<float> Dataset::gather(std::span<const std::size_t> indices) const {
  Shape shape = sample_shape;
  shape.insert(shape.begin(), indices.size());
  Tensor<float> batch(shape);
  const std::size_t n = sample_size();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= size()) throw ContractError("dataset index out of range");
    std::copy_n(inputs.data() + indices[k] * n, n, batch.data() + k * n);
  }
  return batch;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.sample_shape = sample_shape;
  const std::size_t n = sample_size();
  out.inputs.reserve(indices.size() * n);
  for (std::size_t i : indices) {
    if (i >= size()) throw ContractError("dataset index out of range");
    out.inputs.insert(out.inputs.end(), inputs.begin() + static_cast<std::ptrdiff_t>(i * n),
                      inputs.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
    out.labels.push_back(labels[i]);
    out.ids.push_back(ids.empty() ? i : ids[i]);
  }
  return out;
}

std::size_t select_best_epoch(std::span<const double> validation_rmse) {
  if (validation_rmse.empty()) throw EmptyInputError("no epochs to select from");
  std::size_t best = 0;
  for (std::size_t e = 1; e < validation_rmse.size(); ++e) {
    if (validation_rmse[e] < validation_rmse[best]) best = e;
  }
  return best + 1;
}

void calibrate_output(Sequential<float>& model, std::span<const double> labels) {
  if (labels.empty()) throw EmptyInputError("cannot calibrate on an empty label set");
  double mean = 0.0;
  for (double y : labels) mean += y;
  mean /= static_cast<double>(labels.size());
  double var = 0.0;
  for (double y : labels) var += (y - mean) * (y - mean);
  var /= static_cast<double>(labels.size());
  const double sd = std::sqrt(var);
  model.output_offset = mean;
  model.output_scale = sd > 1e-6 ? sd : 1.0;
}

std::vector<double> predict_dataset(Sequential<float>& model, const Dataset& data,
                                    std::size_t micro_batch) {
  std::vector<double> out;
  out.reserve(data.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += micro_batch) {
    const std::size_t n = std::min(micro_batch, data.size() - start);
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), start);
    const auto pred = model.predict(data.gather(idx));
    out.insert(out.end(), pred.begin(), pred.end());
  }
  return out;
}

double rmse(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size()) throw ContractError("prediction/label length mismatch");
  if (labels.empty()) throw EmptyInputError("rmse of an empty set");
  double sse = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double r = predictions[i] - labels[i];
    sse += r * r;
  }
  return std::sqrt(sse / static_cast<double>(labels.size()));
}

double gradient_step(Sequential<float>& model, Adam<float>& adam, const Dataset& data,
                     std::span<const std::size_t> batch, std::size_t micro_batch) {
  model.zero_grad();
  const auto total = static_cast<double>(batch.size());
  double sse = 0.0;
  for (std::size_t start = 0; start < batch.size(); start += micro_batch) {
    const auto chunk = batch.subspan(start, std::min(micro_batch, batch.size() - start));
    const Tensor<float> out = model.forward(data.gather(chunk), Mode::kTrain);
    Tensor<float> grad(out.shape());
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const double pred = model.output_offset + model.output_scale * static_cast<double>(out[i]);
      const double r = pred - data.labels[chunk[i]];
      sse += r * r;
      grad[i] = static_cast<float>(2.0 * model.output_scale * r / total);
    }
    model.backward(grad);
  }
  for (const auto* p : model.parameters()) {
    if (!all_finite<float>(p->grad.values())) {
      throw NumericError("non-finite gradient in " + p->name);
    }
  }
  adam.step();
  return sse / total;
}

namespace {

nlohmann::json checkpoint_metadata(const TrainConfig& config, std::size_t epoch, double val_rmse) {
  return {{"train_config", to_json(config)},
          {"seed", config.seed},
          {"epoch", epoch},
          {"validation_rmse", val_rmse}};
}

}  // namespace

TrainResult train_model(Sequential<float>& model, const Dataset& train, const Dataset& validation,
                        const TrainConfig& config,
                        const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  if (train.size() == 0 || validation.size() == 0) {
    throw EmptyInputError("training and validation sets must be non-empty");
  }
  if (config.batch_size > train.size()) {
    throw ContractError("batch size " + std::to_string(config.batch_size) +
                        " exceeds training set size " + std::to_string(train.size()));
  }
  calibrate_output(model, train.labels);
  model.set_dropout_seed(derive_seed(config.seed, "dropout"));
  Rng shuffler(derive_seed(config.seed, "shuffle"));
  Adam<float> adam(model.parameters(), {.learning_rate = config.learning_rate});

  TrainResult result;
  result.best = snapshot(model, checkpoint_metadata(config, 0, std::nan("")));
  double best_val = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffler.shuffle(order.begin(), order.end());
    EpochRecord rec;
    rec.epoch = epoch;
    try {
      double sse = 0.0;
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t n = std::min(config.batch_size, order.size() - start);
        const std::span<const std::size_t> batch(order.data() + start, n);
        sse += gradient_step(model, adam, train, batch, config.micro_batch) * static_cast<double>(n);
      }
      rec.train_rmse = std::sqrt(sse / static_cast<double>(order.size()));
      if (!std::isfinite(rec.train_rmse)) throw NumericError("training loss is not finite");
      rec.validation_rmse =
          rmse(predict_dataset(model, validation, config.micro_batch), validation.labels);
      if (!std::isfinite(rec.validation_rmse)) throw NumericError("validation RMSE is not finite");
    } catch (const NumericError& e) {
      result.aborted = true;
      result.diagnostic = "epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.validation_rmse < best_val) {
      best_val = rec.validation_rmse;
      result.best_epoch = epoch;
      result.best_validation_rmse = rec.validation_rmse;
      result.best = snapshot(model, checkpoint_metadata(config, epoch, rec.validation_rmse));
    }
  }
  load_parameters(model, result.best);
  return result;
}

OverfitResult fit_until(Sequential<float>& model, const Dataset& data, const TrainConfig& config,
                        std::size_t max_steps, double target_rmse, std::size_t check_every) {
  config.validate();
  if (data.size() == 0) throw EmptyInputError("cannot fit an empty dataset");
  calibrate_output(model, data.labels);
  model.set_dropout_seed(derive_seed(config.seed, "dropout"));
  Rng shuffler(derive_seed(config.seed, "shuffle"));
  Adam<float> adam(model.parameters(), {.learning_rate = config.learning_rate});
  const std::size_t batch_size = std::min(config.batch_size, data.size());

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  OverfitResult result;
  while (result.steps < max_steps) {
    if (cursor + batch_size > order.size()) {
      shuffler.shuffle(order.begin(), order.end());
      cursor = 0;
    }
    gradient_step(model, adam, data, std::span<const std::size_t>(order.data() + cursor, batch_size),
                  config.micro_batch);
    cursor += batch_size;
    ++result.steps;
    if (result.steps % check_every == 0 || result.steps == max_steps) {
      result.train_rmse = rmse(predict_dataset(model, data, config.micro_batch), data.labels);
      if (result.train_rmse < target_rmse) {
        result.reached = true;
        break;
      }
    }
  }
  return result;
}

}  // namespace pathloss::nn
