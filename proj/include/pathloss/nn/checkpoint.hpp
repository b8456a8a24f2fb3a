#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathloss/nn/model.hpp"

namespace pathloss::nn {

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> values;
  friend bool operator==(const NamedArray&, const NamedArray&) = default;
};

/// Trained model state. `metadata` carries the channel order, training
/// configuration, seed, selected epoch and validation RMSE.
struct Checkpoint {
  Topology topology;
  std::vector<NamedArray> parameters;
  double output_offset = 0.0;
  double output_scale = 1.0;
  nlohmann::json metadata = nlohmann::json::object();

  nlohmann::json manifest() const;
};

Checkpoint snapshot(const Sequential<float>& model,
                    nlohmann::json metadata = nlohmann::json::object());
/// Copies checkpoint parameters into a model of the same topology.
void load_parameters(Sequential<float>& model, const Checkpoint& checkpoint);
Sequential<float> restore(const Checkpoint& checkpoint);

// "PLCKPT01", JSON manifest (topology, output affine, metadata, parameter
// directory), then every parameter as little-endian float32 in directory order.
void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Exact equality of topology, affine, metadata and every parameter bit.
bool bit_identical(const Checkpoint& a, const Checkpoint& b);

}  // namespace pathloss::nn
