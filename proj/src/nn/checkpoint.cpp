#include "pathloss/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "pathloss/binary_io.hpp"

namespace pathloss::nn {

namespace {
constexpr char kCheckpointMagic[9] = "PLCKPT01";
}

nlohmann::json Checkpoint::manifest() const {
  nlohmann::json directory = nlohmann::json::array();
  for (const auto& p : parameters) directory.push_back({{"name", p.name}, {"shape", p.shape}});
  return {{"topology", to_json(topology)},
          {"output_offset", output_offset},
          {"output_scale", output_scale},
          {"metadata", metadata},
          {"parameters", directory}};
}

Checkpoint snapshot(const Sequential<float>& model, nlohmann::json metadata) {
  Checkpoint c;
  c.topology = model.topology();
  c.output_offset = model.output_offset;
  c.output_scale = model.output_scale;
  c.metadata = std::move(metadata);
  for (const auto* p : model.parameters()) {
    c.parameters.push_back({p->name, p->value.shape(), p->value.storage()});
  }
  return c;
}

void load_parameters(Sequential<float>& model, const Checkpoint& checkpoint) {
  if (!(model.topology() == checkpoint.topology)) {
    throw ContractError("checkpoint topology does not match the model");
  }
  auto params = model.parameters();
  if (params.size() != checkpoint.parameters.size()) {
    throw ContractError("checkpoint parameter count does not match the model");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& src = checkpoint.parameters[k];
    if (src.name != params[k]->name || src.shape != params[k]->value.shape()) {
      throw ContractError("checkpoint parameter " + src.name + " does not match " +
                          params[k]->name);
    }
    params[k]->value.storage() = src.values;
  }
  model.output_offset = checkpoint.output_offset;
  model.output_scale = checkpoint.output_scale;
}

Sequential<float> restore(const Checkpoint& checkpoint) {
  Sequential<float> model(checkpoint.topology);
  load_parameters(model, checkpoint);
  return model;
}

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  using namespace binary;
  put_magic(out, kCheckpointMagic);
  put_string(out, c.manifest().dump());
  for (const auto& p : c.parameters) put_span<float>(out, p.values);
}

Checkpoint read_checkpoint(std::istream& in) {
  using namespace binary;
  expect_magic(in, kCheckpointMagic);
  Checkpoint c;
  try {
    const auto m = nlohmann::json::parse(get_string(in));
    c.topology = topology_from_json(m.at("topology"));
    c.output_offset = m.at("output_offset").get<double>();
    c.output_scale = m.at("output_scale").get<double>();
    c.metadata = m.at("metadata");
    for (const auto& entry : m.at("parameters")) {
      NamedArray a;
      a.name = entry.at("name").get<std::string>();
      a.shape = entry.at("shape").get<Shape>();
      c.parameters.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint manifest: ") + e.what());
  }
  for (auto& a : c.parameters) {
    a.values.resize(element_count(a.shape));
    get_span<float>(in, a.values);
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  write_checkpoint(out, checkpoint);
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

bool bit_identical(const Checkpoint& a, const Checkpoint& b) {
  if (!(a.topology == b.topology) || a.metadata != b.metadata ||
      std::bit_cast<std::uint64_t>(a.output_offset) != std::bit_cast<std::uint64_t>(b.output_offset) ||
      std::bit_cast<std::uint64_t>(a.output_scale) != std::bit_cast<std::uint64_t>(b.output_scale) ||
      a.parameters.size() != b.parameters.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.parameters.size(); ++k) {
    const auto& pa = a.parameters[k];
    const auto& pb = b.parameters[k];
    if (pa.name != pb.name || pa.shape != pb.shape || pa.values.size() != pb.values.size()) return false;
    if (std::memcmp(pa.values.data(), pb.values.data(), pa.values.size() * sizeof(float)) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace pathloss::nn
