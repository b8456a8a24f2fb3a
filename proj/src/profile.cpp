#include "pathloss/profile.hpp"

#include <cmath>
#include <fstream>

#include "pathloss/binary_io.hpp"
#include "pathloss/errors.hpp"

namespace pathloss {

double LinkGeometry::distance() const { return std::hypot(rx.east - tx.east, rx.north - tx.north); }

std::size_t LinkGeometry::rows() const {
  const double d = distance();
  return d >= 1.0 ? static_cast<std::size_t>(std::floor(d)) : 0;
}

double LinkGeometry::row_spacing() const {
  const std::size_t n = rows();
  return n >= 2 ? distance() / static_cast<double>(n - 1) : 0.0;
}

void LinkGeometry::validate() const {
  if (width < 1 || width % 2 == 0) {
    throw InvalidWidthError("profile width must be odd and >= 1, got " + std::to_string(width));
  }
  if (!(tx_antenna_height >= 0.0) || !(rx_antenna_height >= 0.0) ||
      !std::isfinite(tx_antenna_height) || !std::isfinite(rx_antenna_height)) {
    throw DomainError("antenna heights must be finite and non-negative");
  }
  const double d = distance();
  if (!std::isfinite(d) || d < 1.0) {
    throw DegenerateLinkError("link " + std::to_string(link_id) + " is shorter than 1 m");
  }
}

double PathProfile::along_distance(std::size_t i) const {
  return static_cast<double>(i) * geometry.row_spacing();
}

std::vector<Point> generate_sampling_grid(const LinkGeometry& g) {
  g.validate();
  const std::size_t n = g.rows();
  const auto w = static_cast<std::size_t>(g.width);
  const double d = g.distance();
  const double de = g.rx.east - g.tx.east;
  const double dn = g.rx.north - g.tx.north;
  // Unit vector 90 degrees counter-clockwise from the bearing, i.e. to its left.
  const double left_e = -dn / d;
  const double left_n = de / d;
  const double center = static_cast<double>(w - 1) / 2.0;

  std::vector<Point> grid;
  grid.reserve(n * w);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    const double be = g.tx.east + t * de;
    const double bn = g.tx.north + t * dn;
    for (std::size_t j = 0; j < w; ++j) {
      const double offset = center - static_cast<double>(j);
      grid.push_back({be + offset * left_e, bn + offset * left_n});
    }
  }
  return grid;
}

PathProfile extract_profile(const RasterIndex& index, const LinkGeometry& geometry) {
  const auto grid = generate_sampling_grid(geometry);
  PathProfile profile;
  profile.geometry = geometry;
  profile.rows = geometry.rows();
  profile.width = static_cast<std::size_t>(geometry.width);
  profile.heights.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    try {
      profile.heights[k] = index.sample_nearest(grid[k]);
    } catch (const OutOfCoverageError& e) {
      throw ExtractionError(geometry.link_id, e.what());
    } catch (const NodataError& e) {
      throw ExtractionError(geometry.link_id, e.what());
    }
  }
  return profile;
}

double curvature_drop(double along_m, double earth_radius) {
  return along_m * along_m / (2.0 * earth_radius);
}

PathProfile earth_curvature_correct(PathProfile profile, double earth_radius) {
  if (profile.curvature_applied) throw StateError("earth curvature correction already applied");
  if (!(earth_radius > 0.0)) throw DomainError("earth radius must be positive");
  for (std::size_t i = 0; i < profile.rows; ++i) {
    const double drop = curvature_drop(profile.along_distance(i), earth_radius);
    float* row = profile.heights.data() + i * profile.width;
    for (std::size_t j = 0; j < profile.width; ++j) {
      row[j] = static_cast<float>(static_cast<double>(row[j]) - drop);
    }
  }
  profile.curvature_applied = true;
  profile.earth_radius = earth_radius;
  return profile;
}

PathProfile crop_direct_path(const PathProfile& profile) {
  if (profile.width % 2 == 0) throw InvalidWidthError("profile width must be odd");
  PathProfile out;
  out.geometry = profile.geometry;
  out.geometry.width = 1;
  out.rows = profile.rows;
  out.width = 1;
  out.curvature_applied = profile.curvature_applied;
  out.earth_radius = profile.earth_radius;
  out.heights.resize(profile.rows);
  const std::size_t c = profile.center_column();
  for (std::size_t i = 0; i < profile.rows; ++i) out.heights[i] = profile.at(i, c);
  return out;
}

namespace {
constexpr char kProfileMagic[9] = "PLPROF01";
constexpr std::uint8_t kColumnZeroLeft = 0;
}  // namespace

void write_profiles(std::ostream& out, const std::vector<PathProfile>& profiles) {
  using namespace binary;
  put_magic(out, kProfileMagic);
  put<std::uint64_t>(out, profiles.size());
  for (const auto& p : profiles) {
    put<std::uint64_t>(out, p.geometry.link_id);
    put<double>(out, p.geometry.distance());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.rows));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.width));
    put<double>(out, p.earth_radius);
    put<std::uint8_t>(out, kColumnZeroLeft);
    put<std::uint8_t>(out, p.curvature_applied ? 1 : 0);
    put<double>(out, p.geometry.tx.east);
    put<double>(out, p.geometry.tx.north);
    put<double>(out, p.geometry.rx.east);
    put<double>(out, p.geometry.rx.north);
    put<double>(out, p.geometry.tx_antenna_height);
    put<double>(out, p.geometry.rx_antenna_height);
    put_span<float>(out, p.heights);
  }
}

std::vector<PathProfile> read_profiles(std::istream& in) {
  using namespace binary;
  expect_magic(in, kProfileMagic);
  const auto count = get<std::uint64_t>(in);
  std::vector<PathProfile> profiles;
  for (std::uint64_t k = 0; k < count; ++k) {
    PathProfile p;
    p.geometry.link_id = get<std::uint64_t>(in);
    get<double>(in);  // d, recomputed from the endpoints
    p.rows = get<std::uint32_t>(in);
    p.width = get<std::uint32_t>(in);
    p.earth_radius = get<double>(in);
    if (get<std::uint8_t>(in) != kColumnZeroLeft) throw FormatError("unsupported orientation flag");
    p.curvature_applied = get<std::uint8_t>(in) != 0;
    p.geometry.tx = {get<double>(in), get<double>(in)};
    p.geometry.rx = {get<double>(in), get<double>(in)};
    p.geometry.tx_antenna_height = get<double>(in);
    p.geometry.rx_antenna_height = get<double>(in);
    p.geometry.width = static_cast<int>(p.width);
    if (p.rows * p.width > (1ull << 31)) throw FormatError("profile too large");
    p.heights.resize(p.rows * p.width);
    get_span<float>(in, p.heights);
    profiles.push_back(std::move(p));
  }
  return profiles;
}

void save_profiles(const std::filesystem::path& path, const std::vector<PathProfile>& profiles) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_profiles(out, profiles);
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<PathProfile> load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_profiles(in);
}

}  // namespace pathloss
