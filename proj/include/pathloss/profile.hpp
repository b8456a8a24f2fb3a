#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "pathloss/raster.hpp"

namespace pathloss {

inline constexpr double kDefaultEarthRadius = 6'364'750.0;
inline constexpr int kDefaultWidth = 61;

struct LinkGeometry {
  std::uint64_t link_id = 0;
  Point tx;
  Point rx;
  double tx_antenna_height = 0.0;
  double rx_antenna_height = 0.0;
  int width = kDefaultWidth;

  /// Planar Tx-Rx distance in metres.
  double distance() const;
  /// Number of rows, floor(d).
  std::size_t rows() const;
  /// Spacing between consecutive rows; rows span Tx to Rx inclusive.
  double row_spacing() const;
  /// Throws InvalidWidthError, DegenerateLinkError or DomainError.
  void validate() const;
};

/// Curvature-corrected (or raw) surface heights for one link, row-major with
/// shape (rows, width). Row 0 holds the Tx, the last row the Rx; both sit on
/// the center column. Column 0 lies to the left of the Tx->Rx bearing.
struct PathProfile {
  LinkGeometry geometry;
  std::size_t rows = 0;
  std::size_t width = 0;
  std::vector<float> heights;
  bool curvature_applied = false;
  double earth_radius = kDefaultEarthRadius;

  float at(std::size_t row, std::size_t col) const { return heights[row * width + col]; }
  std::size_t center_column() const { return (width - 1) / 2; }
  /// Distance along the path from the Tx row to row `i`.
  double along_distance(std::size_t i) const;
};

/// Row-major (floor(d) x W) lattice of sample points.
std::vector<Point> generate_sampling_grid(const LinkGeometry& geometry);

/// Nearest-neighbour extraction at every grid point. Throws ExtractionError.
PathProfile extract_profile(const RasterIndex& index, const LinkGeometry& geometry);

/// Drop of a spherical earth surface below the Tx tangent plane at along-path
/// distance x (parabolic form x^2 / 2R).
double curvature_drop(double along_m, double earth_radius = kDefaultEarthRadius);

/// Lowers every row by curvature_drop of its along-path distance. Throws
/// StateError if the profile is already corrected.
PathProfile earth_curvature_correct(PathProfile profile,
                                    double earth_radius = kDefaultEarthRadius);

/// Center column of `profile` as a (rows x 1) profile.
PathProfile crop_direct_path(const PathProfile& profile);

// Profile container: "PLPROF01", u64 count, then per profile a fixed header
// (link id, d, rows, W, earth radius, orientation flag, curvature flag, Tx/Rx
// geometry) followed by rows*W little-endian float32 heights.
void write_profiles(std::ostream& out, const std::vector<PathProfile>& profiles);
std::vector<PathProfile> read_profiles(std::istream& in);
void save_profiles(const std::filesystem::path& path, const std::vector<PathProfile>& profiles);
std::vector<PathProfile> load_profiles(const std::filesystem::path& path);

}  // namespace pathloss
