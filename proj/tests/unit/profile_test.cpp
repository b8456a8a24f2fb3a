#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "pathloss/errors.hpp"
#include "pathloss/profile.hpp"
#include "pathloss/rng.hpp"

using namespace pathloss;

namespace {

// Tile whose cell heights are f(center easting, center northing).
template <typename F>
RasterTile analytic_tile(double e0, double n0, std::size_t side, F f) {
  std::vector<float> h(side * side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const double e = e0 + static_cast<double>(c) + 0.5;
      const double n = n0 + static_cast<double>(side - 1 - r) + 0.5;
      h[r * side + c] = static_cast<float>(f(e, n));
    }
  }
  return RasterTile(e0, n0, side, side, std::move(h), -9999.0f);
}

LinkGeometry link(Point tx, Point rx, int width) {
  LinkGeometry g;
  g.link_id = 42;
  g.tx = tx;
  g.rx = rx;
  g.tx_antenna_height = 20.0;
  g.rx_antenna_height = 1.5;
  g.width = width;
  return g;
}

}  // namespace

TEST_CASE("sampling grid shape") {
  const auto g = link({0, 0}, {189.4, 0}, 61);
  CHECK(generate_sampling_grid(g).size() == 189u * 61u);
  CHECK_THROWS_AS(generate_sampling_grid(link({0, 0}, {189.4, 0}, 60)), InvalidWidthError);
  CHECK_THROWS_AS(generate_sampling_grid(link({0, 0}, {0.5, 0}, 61)), DegenerateLinkError);
}

TEST_CASE("grid due east has flanks at +-1 north") {
  const auto grid = generate_sampling_grid(link({0, 0}, {10, 0}, 3));
  REQUIRE(grid.size() == 30);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(grid[i * 3 + 0].north == doctest::Approx(1.0));
    CHECK(grid[i * 3 + 1].north == doctest::Approx(0.0));
    CHECK(grid[i * 3 + 2].north == doctest::Approx(-1.0));
    CHECK(grid[i * 3 + 1].east == doctest::Approx(10.0 * static_cast<double>(i) / 9.0));
  }
  CHECK(grid.front().east == 0.0);
  CHECK(grid[28].east == doctest::Approx(10.0));
}

TEST_CASE("swapping tx and rx reverses rows and columns") {
  Rng rng(9);
  for (int trial = 0; trial < 25; ++trial) {
    const Point a{rng.uniform(-500, 500), rng.uniform(-500, 500)};
    const Point b{rng.uniform(-500, 500), rng.uniform(-500, 500)};
    if (std::hypot(a.east - b.east, a.north - b.north) < 2.0) continue;
    const auto fwd = generate_sampling_grid(link(a, b, 5));
    const auto rev = generate_sampling_grid(link(b, a, 5));
    const std::size_t n = fwd.size() / 5;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        const Point p = fwd[i * 5 + j];
        const Point q = rev[(n - 1 - i) * 5 + (4 - j)];
        CHECK(p.east == doctest::Approx(q.east).epsilon(1e-9));
        CHECK(p.north == doctest::Approx(q.north).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("extraction on analytic rasters") {
  SUBCASE("constant") {
    RasterIndex idx;
    idx.add(analytic_tile(0, 0, 300, [](double, double) { return 5.0; }));
    const auto p = extract_profile(idx, link({60, 150}, {249.4, 170}, 61));
    CHECK(p.rows == 190);
    for (float h : p.heights) CHECK(h == 5.0f);
  }
  SUBCASE("ramp in easting") {
    RasterIndex idx;
    idx.add(analytic_tile(1000, 0, 300, [](double e, double) { return e; }));
    const auto g = link({1050, 150}, {1239, 150}, 61);
    const auto grid = generate_sampling_grid(g);
    const auto p = extract_profile(idx, g);
    REQUIRE(p.heights.size() == grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CHECK(std::abs(p.heights[k] - grid[k].east) <= 0.5 + 1e-3);
    }
  }
}

TEST_CASE("extraction failures name the link") {
  std::vector<float> h(20 * 20, 1.0f);
  h[10 * 20 + 10] = -9999.0f;
  RasterIndex idx;
  idx.add(RasterTile(0, 0, 20, 20, h, -9999.0f));
  try {
    extract_profile(idx, link({1, 9.5}, {19, 9.5}, 1));
    FAIL("expected extraction error");
  } catch (const ExtractionError& e) {
    CHECK(e.link_id() == 42);
  }
  CHECK_THROWS_AS(extract_profile(idx, link({1, 1}, {30, 1}, 1)), ExtractionError);
}

TEST_CASE("curvature correction") {
  constexpr double R = 6'364'750.0;
  auto exact = [&](double x) { return R - std::sqrt(R * R - x * x); };
  CHECK(curvature_drop(0.0) == 0.0);
  CHECK(curvature_drop(1000.0, R) == doctest::Approx(0.07856).epsilon(1e-4));
  CHECK(std::abs(curvature_drop(1000.0, R) - exact(1000.0)) < 1e-6);
  CHECK(std::abs(curvature_drop(10000.0, R) - 7.8558) < 1e-3);
  CHECK(std::abs(exact(10000.0) - 7.8558) < 1e-3);
  for (double x = 1.0; x < 80000.0; x *= 1.7) CHECK(curvature_drop(x) < curvature_drop(x * 1.01));

  RasterIndex idx;
  idx.add(analytic_tile(0, 0, 400, [](double, double) { return 30.0; }));
  const auto raw = extract_profile(idx, link({10, 10}, {370, 10}, 3));
  const auto fixed = earth_curvature_correct(raw, R);
  CHECK(fixed.curvature_applied);
  CHECK(fixed.at(0, 1) == 30.0f);
  const double x_last = fixed.along_distance(fixed.rows - 1);
  CHECK(x_last == doctest::Approx(360.0));
  CHECK(fixed.at(fixed.rows - 1, 2) == static_cast<float>(30.0 - x_last * x_last / (2 * R)));
  CHECK_THROWS_AS(earth_curvature_correct(fixed, R), StateError);
}

TEST_CASE("crop keeps the center column") {
  RasterIndex idx;
  idx.add(analytic_tile(0, 0, 400, [](double e, double n) { return 0.1 * e + n; }));
  auto full = extract_profile(idx, link({100, 100}, {289.4, 160}, 61));
  const auto cropped = crop_direct_path(full);
  CHECK(cropped.width == 1);
  CHECK(cropped.rows == full.rows);
  for (std::size_t i = 0; i < full.rows; ++i) CHECK(cropped.heights[i] == full.at(i, 30));

  for (std::size_t i = 0; i < full.rows; ++i) full.heights[i * 61 + 30] = 7.0f;
  for (float h : crop_direct_path(full).heights) CHECK(h == 7.0f);

  const auto again = crop_direct_path(cropped);
  CHECK(again.heights == cropped.heights);
}

TEST_CASE("profile container round trip") {
  RasterIndex idx;
  idx.add(analytic_tile(0, 0, 200, [](double e, double n) { return std::sin(e * 0.1) * 3 + n * 0.01; }));
  std::vector<PathProfile> profiles;
  profiles.push_back(earth_curvature_correct(extract_profile(idx, link({20, 20}, {150, 90}, 5))));
  profiles.push_back(extract_profile(idx, link({180, 30}, {40, 170}, 1)));
  std::stringstream buf;
  write_profiles(buf, profiles);
  const auto back = read_profiles(buf);
  REQUIRE(back.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(back[k].rows == profiles[k].rows);
    CHECK(back[k].width == profiles[k].width);
    CHECK(back[k].curvature_applied == profiles[k].curvature_applied);
    CHECK(back[k].geometry.link_id == profiles[k].geometry.link_id);
    CHECK(std::memcmp(back[k].heights.data(), profiles[k].heights.data(),
                      profiles[k].heights.size() * sizeof(float)) == 0);
  }
  std::stringstream bad("PLPROFXX");
  CHECK_THROWS_AS(read_profiles(bad), FormatError);
}
