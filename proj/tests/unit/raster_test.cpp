#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "pathloss/errors.hpp"
#include "pathloss/raster.hpp"
#include "pathloss/rng.hpp"

using namespace pathloss;

namespace {

RasterTile parse(const std::string& text) {
  std::istringstream in(text);
  return read_raster(in);
}

// Exhaustive nearest cell center, lower row then lower column on ties.
std::pair<std::size_t, std::size_t> brute_nearest(const RasterTile& t, Point p) {
  double best = std::numeric_limits<double>::infinity();
  std::pair<std::size_t, std::size_t> arg{0, 0};
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
      const double cx = t.origin_easting() + static_cast<double>(c) + 0.5;
      const double cy = t.origin_northing() + static_cast<double>(t.n_rows() - 1 - r) + 0.5;
      const double dist = std::hypot(p.east - cx, p.north - cy);
      if (dist < best) {
        best = dist;
        arg = {r, c};
      }
    }
  }
  return arg;
}

RasterTile numbered_tile(double e0, double n0, std::size_t rows, std::size_t cols, float base) {
  std::vector<float> h(rows * cols);
  for (std::size_t k = 0; k < h.size(); ++k) h[k] = base + static_cast<float>(k);
  return RasterTile(e0, n0, rows, cols, std::move(h), -9999.0f);
}

}  // namespace

TEST_CASE("load a 2x2 grid") {
  const auto t = parse(
      "ncols 2\nnrows 2\nxllcorner 100\nyllcorner 200\ncellsize 1\nNODATA_value -9999\n1 2\n3 4\n");
  CHECK(t.n_rows() == 2);
  CHECK(t.n_cols() == 2);
  CHECK(t.at(0, 0) == 1.0f);
  CHECK(t.at(0, 1) == 2.0f);
  CHECK(t.at(1, 0) == 3.0f);
  CHECK(t.at(1, 1) == 4.0f);
  // Row 0 is the northern row.
  RasterIndex idx;
  idx.add(t);
  CHECK(idx.sample_nearest(100.5, 201.5) == 1.0f);
  CHECK(idx.sample_nearest(101.5, 200.5) == 4.0f);
}

TEST_CASE("raster header errors") {
  CHECK_THROWS_AS(parse("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 2\nNODATA_value -1\n1 2\n"),
                  UnsupportedResolutionError);
  CHECK_THROWS_AS(parse("ncols 3\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -1\n1 2\n3 4\n"),
                  FormatError);
  CHECK_THROWS_AS(parse("ncols 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n"), FormatError);
  CHECK_THROWS_AS(parse("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -1\n1 x\n"),
                  FormatError);
}

TEST_CASE("raster round trip is bit identical") {
  Rng rng(5);
  std::vector<float> h(7 * 9);
  for (auto& v : h) v = static_cast<float>(rng.uniform(-50.0, 400.0));
  h[11] = -9999.0f;
  const RasterTile tile(512345.0, 181000.0, 7, 9, h, -9999.0f);
  std::ostringstream first;
  write_raster(tile, first);
  const auto back = parse(first.str());
  std::ostringstream second;
  write_raster(back, second);
  CHECK(first.str() == second.str());
  REQUIRE(back.heights().size() == h.size());
  for (std::size_t k = 0; k < h.size(); ++k) CHECK(back.heights()[k] == h[k]);
  CHECK(back.is_nodata(1, 2));
}

TEST_CASE("nearest sampling") {
  RasterIndex idx;
  idx.add(numbered_tile(0.0, 0.0, 4, 4, 10.0f));
  const auto& t = idx.tile(0);

  SUBCASE("cell centers") {
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t c = 0; c < 4; ++c) {
        const Point p = t.cell_center(r, c);
        CHECK(idx.sample_nearest(p) == t.at(r, c));
      }
    }
  }
  SUBCASE("0.4 m east of a center") {
    const Point p = t.cell_center(2, 1);
    const auto [r, c] = brute_nearest(t, {p.east + 0.4, p.north});
    CHECK(r == 2);
    CHECK(c == 1);
    CHECK(idx.sample_nearest(p.east + 0.4, p.north) == t.at(2, 1));
  }
  SUBCASE("outside coverage") {
    CHECK_THROWS_AS(idx.sample_nearest(-1.0, 2.0), OutOfCoverageError);
    CHECK_THROWS_AS(idx.sample_nearest(2.0, 5.0), OutOfCoverageError);
  }
}

TEST_CASE("nodata cell") {
  std::vector<float> h = {1, 2, -9999, 4};
  RasterIndex idx;
  idx.add(RasterTile(0, 0, 2, 2, h, -9999.0f));
  CHECK_THROWS_AS(idx.sample_nearest(0.5, 0.5), NodataError);
  CHECK_FALSE(idx.has_data({0.5, 0.5}));
  CHECK(idx.has_data({1.5, 0.5}));
}

TEST_CASE("nearest sampling matches exhaustive argmin") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rows = 1 + rng.below(32);
    const auto cols = 1 + rng.below(32);
    RasterIndex idx;
    idx.add(numbered_tile(1000.0, 2000.0, rows, cols, 0.0f));
    const auto& t = idx.tile(0);
    for (int q = 0; q < 200; ++q) {
      const Point p{1000.0 + rng.uniform() * static_cast<double>(cols),
                    2000.0 + rng.uniform() * static_cast<double>(rows)};
      if (!t.contains(p)) continue;
      const auto [r, c] = brute_nearest(t, p);
      CHECK(idx.sample_nearest(p) == t.at(r, c));
    }
  }
}

TEST_CASE("insertion order does not matter for disjoint tiles") {
  const auto a = numbered_tile(0, 0, 8, 8, 0.0f);
  const auto b = numbered_tile(8, 0, 8, 8, 100.0f);
  const auto c = numbered_tile(0, 8, 8, 16, 1000.0f);
  RasterIndex forward, backward;
  forward.add(a);
  forward.add(b);
  forward.add(c);
  backward.add(c);
  backward.add(b);
  backward.add(a);
  Rng rng(3);
  for (int q = 0; q < 500; ++q) {
    const Point p{rng.uniform(0.0, 16.0), rng.uniform(0.0, 16.0)};
    CHECK(forward.sample_nearest(p) == backward.sample_nearest(p));
  }
}

TEST_CASE("coverage fraction") {
  RasterIndex idx;
  idx.add(numbered_tile(0, 0, 10, 10, 1.0f));
  const std::vector<Point> inside = {{1, 1}, {5, 5}, {9.5, 0.2}};
  const std::vector<Point> half = {{1, 1}, {50, 50}, {5, 5}, {-3, 4}};
  const std::vector<Point> outside = {{-1, -1}, {11, 3}};
  CHECK(coverage_check(idx, inside) == 1.0);
  CHECK(coverage_check(idx, half) == 0.5);
  CHECK(coverage_check(idx, outside) == 0.0);
  CHECK_THROWS_AS(coverage_check(idx, std::vector<Point>{}), EmptyInputError);
}
