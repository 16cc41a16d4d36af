#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ogsbl/channel.hpp"
#include "ogsbl/dataset_io.hpp"

using namespace ogsbl;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("steering vector at broadside is the constant vector") {
  ArrayGeometry geom{5, 0.5};
  const VecC a = steering_vector(geom, 0.0);
  for (int n = 0; n < 5; ++n) {
    CHECK(a(n).real() == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-15));
    CHECK(a(n).imag() == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("steering vector at endfire alternates sign for half-wavelength spacing") {
  ArrayGeometry geom{2, 0.5};
  const VecC a = steering_vector(geom, kPi / 2.0);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(a(0) - Complex(s, 0.0)) < 1e-12);
  CHECK(std::abs(a(1) - Complex(-s, 0.0)) < 1e-12);
}

TEST_CASE("steering vectors have unit norm") {
  ArrayGeometry geom{16, 0.5};
  RngStream rng(7);
  for (int i = 0; i < 100; ++i) {
    const double angle = rng.uniform(-kPi / 2.0, kPi / 2.0);
    CHECK(std::abs(steering_vector(geom, angle).norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("steering derivative vanishes at the domain edge and at element 0") {
  ArrayGeometry geom{8, 0.5};
  CHECK(steering_derivative(geom, kPi / 2.0).norm() < 1e-12);
  RngStream rng(3);
  for (int i = 0; i < 10; ++i) {
    const VecC d = steering_derivative(geom, rng.uniform(-1.5, 1.5));
    CHECK(std::abs(d(0)) == 0.0);
  }
}

TEST_CASE("steering derivative matches central finite differences") {
  ArrayGeometry geom{12, 0.5};
  RngStream rng(11);
  const double step = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const double angle = rng.uniform(-1.5, 1.5);
    const VecC analytic = steering_derivative(geom, angle);
    const VecC fd = (steering_vector(geom, angle + step) - steering_vector(geom, angle - step)) / (2.0 * step);
    CHECK((analytic - fd).norm() / fd.norm() < 1e-5);
  }
}

TEST_CASE("dictionary columns are steering vectors at grid plus gap") {
  ArrayGeometry geom{8, 0.5};
  const Grid grid = Grid::uniform(16);
  SUBCASE("zero gaps reproduce the grid") {
    const MatC a = build_dictionary(geom, grid, VecR::Zero(16));
    for (int j = 0; j < 16; ++j) {
      CHECK((a.col(j) - steering_vector(geom, grid.points(j))).norm() < 1e-14);
      CHECK(std::abs(a.col(j).norm() - 1.0) < 1e-12);
    }
  }
  SUBCASE("single-point grid with quarter-resolution gap") {
    Grid tiny;
    tiny.points = VecR::Constant(1, 0.3);
    tiny.resolution = 0.1;
    VecR beta = VecR::Constant(1, 0.025);
    const MatC a = build_dictionary(geom, tiny, beta);
    CHECK((a.col(0) - steering_vector(geom, 0.3 + 0.025)).norm() < 1e-14);
  }
  SUBCASE("gaps beyond half a cell are clipped") {
    VecR beta = VecR::Constant(16, 10.0);
    const MatC a = build_dictionary(geom, grid, beta);
    CHECK((a.col(0) - steering_vector(geom, grid.points(0) + grid.resolution / 2.0)).norm() < 1e-14);
  }
  SUBCASE("beta length mismatch throws") {
    CHECK_THROWS_AS(build_dictionary(geom, grid, VecR::Zero(5)), DimensionError);
  }
}

TEST_CASE("grid points sit strictly inside the angular domain") {
  const Grid grid = Grid::uniform(64);
  CHECK(grid.points(0) > -kPi / 2.0);
  CHECK(grid.points(63) < kPi / 2.0);
  for (int j = 1; j < 64; ++j) {
    CHECK(grid.points(j) - grid.points(j - 1) == doctest::Approx(grid.resolution).epsilon(1e-12));
  }
}

TEST_CASE("generated channel is the gain-weighted steering sum") {
  ArrayGeometry geom{16, 0.5};
  RngStream rng(5);
  ChannelGenConfig cfg;
  cfg.n_clusters = 2;
  cfg.rays_per_cluster = 3;
  const ChannelSample s = generate_channel(geom, cfg, rng);
  CHECK(s.ray_count() == 6);
  VecC expected = VecC::Zero(16);
  for (int j = 0; j < 6; ++j) expected += s.ray_gains(j) * steering_vector(geom, s.ray_angles(j));
  CHECK((s.h - expected).norm() < 1e-12);
  for (int j = 0; j < 6; ++j) {
    CHECK(s.ray_angles(j) > -kPi / 2.0);
    CHECK(s.ray_angles(j) < kPi / 2.0);
  }
}

TEST_CASE("mean channel energy matches J * gain_var over many draws") {
  ArrayGeometry geom{8, 0.5};
  RngStream rng(17);
  ChannelGenConfig cfg;
  cfg.n_clusters = 4;
  cfg.rays_per_cluster = 1;
  cfg.gain_var = 2.0;
  double total = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) total += generate_channel(geom, cfg, rng).h.squaredNorm();
  const double expected = 4 * 2.0;  // J * sigma_alpha^2, unit-norm steering columns
  CHECK(total / draws == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("pilot scaling enforces the trace constraint exactly") {
  ArrayGeometry geom{8, 0.5};
  RngStream rng(23);
  const PilotMatrix p = generate_pilots(12, geom, 2.5, rng);
  const double trace = p.x.squaredNorm();
  CHECK(std::abs(trace - 2.5 * 12 * 8) / (2.5 * 12 * 8) < 1e-10);

  RngStream rng_a(99), rng_b(99);
  const PilotMatrix a = generate_pilots(4, geom, 1.0, rng_a);
  const PilotMatrix b = generate_pilots(4, geom, 1.0, rng_b);
  CHECK(a.x == b.x);  // same seed, bit-identical

  ArrayGeometry one{1, 0.5};
  RngStream rng_c(1);
  const PilotMatrix single = generate_pilots(1, one, 1.0, rng_c);
  CHECK(std::norm(single.x(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("noiseless observation is exactly X h") {
  ArrayGeometry geom{6, 0.5};
  RngStream rng(31);
  const PilotMatrix p = generate_pilots(9, geom, 1.0, rng);
  const VecC h = rng.complex_gaussian_vector(6);
  const VecC y = observe(p, h, 0.0, rng);
  CHECK(y.size() == 9);
  CHECK((y - p.x * h).norm() == 0.0);
}

TEST_CASE("observation noise power matches T * sigma^2") {
  ArrayGeometry geom{4, 0.5};
  RngStream rng(37);
  const PilotMatrix p = generate_pilots(5, geom, 1.0, rng);
  const VecC h = rng.complex_gaussian_vector(4);
  const VecC clean = p.x * h;
  double total = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) total += (observe(p, h, 0.3, rng) - clean).squaredNorm();
  CHECK(total / draws == doctest::Approx(5 * 0.3).epsilon(0.05));
}

TEST_CASE("dataset round-trips bit-exactly") {
  ArrayGeometry geom{8, 0.5};
  RngStream rng(41);
  Dataset d;
  d.geometry = geom;
  d.grid = Grid::uniform(16);
  d.pilot = generate_pilots(6, geom, 1.0, rng);
  d.seed = 12345;
  for (int i = 0; i < 3; ++i) {
    ChannelGenConfig cfg;
    cfg.n_clusters = 1 + i;
    ChannelSample s = generate_channel(geom, cfg, rng);
    s.noise_var = 0.01 * (i + 1);
    s.y = observe(d.pilot, s.h, s.noise_var, rng);
    d.samples.push_back(std::move(s));
  }

  const std::string path = (std::filesystem::temp_directory_path() / "ogsbl_ds_test.bin").string();
  write_dataset(d, path);
  const Dataset r = read_dataset(path);
  CHECK(r.seed == d.seed);
  CHECK(r.geometry.n_antennas == d.geometry.n_antennas);
  CHECK(r.grid.points == d.grid.points);
  CHECK(r.pilot.x == d.pilot.x);
  REQUIRE(r.samples.size() == d.samples.size());
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    CHECK(r.samples[i].h == d.samples[i].h);
    CHECK(r.samples[i].y == d.samples[i].y);
    CHECK(r.samples[i].ray_gains == d.samples[i].ray_gains);
    CHECK(r.samples[i].ray_angles == d.samples[i].ray_angles);
    CHECK(r.samples[i].noise_var == d.samples[i].noise_var);
  }
  std::filesystem::remove(path);
}

TEST_CASE("truncated dataset file raises a structured error") {
  ArrayGeometry geom{4, 0.5};
  RngStream rng(43);
  Dataset d;
  d.geometry = geom;
  d.grid = Grid::uniform(8);
  d.pilot = generate_pilots(3, geom, 1.0, rng);
  ChannelGenConfig cfg;
  ChannelSample s = generate_channel(geom, cfg, rng);
  s.y = observe(d.pilot, s.h, 0.0, rng);
  d.samples.push_back(std::move(s));

  const std::string path = (std::filesystem::temp_directory_path() / "ogsbl_ds_trunc.bin").string();
  write_dataset(d, path);
  const auto full_size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, full_size / 2);
  CHECK_THROWS_AS(read_dataset(path), IoError);

  std::ofstream(path, std::ios::binary) << "garbage";
  CHECK_THROWS_AS(read_dataset(path), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("empty dataset is a valid file") {
  ArrayGeometry geom{4, 0.5};
  RngStream rng(47);
  Dataset d;
  d.geometry = geom;
  d.grid = Grid::uniform(8);
  d.pilot = generate_pilots(3, geom, 1.0, rng);
  const std::string path = (std::filesystem::temp_directory_path() / "ogsbl_ds_empty.bin").string();
  write_dataset(d, path);
  const Dataset r = read_dataset(path);
  CHECK(r.samples.empty());
  CHECK(r.pilot.x == d.pilot.x);
  std::filesystem::remove(path);
}
