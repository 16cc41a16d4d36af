#include "ogsbl/channel.hpp"

#include <algorithm>
#include <cmath>

namespace ogsbl {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr Complex kJ{0.0, 1.0};
}  // namespace

Grid Grid::uniform(int size) {
  if (size < 2) throw DimensionError("grid needs at least 2 points");
  Grid g;
  g.resolution = kPi / size;
  g.points.resize(size);
  for (int j = 0; j < size; ++j) {
    g.points(j) = -kPi / 2.0 + (j + 0.5) * g.resolution;
  }
  return g;
}

VecC steering_vector(const ArrayGeometry& geom, double angle) {
  const int n = geom.n_antennas;
  VecC a(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double phase_step = -2.0 * kPi * geom.spacing_ratio * std::sin(angle);
  for (int k = 0; k < n; ++k) {
    a(k) = scale * std::exp(kJ * (phase_step * k));
  }
  return a;
}

VecC steering_derivative(const ArrayGeometry& geom, double angle) {
  const int n = geom.n_antennas;
  VecC a = steering_vector(geom, angle);
  const double factor = -2.0 * kPi * geom.spacing_ratio * std::cos(angle);
  for (int k = 0; k < n; ++k) {
    a(k) *= kJ * (factor * k);
  }
  return a;
}

MatC build_dictionary(const ArrayGeometry& geom, const Grid& grid, const VecR& beta) {
  if (beta.size() != grid.points.size()) {
    throw DimensionError("beta length does not match grid size");
  }
  const double half = grid.resolution / 2.0;
  MatC a(geom.n_antennas, grid.size());
  for (int j = 0; j < grid.size(); ++j) {
    const double gap = std::clamp(beta(j), -half, half);
    a.col(j) = steering_vector(geom, grid.points(j) + gap);
  }
  return a;
}

MatC build_dictionary_derivative(const ArrayGeometry& geom, const Grid& grid, const VecR& beta) {
  if (beta.size() != grid.points.size()) {
    throw DimensionError("beta length does not match grid size");
  }
  const double half = grid.resolution / 2.0;
  MatC d(geom.n_antennas, grid.size());
  for (int j = 0; j < grid.size(); ++j) {
    const double gap = std::clamp(beta(j), -half, half);
    d.col(j) = steering_derivative(geom, grid.points(j) + gap);
  }
  return d;
}

ChannelSample generate_channel(const ArrayGeometry& geom, const ChannelGenConfig& cfg, RngStream& rng) {
  if (cfg.n_clusters < 1 || cfg.rays_per_cluster < 1) {
    throw DimensionError("cluster and ray counts must be at least 1");
  }
  if (cfg.gain_var <= 0.0) throw DimensionError("gain_var must be positive");

  const int j_total = cfg.n_clusters * cfg.rays_per_cluster;
  ChannelSample s;
  s.n_clusters = cfg.n_clusters;
  s.rays_per_cluster = cfg.rays_per_cluster;
  s.gain_var = cfg.gain_var;
  s.ray_angles.resize(j_total);
  s.ray_gains.resize(j_total);
  s.h = VecC::Zero(geom.n_antennas);

  const double lo = -kPi / 2.0 + cfg.center_margin;
  const double hi = kPi / 2.0 - cfg.center_margin;
  const double edge = kPi / 2.0 - 1e-6;  // keep rays strictly inside the domain
  int idx = 0;
  for (int c = 0; c < cfg.n_clusters; ++c) {
    const double center = rng.uniform(lo, hi);
    for (int r = 0; r < cfg.rays_per_cluster; ++r) {
      double angle = center + rng.uniform(-cfg.angle_spread, cfg.angle_spread);
      angle = std::clamp(angle, -edge, edge);
      const Complex gain = rng.complex_gaussian(cfg.gain_var);
      s.ray_angles(idx) = angle;
      s.ray_gains(idx) = gain;
      s.h += gain * steering_vector(geom, angle);
      ++idx;
    }
  }
  return s;
}

PilotMatrix generate_pilots(int pilot_length, const ArrayGeometry& geom, double power, RngStream& rng) {
  if (pilot_length < 1) throw DimensionError("pilot length must be at least 1");
  if (power <= 0.0) throw DimensionError("pilot power must be positive");

  PilotMatrix p;
  p.length = pilot_length;
  p.power = power;
  p.x.resize(pilot_length, geom.n_antennas);
  for (int t = 0; t < pilot_length; ++t) {
    for (int n = 0; n < geom.n_antennas; ++n) {
      p.x(t, n) = rng.complex_gaussian(1.0);
    }
  }
  const double target = power * pilot_length * geom.n_antennas;
  const double actual = p.x.squaredNorm();
  if (actual <= 0.0) throw NumericalError("degenerate pilot draw");
  p.x *= std::sqrt(target / actual);
  return p;
}

VecC observe(const PilotMatrix& pilot, const VecC& h, double noise_var, RngStream& rng) {
  if (h.size() != pilot.x.cols()) {
    throw DimensionError("channel length does not match pilot columns");
  }
  VecC y = pilot.x * h;
  if (noise_var > 0.0) {
    for (int t = 0; t < y.size(); ++t) y(t) += rng.complex_gaussian(noise_var);
  }
  return y;
}

}  // namespace ogsbl
