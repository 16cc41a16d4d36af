#pragma once

#include <cstdint>
#include <vector>

#include "ogsbl/rng.hpp"
#include "ogsbl/types.hpp"

namespace ogsbl {

/// Uniform linear array: N antennas spaced d/lambda wavelengths apart.
struct ArrayGeometry {
  int n_antennas = 32;
  double spacing_ratio = 0.5;
};

/// Fixed angular sampling grid over [-pi/2, pi/2]. Points sit at the
/// centers of equal cells so no point lands on the domain edge, where the
/// steering map degenerates (cos = 0).
struct Grid {
  VecR points;        // strictly increasing, radians
  double resolution;  // cell width

  static Grid uniform(int size);
  int size() const { return static_cast<int>(points.size()); }
};

/// Known pilot block X (T x N), scaled so trace(X X^H) = P*T*N.
struct PilotMatrix {
  MatC x;
  double power = 1.0;
  int length = 0;  // T
};

/// One synthetic training/eval instance.
struct ChannelSample {
  VecC h;           // true channel, length N
  VecR ray_angles;  // length J = n_clusters * rays_per_cluster
  VecC ray_gains;   // length J
  int n_clusters = 0;
  int rays_per_cluster = 0;
  VecC y;  // observation, length T (empty until observe())
  double noise_var = 0.0;
  double gain_var = 1.0;

  int ray_count() const { return n_clusters * rays_per_cluster; }
};

struct Dataset {
  std::vector<ChannelSample> samples;
  ArrayGeometry geometry;
  Grid grid;
  PilotMatrix pilot;
  std::uint64_t seed = 0;
};

/// ULA response a(phi): element n = exp(-j 2 pi (d/lambda) n sin phi) / sqrt(N).
VecC steering_vector(const ArrayGeometry& geom, double angle);

/// d a(phi) / d phi: element n = (-j 2 pi (d/lambda) n cos phi) * a(phi)_n.
VecC steering_derivative(const ArrayGeometry& geom, double angle);

/// Off-grid dictionary A(beta): column j = a(grid_j + beta_j).
/// beta components must satisfy |beta_j| <= resolution/2.
MatC build_dictionary(const ArrayGeometry& geom, const Grid& grid, const VecR& beta);

/// Column-wise steering derivatives at grid + beta (same clipping contract).
MatC build_dictionary_derivative(const ArrayGeometry& geom, const Grid& grid, const VecR& beta);

struct ChannelGenConfig {
  int n_clusters = 1;
  int rays_per_cluster = 1;
  double gain_var = 1.0;
  double angle_spread = 2.0 * std::numbers::pi / 180.0;   // around cluster center
  double center_margin = 5.0 * std::numbers::pi / 180.0;  // from domain edges
};

/// Draws cluster centers uniformly inside the margins, rays within
/// +-angle_spread of their center (clipped to the open domain), gains
/// i.i.d. CN(0, gain_var), and forms h as the gain-weighted steering sum.
ChannelSample generate_channel(const ArrayGeometry& geom, const ChannelGenConfig& cfg, RngStream& rng);

/// I.i.d. CN entries rescaled so trace(X X^H) = P*T*N holds exactly.
PilotMatrix generate_pilots(int pilot_length, const ArrayGeometry& geom, double power, RngStream& rng);

/// y = X h + n with n i.i.d. CN(0, noise_var) per entry.
VecC observe(const PilotMatrix& pilot, const VecC& h, double noise_var, RngStream& rng);

}  // namespace ogsbl
