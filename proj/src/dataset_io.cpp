#include "ogsbl/dataset_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace ogsbl {

namespace {

constexpr char kMagic[8] = {'O', 'G', 'S', 'B', 'L', 'D', 'S', '1'};
constexpr std::uint32_t kVersion = 1;

// Raw scalar I/O; the format is little-endian and so are the supported hosts.
template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const char* what) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError(std::string("dataset file truncated reading ") + what);
  return v;
}

void put_real_vec(std::ostream& os, const VecR& v) {
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

VecR get_real_vec(std::istream& is, Eigen::Index n, const char* what) {
  VecR v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw IoError(std::string("dataset file truncated reading ") + what);
  return v;
}

void put_complex(std::ostream& os, const Complex* data, Eigen::Index n) {
  // std::complex<double> is laid out as (re, im) pairs, which is the format.
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(Complex)));
}

void get_complex(std::istream& is, Complex* data, Eigen::Index n, const char* what) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(Complex)));
  if (!is) throw IoError(std::string("dataset file truncated reading ") + what);
}

}  // namespace

void write_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open dataset file for writing: " + path);

  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(dataset.geometry.n_antennas));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(dataset.pilot.length));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(dataset.grid.size()));
  put<double>(os, dataset.geometry.spacing_ratio);
  put<double>(os, dataset.pilot.power);
  put<std::uint64_t>(os, dataset.seed);
  put<std::uint64_t>(os, static_cast<std::uint64_t>(dataset.samples.size()));
  put<double>(os, dataset.grid.resolution);
  put_real_vec(os, dataset.grid.points);
  put_complex(os, dataset.pilot.x.data(), dataset.pilot.x.size());

  for (const ChannelSample& s : dataset.samples) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.n_clusters));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.rays_per_cluster));
    put<double>(os, s.noise_var);
    put<double>(os, s.gain_var);
    put_real_vec(os, s.ray_angles);
    put_complex(os, s.ray_gains.data(), s.ray_gains.size());
    put_complex(os, s.h.data(), s.h.size());
    put<std::uint32_t>(os, s.y.size() > 0 ? 1u : 0u);
    if (s.y.size() > 0) put_complex(os, s.y.data(), s.y.size());
  }
  if (!os) throw IoError("write failure on dataset file: " + path);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open dataset file: " + path);

  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not an ogsbl dataset file: " + path);
  }
  const auto version = get<std::uint32_t>(is, "version");
  if (version != kVersion) {
    throw IoError("unsupported dataset version " + std::to_string(version));
  }

  Dataset d;
  d.geometry.n_antennas = static_cast<int>(get<std::uint32_t>(is, "antenna count"));
  const int pilot_length = static_cast<int>(get<std::uint32_t>(is, "pilot length"));
  const int grid_size = static_cast<int>(get<std::uint32_t>(is, "grid size"));
  d.geometry.spacing_ratio = get<double>(is, "spacing ratio");
  d.pilot.power = get<double>(is, "pilot power");
  d.seed = get<std::uint64_t>(is, "seed");
  const auto n_samples = get<std::uint64_t>(is, "sample count");
  d.grid.resolution = get<double>(is, "grid resolution");
  d.grid.points = get_real_vec(is, grid_size, "grid points");
  d.pilot.length = pilot_length;
  d.pilot.x.resize(pilot_length, d.geometry.n_antennas);
  get_complex(is, d.pilot.x.data(), d.pilot.x.size(), "pilot matrix");

  d.samples.resize(n_samples);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    ChannelSample& s = d.samples[i];
    s.n_clusters = static_cast<int>(get<std::uint32_t>(is, "cluster count"));
    s.rays_per_cluster = static_cast<int>(get<std::uint32_t>(is, "ray count"));
    s.noise_var = get<double>(is, "noise variance");
    s.gain_var = get<double>(is, "gain variance");
    const int j_total = s.n_clusters * s.rays_per_cluster;
    s.ray_angles = get_real_vec(is, j_total, "ray angles");
    s.ray_gains.resize(j_total);
    get_complex(is, s.ray_gains.data(), j_total, "ray gains");
    s.h.resize(d.geometry.n_antennas);
    get_complex(is, s.h.data(), s.h.size(), "channel vector");
    const auto has_y = get<std::uint32_t>(is, "observation flag");
    if (has_y) {
      s.y.resize(pilot_length);
      get_complex(is, s.y.data(), s.y.size(), "observation");
    }
  }
  return d;
}

}  // namespace ogsbl
