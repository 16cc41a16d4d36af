#pragma once

#include <string>

#include "ogsbl/channel.hpp"

namespace ogsbl {

/// Binary dataset container. Layout: magic + version, header with
/// (N, T, Jhat, d/lambda, power, seed, sample count), then little-endian
/// 64-bit float arrays; complex values interleaved (re, im).
void write_dataset(const Dataset& dataset, const std::string& path);

/// Throws IoError on truncation, bad magic, or version mismatch.
Dataset read_dataset(const std::string& path);

}  // namespace ogsbl
