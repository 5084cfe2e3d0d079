#pragma once

#include <filesystem>

#include "bsim/sde.hpp"

namespace bsim::trajfile {

// Binary columnar trajectory file:
//   magic "BSIM1", kind byte, u32 channel count, f64 dt, f64 t0,
//   u64-length-prefixed JSON parameter echo, u64 sample count,
//   then each channel as a contiguous little-endian f64 array.
void write(const std::filesystem::path& path, const sde::TrajectorySeries& traj);
sde::TrajectorySeries read(const std::filesystem::path& path);

} // namespace bsim::trajfile
