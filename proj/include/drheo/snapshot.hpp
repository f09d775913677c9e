#ifndef DRHEO_SNAPSHOT_HPP
#define DRHEO_SNAPSHOT_HPP

#include <string>

#include "drheo/field.hpp"

namespace drheo {

// Binary snapshot, little-endian:
//   magic "DRHE" | u32 format version | u32 d | u32 N | f64 time |
//   packed coefficients (re, im as f64) in row-major wavenumber order with
//   the velocity components innermost.
inline constexpr std::uint32_t snapshot_format_version = 1;

void write_snapshot(const spectral_velocity& v, const std::string& path);
std::string snapshot_bytes(const spectral_velocity& v);

// dealias_fraction is not stored; the caller supplies it (default 2/3)
spectral_velocity read_snapshot(const std::string& path, double dealias_fraction = 2.0 / 3.0);
spectral_velocity snapshot_from_bytes(const std::string& bytes,
                                      double dealias_fraction = 2.0 / 3.0);

} // namespace drheo

#endif
