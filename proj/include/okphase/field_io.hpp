#pragma once

/// @file field_io.hpp
/// @brief Binary field dumps, PGM previews and key=value metadata files.
///
/// Dump layout (little endian): "OKF1", u32 N, f64 L, then N*N f64 samples in
/// row-major order (x index outermost).

#include <filesystem>
#include <map>
#include <string>

#include "okphase/spectral.hpp"

namespace okphase {

void write_field_dump(const std::filesystem::path& path, const RealField& field);
RealField read_field_dump(const std::filesystem::path& path);

/// 8-bit binary PGM (P5); samples mapped linearly from [min, max] to [0, 255].
void write_pgm(const std::filesystem::path& path, const RealField& field);

/// Plain-text key=value lines; '#' starts a comment, blank lines ignored.
using KeyValues = std::map<std::string, std::string>;
KeyValues read_key_values(const std::filesystem::path& path);
KeyValues parse_key_values(const std::string& text);
void write_key_values(const std::filesystem::path& path, const KeyValues& values);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

}  // namespace okphase
