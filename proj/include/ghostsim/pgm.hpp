#pragma once

#include <filesystem>

#include "ghostsim/image.hpp"

namespace ghostsim {

/// Binary 8-bit PGM (P5). On write the image is mapped linearly from its own
/// [min, max] onto [0, 255] and rounded; a constant image writes as all 0.
void write_pgm(const std::filesystem::path& path, const Image& img);

/// Reads P5 with maxval <= 255. Returned intensities are raw gray levels in
/// [0, maxval] (no rescaling). Throws BadPgm or IoFailure.
Image read_pgm(const std::filesystem::path& path);

}  // namespace ghostsim
