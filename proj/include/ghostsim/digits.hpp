#pragma once

#include <cstddef>

#include "ghostsim/image.hpp"

namespace ghostsim {

/// Handwriting-like test object: digit `value` (0-9) drawn as anti-aliased
/// strokes on a black size x size canvas, intensities in [0, 1]. Glyphs fill
/// roughly the central 45% x 65% of the frame, similar to MNIST framing.
/// Throws IndexOutOfRange for values outside 0-9 and TooSmall below 16 px.
Image render_digit(int value, std::size_t size = 64, double stroke_fraction = 0.085);

}  // namespace ghostsim
