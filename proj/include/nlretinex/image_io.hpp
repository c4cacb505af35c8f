#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "nlretinex/image.hpp"

namespace nlretinex {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BitDepth { k8 = 8, k16 = 16 };

/// Reads PNG (8/16-bit gray, gray+alpha, RGB, RGBA, palette) or binary
/// PGM/PPM (P5/P6). Samples are divided by the bit-depth maximum; alpha is
/// dropped.
ColorImage load_image(const std::filesystem::path& path);

/// Writes PNG or PGM/PPM depending on the extension. Values are clamped to
/// [0,1] and rounded to the nearest code.
void save_image(const ColorImage& img, const std::filesystem::path& path, BitDepth depth = BitDepth::k8);

}  // namespace nlretinex
