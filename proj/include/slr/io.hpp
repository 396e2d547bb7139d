#pragma once

#include <filesystem>
#include <string>

#include "slr/data.hpp"
#include "slr/grid.hpp"

namespace slr {

// Array files: an ASCII header line "SLR1 <rows> <cols> <domain>\n" followed
// by rows*cols little-endian float64 (re, im) pairs in row-major order.
void write_array(const std::filesystem::path& path, const ComplexImage& img);
ComplexImage read_array(const std::filesystem::path& path);

// Masks use the same layout in the fourier domain with values 0.0 / 1.0.
void write_mask(const std::filesystem::path& path, const SamplingMask& mask);
SamplingMask read_mask(const std::filesystem::path& path);

struct PngRange {
    double min = 0.0;
    double max = 0.0;
};

// 8-bit grayscale of |img|, mapped linearly from [min, max] to [0, 255].
PngRange write_png(const std::filesystem::path& path, const ComplexImage& img);

}  // namespace slr
