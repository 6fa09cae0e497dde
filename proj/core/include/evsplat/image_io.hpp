#pragma once

#include "evsplat/image.hpp"

#include <string>

namespace evsplat {

// 8-bit PNG with the display curve applied on write and inverted on read.
// The image must have 1 or 3 channels and hold linear values.
void write_png(const std::string& path, const Image& linear);
Image read_png(const std::string& path);

// Lossless f32 dump of the raw values (no transfer curve). Layout is
// documented in docs/file_formats.md.
void write_raw(const std::string& path, const Image& img);
Image read_raw(const std::string& path);

}  // namespace evsplat
