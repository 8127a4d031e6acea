/*
Copyright 2026 The stereopipe Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#ifndef STEREOPIPE_IO_HPP
#define STEREOPIPE_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "stereopipe/core.hpp"

namespace stereopipe::evalio {

// Single-channel PFM ("Pf"). Rows are stored bottom-to-top; a negative scale
// marks little-endian data. Invalid pixels are written as +inf and any
// non-finite value reads back as invalid.
void write_pfm(const DisparityField &field, const std::string &path);
DisparityField read_pfm(const std::string &path);

// KITTI 16-bit PNG: disparity = value / 256, 0 = invalid. Values that do not
// encode to [1, 65535] are rejected on write.
void write_kitti_png(const DisparityField &field, const std::string &path);
DisparityField read_kitti_png(const std::string &path);
bool kitti_representable(const DisparityField &field);

/// PNG (8-bit gray/RGB/RGBA), binary PGM (P5) or PPM (P6), by extension/magic.
Image read_image(const std::string &path);
/// Writes PNG, or PGM/PPM when the extension says so. Values are rounded and
/// clamped to [0, 255].
void write_image(const Image &image, const std::string &path);

/// 8-bit mask PNG: nonzero = set.
void write_mask_png(const Grid2D<std::uint8_t> &mask, const std::string &path);
Grid2D<std::uint8_t> read_mask_png(const std::string &path);

}

#endif
