/*
 * Copyright (C) 2026 The actbench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "actbench/episode.hpp"

namespace actbench {

// 8-bit RGB image, rows top to bottom, pixels interleaved.
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Raster() = default;
    Raster(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill) {}

    [[nodiscard]] const std::uint8_t* at(int x, int y) const {
        return pixels.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
    }
    friend bool operator==(const Raster&, const Raster&) = default;
};

inline constexpr int kSomBoxThickness = 3;

// Draws every element's box (3 px outline) with its id on a filled label at
// the box's top-left corner. Ids are the same as in render_textual_ui.
// Throws Error when the raster size differs from the observation size.
Raster render_som_overlay(const Observation& obs, const Raster& image);

// PNG/JPEG via OpenCV. Throws Error on failure.
Raster read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Raster& image);

}  // namespace actbench
