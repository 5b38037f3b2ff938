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

#include "actbench/overlay.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "actbench/error.hpp"

namespace actbench {

namespace {

// RGB; none of them pure black or white.
constexpr std::array<std::array<std::uint8_t, 3>, 8> kPalette = {{
    {230, 25, 75},
    {60, 180, 75},
    {0, 130, 200},
    {245, 130, 48},
    {145, 30, 180},
    {70, 200, 200},
    {240, 50, 230},
    {128, 128, 0},
}};

int to_pixel(double fraction, int extent) {
    const int px = static_cast<int>(std::lround(fraction * static_cast<double>(extent - 1)));
    return std::clamp(px, 0, extent - 1);
}

}  // namespace

Raster render_som_overlay(const Observation& obs, const Raster& image) {
    if (image.width != obs.width_px || image.height != obs.height_px) {
        throw Error("overlay: image is " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                    " but observation is " + std::to_string(obs.width_px) + "x" + std::to_string(obs.height_px));
    }
    Raster out = image;
    if (obs.elements.empty()) return out;

    cv::Mat canvas(out.height, out.width, CV_8UC3, out.pixels.data());
    const int font = cv::FONT_HERSHEY_SIMPLEX;
    const double scale = std::clamp(static_cast<double>(std::min(out.width, out.height)) / 800.0, 0.35, 1.2);

    for (std::size_t i = 0; i < obs.elements.size(); ++i) {
        const auto& element = obs.elements[i];
        const auto& rgb = kPalette[static_cast<std::size_t>(element.id) % kPalette.size()];
        const cv::Scalar color(rgb[0], rgb[1], rgb[2]);  // canvas holds RGB, so channel order is literal

        const cv::Point top_left(to_pixel(element.bbox.left, out.width), to_pixel(element.bbox.top, out.height));
        const cv::Point bottom_right(to_pixel(element.bbox.right, out.width), to_pixel(element.bbox.bottom, out.height));
        cv::rectangle(canvas, top_left, bottom_right, color, kSomBoxThickness, cv::LINE_8);

        const std::string label = std::to_string(element.id);
        int baseline = 0;
        const cv::Size text = cv::getTextSize(label, font, scale, 1, &baseline);
        const int pad = 2;
        cv::Point label_tl = top_left;
        cv::Point label_br(label_tl.x + text.width + 2 * pad, label_tl.y + text.height + baseline + 2 * pad);
        label_br.x = std::min(label_br.x, out.width - 1);
        label_br.y = std::min(label_br.y, out.height - 1);
        cv::rectangle(canvas, label_tl, label_br, color, cv::FILLED, cv::LINE_8);
        cv::putText(canvas, label, cv::Point(label_tl.x + pad, label_tl.y + pad + text.height), font, scale,
                    cv::Scalar(255, 255, 255), 1, cv::LINE_8);
    }
    return out;
}

Raster read_image(const std::filesystem::path& path) {
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw Error("cannot read image " + path.string());
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    Raster out(rgb.cols, rgb.rows);
    for (int y = 0; y < rgb.rows; ++y) {
        std::copy_n(rgb.ptr<std::uint8_t>(y), static_cast<std::size_t>(rgb.cols) * 3,
                    out.pixels.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(rgb.cols) * 3);
    }
    return out;
}

void write_image(const std::filesystem::path& path, const Raster& image) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    cv::Mat rgb(image.height, image.width, CV_8UC3, const_cast<std::uint8_t*>(image.pixels.data()));
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    if (!cv::imwrite(path.string(), bgr)) throw Error("cannot write image " + path.string());
}

}  // namespace actbench
