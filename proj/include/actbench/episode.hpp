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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "actbench/action.hpp"

namespace actbench {

// Bounding box as fractions of the screen, (top, left, bottom, right).
struct BoundingBox {
    double top = 0.0;
    double left = 0.0;
    double bottom = 0.0;
    double right = 0.0;

    [[nodiscard]] bool contains(const Point& p) const {
        return p.y >= top && p.y <= bottom && p.x >= left && p.x <= right;
    }
    [[nodiscard]] double area() const { return (bottom - top) * (right - left); }
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct UiElement {
    std::int64_t id = 0;
    BoundingBox bbox;
    std::optional<std::string> text;
    std::optional<std::string> elem_type;
    friend bool operator==(const UiElement&, const UiElement&) = default;
};

struct Observation {
    std::string screenshot_ref;
    int width_px = 0;
    int height_px = 0;
    std::vector<UiElement> elements;
    friend bool operator==(const Observation&, const Observation&) = default;
};

// Semantic annotations of one step. action_result describes what the step's
// gold action led to, so it is absent on the last step of an episode.
struct CoatAnnotation {
    std::optional<std::string> screen_description;
    std::optional<std::string> action_think;
    std::optional<std::string> action_description;
    std::optional<std::string> action_result;
    friend bool operator==(const CoatAnnotation&, const CoatAnnotation&) = default;
};

struct Step {
    std::size_t index = 0;
    Observation observation;
    Action gold_action;
    CoatAnnotation coat;
    friend bool operator==(const Step&, const Step&) = default;
};

enum class Subset { general, install, googleapps, single, webshopping };

inline constexpr std::array<Subset, 5> kAllSubsets = {Subset::general, Subset::install, Subset::googleapps,
                                                      Subset::single, Subset::webshopping};

std::string_view to_string(Subset subset);
// Case-insensitive; nullopt for anything outside the five subsets.
std::optional<Subset> subset_from_string(std::string_view name);

struct Episode {
    std::string episode_id;
    std::string instruction;
    Subset subset = Subset::general;
    std::vector<Step> steps;
    friend bool operator==(const Episode&, const Episode&) = default;
};

struct Violation {
    std::optional<std::size_t> step;  // nullopt for episode-level problems
    std::string message;

    [[nodiscard]] std::string describe() const;
    friend bool operator==(const Violation&, const Violation&) = default;
};

// Every invariant violation of the episode; empty means valid.
std::vector<Violation> validate_episode(const Episode& episode);

struct SubsetCounts {
    std::size_t episodes = 0;
    std::size_t screens = 0;
    friend bool operator==(const SubsetCounts&, const SubsetCounts&) = default;
};

struct DatasetStats {
    std::array<SubsetCounts, kAllSubsets.size()> per_subset{};
    SubsetCounts total;

    [[nodiscard]] const SubsetCounts& of(Subset subset) const {
        return per_subset[static_cast<std::size_t>(subset)];
    }
    friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

// Every step counts as one screen, terminal stop steps included.
DatasetStats split_stats(const std::vector<Episode>& episodes);

enum class Split { train, test, all };

std::string_view to_string(Split split);
std::optional<Split> split_from_string(std::string_view name);

struct LoadIssue {
    std::string path;  // manifest-relative episode path
    std::string reason;
};

struct LoadReport {
    std::vector<LoadIssue> excluded;
    std::vector<LoadIssue> warnings;
};

struct LoadedDataset {
    std::filesystem::path root;
    std::vector<Episode> episodes;  // manifest order
    DatasetStats stats;
    LoadReport report;

    [[nodiscard]] const Episode* find(std::string_view episode_id) const;
};

inline constexpr std::string_view kManifestName = "manifest.json";

// Throws DatasetError when the root or manifest is missing or unreadable.
// Malformed or invalid episodes are left out and listed in the report;
// missing screenshot files only produce warnings.
LoadedDataset load_dataset(const std::filesystem::path& root, Split split);

// Screenshot references are resolved against the dataset root unless absolute.
std::filesystem::path resolve_screenshot(const std::filesystem::path& root, std::string_view ref);

}  // namespace actbench
