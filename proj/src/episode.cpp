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

#include "actbench/episode.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

#include "actbench/error.hpp"
#include "actbench/json_io.hpp"

namespace actbench {

namespace {

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char l, char r) {
               return std::tolower(static_cast<unsigned char>(l)) == std::tolower(static_cast<unsigned char>(r));
           });
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

bool fraction(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

std::string_view to_string(Subset subset) {
    switch (subset) {
        case Subset::general: return "general";
        case Subset::install: return "install";
        case Subset::googleapps: return "googleapps";
        case Subset::single: return "single";
        case Subset::webshopping: return "webshopping";
    }
    return "unknown";
}

std::optional<Subset> subset_from_string(std::string_view name) {
    for (const auto subset : kAllSubsets) {
        if (iequals(to_string(subset), name)) return subset;
    }
    return std::nullopt;
}

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::test: return "test";
        case Split::all: return "all";
    }
    return "unknown";
}

std::optional<Split> split_from_string(std::string_view name) {
    for (const auto split : {Split::train, Split::test, Split::all}) {
        if (iequals(to_string(split), name)) return split;
    }
    return std::nullopt;
}

std::string Violation::describe() const {
    return step ? "step " + std::to_string(*step) + ": " + message : message;
}

std::vector<Violation> validate_episode(const Episode& episode) {
    std::vector<Violation> out;
    if (blank(episode.instruction)) out.push_back({std::nullopt, "empty instruction"});
    if (episode.steps.empty()) out.push_back({std::nullopt, "episode has no steps"});

    for (std::size_t pos = 0; pos < episode.steps.size(); ++pos) {
        const Step& step = episode.steps[pos];
        if (step.index != pos) {
            out.push_back({step.index, "non-contiguous step index (expected " + std::to_string(pos) + ")"});
        }
        for (auto& message : action_violations(step.gold_action)) {
            out.push_back({step.index, "gold action: " + message});
        }
        if (std::holds_alternative<Stop>(step.gold_action) && pos + 1 != episode.steps.size()) {
            out.push_back({step.index, "non-terminal stop"});
        }

        const Observation& obs = step.observation;
        if (obs.width_px <= 0 || obs.height_px <= 0) {
            out.push_back({step.index, "observation size must be positive"});
        }
        std::unordered_set<std::int64_t> ids;
        for (const auto& element : obs.elements) {
            const auto& b = element.bbox;
            const std::string label = "element " + std::to_string(element.id);
            if (element.id < 0) out.push_back({step.index, label + ": negative id"});
            if (!ids.insert(element.id).second) out.push_back({step.index, label + ": duplicate id"});
            if (!(fraction(b.top) && fraction(b.left) && fraction(b.bottom) && fraction(b.right))) {
                out.push_back({step.index, label + ": bbox outside [0, 1]"});
            }
            if (b.top > b.bottom || b.left > b.right) {
                out.push_back({step.index, label + ": bbox corners out of order"});
            }
        }
    }
    return out;
}

DatasetStats split_stats(const std::vector<Episode>& episodes) {
    DatasetStats stats;
    for (const auto& episode : episodes) {
        auto& counts = stats.per_subset[static_cast<std::size_t>(episode.subset)];
        counts.episodes += 1;
        counts.screens += episode.steps.size();
    }
    for (const auto& counts : stats.per_subset) {
        stats.total.episodes += counts.episodes;
        stats.total.screens += counts.screens;
    }
    return stats;
}

const Episode* LoadedDataset::find(std::string_view episode_id) const {
    for (const auto& episode : episodes) {
        if (episode.episode_id == episode_id) return &episode;
    }
    return nullptr;
}

std::filesystem::path resolve_screenshot(const std::filesystem::path& root, std::string_view ref) {
    std::filesystem::path p{std::string(ref)};
    return p.is_absolute() ? p : root / p;
}

LoadedDataset load_dataset(const std::filesystem::path& root, Split split) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw DatasetError("dataset root not found: " + root.string());
    const fs::path manifest_path = root / kManifestName;
    if (!fs::is_regular_file(manifest_path)) throw DatasetError("missing manifest: " + manifest_path.string());

    Manifest manifest;
    try {
        manifest = manifest_from_json(read_json_file(manifest_path));
    } catch (const Error& e) {
        throw DatasetError(std::string("bad manifest: ") + e.what());
    }

    LoadedDataset dataset;
    dataset.root = root;
    std::set<std::string> seen_ids;
    for (const auto& entry : manifest.entries) {
        if (split != Split::all && entry.split != split) continue;
        Episode episode;
        try {
            episode = episode_from_json(read_json_file(root / entry.path));
        } catch (const Error& e) {
            dataset.report.excluded.push_back({entry.path, e.what()});
            continue;
        } catch (const std::exception& e) {
            dataset.report.excluded.push_back({entry.path, std::string("malformed episode: ") + e.what()});
            continue;
        }
        const auto violations = validate_episode(episode);
        if (!violations.empty()) {
            std::string reason;
            for (const auto& v : violations) {
                if (!reason.empty()) reason += "; ";
                reason += v.describe();
            }
            dataset.report.excluded.push_back({entry.path, reason});
            continue;
        }
        if (!seen_ids.insert(episode.episode_id).second) {
            dataset.report.excluded.push_back({entry.path, "duplicate episode_id " + episode.episode_id});
            continue;
        }
        for (const auto& step : episode.steps) {
            const auto& ref = step.observation.screenshot_ref;
            if (ref.empty() || !fs::exists(resolve_screenshot(root, ref))) {
                dataset.report.warnings.push_back(
                    {entry.path, "step " + std::to_string(step.index) + ": screenshot not found: " + ref});
            }
        }
        dataset.episodes.push_back(std::move(episode));
    }
    dataset.stats = split_stats(dataset.episodes);
    return dataset;
}

}  // namespace actbench
