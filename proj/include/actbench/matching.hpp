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
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "actbench/action.hpp"
#include "actbench/episode.hpp"
#include "actbench/json_io.hpp"

namespace actbench {

enum class TextNormalization { exact, casefold_trim };

struct MatchConfig {
    double click_distance_threshold = 0.14;
    TextNormalization text_normalization = TextNormalization::casefold_trim;
    bool stop_state_strict = true;
};

// Throws ConfigError unless the threshold lies in (0, 1].
void check_match_config(const MatchConfig& config);

struct MatchResult {
    ActionCategory gold_category = ActionCategory::click;
    bool type_match = false;
    bool exact_match = false;
    friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

// Smallest-area element of `screen` whose box contains `p`; the first one
// listed wins among equal areas.
std::optional<std::size_t> containing_element(const Observation& screen, const Point& p);

std::string normalize_text(std::string_view text, TextNormalization mode);

// `gold_screen` is always the gold step's screen. A click matches when both
// points resolve to the same element, or lie within the distance threshold.
MatchResult match_action(const Action& pred, const Action& gold, const Observation& gold_screen,
                         const MatchConfig& config = {});

// Fraction of the episode completed before the first mismatch. Throws Error
// on an empty sequence.
double episode_goal_progress(std::span<const bool> step_matches);
double episode_goal_progress(const std::vector<bool>& step_matches);

struct StepVerdict {
    std::string episode_id;
    std::size_t step_index = 0;
    std::string prediction;
    bool hit = false;
    std::optional<MatchResult> match;  // absent when the prediction did not parse
    std::vector<std::string> diagnostics;
    friend bool operator==(const StepVerdict&, const StepVerdict&) = default;
};

using StepKey = std::pair<std::string, std::size_t>;

struct CategoryCounts {
    std::size_t steps = 0;
    std::size_t type_correct = 0;
    std::size_t match_correct = 0;
    friend bool operator==(const CategoryCounts&, const CategoryCounts&) = default;
};

struct MetricsReport {
    std::array<CategoryCounts, 5> per_category{};  // indexed by ActionCategory
    std::size_t episode_count = 0;
    std::size_t step_count = 0;
    std::size_t parsed_count = 0;
    // Percentages in [0, 100].
    double total_type = 0.0;
    double total_match = 0.0;
    double goal_progress = 0.0;
    double hit_rate = 0.0;

    [[nodiscard]] const CategoryCounts& of(ActionCategory category) const {
        return per_category[static_cast<std::size_t>(category)];
    }
    // Percentage of `category` steps matched, or of steps with the right type.
    [[nodiscard]] double match_accuracy(ActionCategory category) const;
    [[nodiscard]] double type_accuracy(ActionCategory category) const;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// Partial aggregation over any subset of verdicts. Accumulators built over
// the same episodes merge by adding counts; finish() checks that every step
// was seen exactly once.
class MetricsAccumulator {
public:
    explicit MetricsAccumulator(const std::vector<Episode>& episodes);

    void add(const StepVerdict& verdict);
    void merge(const MetricsAccumulator& other);

    // Throws VerdictSetError listing unknown, duplicate or missing steps.
    [[nodiscard]] MetricsReport finish() const;

    [[nodiscard]] std::vector<StepKey> missing_steps() const;

private:
    struct EpisodeProgress {
        std::size_t steps = 0;
        std::size_t first_error = 0;  // == steps while no mismatch seen
        std::set<std::size_t> seen;
    };

    const std::vector<Episode>* episodes_;
    std::unordered_map<std::string, std::size_t> episode_pos_;
    std::vector<EpisodeProgress> progress_;
    std::array<CategoryCounts, 5> per_category_{};
    std::size_t parsed_ = 0;
    std::vector<StepKey> unknown_;
    std::vector<StepKey> duplicates_;
};

MetricsReport aggregate(const std::vector<StepVerdict>& verdicts, const std::vector<Episode>& episodes);

Json verdict_to_json(const StepVerdict& verdict);
StepVerdict verdict_from_json(const Json& doc);

void write_verdicts(const std::filesystem::path& path, const std::vector<StepVerdict>& verdicts);
// One JSON object per line; blank lines are skipped. Throws Error on a bad line.
std::vector<StepVerdict> read_verdicts(const std::filesystem::path& path);

// Sorts by (episode_id, step_index).
void sort_verdicts(std::vector<StepVerdict>& verdicts);

Json report_to_json(const MetricsReport& report);

// Markdown table in the column order SCROLL, CLICK type, CLICK match,
// TYPE type, TYPE match, PRESS, STOP, Total type, Total match, GP, followed
// by a summary line with counts and the format hit rate.
std::string render_markdown(const MetricsReport& report);

}  // namespace actbench
