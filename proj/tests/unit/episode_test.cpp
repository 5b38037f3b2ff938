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

#include <fstream>

#include <gtest/gtest.h>

#include "actbench/error.hpp"
#include "actbench/json_io.hpp"
#include "test_support.hpp"

namespace actbench {
namespace {

using testing::TempDir;
using testing::fixture_dir;

Step make_step(std::size_t index, Action action) {
    Step step;
    step.index = index;
    step.observation = {"screens/s" + std::to_string(index) + ".png", 100, 200, {}};
    step.gold_action = std::move(action);
    return step;
}

Episode make_episode(const std::string& id, Subset subset, std::size_t steps) {
    Episode e{id, "do the thing", subset, {}};
    for (std::size_t i = 0; i + 1 < steps; ++i) e.steps.push_back(make_step(i, Scroll{ScrollDirection::down}));
    if (steps > 0) e.steps.push_back(make_step(steps - 1, Stop{TaskState::complete}));
    return e;
}

TEST(ValidateEpisode, WellFormedHasNoViolations) { EXPECT_TRUE(validate_episode(make_episode("a", Subset::general, 3)).empty()); }

TEST(ValidateEpisode, ClickOutOfRangeNamesStep) {
    Episode e = make_episode("a", Subset::general, 3);
    e.steps[1].gold_action = Click{{1.3, 0.5}};
    const auto violations = validate_episode(e);
    ASSERT_EQ(violations.size(), 1u);
    EXPECT_EQ(violations[0].step, std::optional<std::size_t>(1));
    EXPECT_NE(violations[0].describe().find("step 1"), std::string::npos);
}

TEST(ValidateEpisode, NonTerminalStop) {
    Episode e = make_episode("a", Subset::general, 3);
    e.steps[0].gold_action = Stop{TaskState::impossible};
    e.steps[2].gold_action = Press{Button::home};
    const auto violations = validate_episode(e);
    ASSERT_EQ(violations.size(), 1u);
    EXPECT_EQ(violations[0].message, "non-terminal stop");
    EXPECT_EQ(violations[0].step, std::optional<std::size_t>(0));
}

TEST(ValidateEpisode, CollectsEveryViolation) {
    Episode e = make_episode("a", Subset::general, 3);
    e.instruction = "   ";
    e.steps[2].index = 5;
    e.steps[0].observation.width_px = 0;
    e.steps[1].observation.elements = {{-1, {0.1, 0.1, 0.2, 0.2}, {}, {}},
                                       {3, {0.5, 0.5, 0.4, 0.6}, {}, {}},
                                       {3, {0.0, 0.0, 1.2, 0.1}, {}, {}}};
    EXPECT_EQ(validate_episode(e).size(), 7u);
}

TEST(ValidateEpisode, EmptyEpisode) {
    Episode e{"a", "q", Subset::general, {}};
    ASSERT_EQ(validate_episode(e).size(), 1u);
}

TEST(SplitStats, CountsPerSubsetAndTotals) {
    const std::vector<Episode> eps = {make_episode("a", Subset::general, 2), make_episode("b", Subset::general, 3),
                                      make_episode("c", Subset::general, 4), make_episode("d", Subset::single, 1)};
    const auto stats = split_stats(eps);
    EXPECT_EQ(stats.of(Subset::general), (SubsetCounts{3, 9}));
    EXPECT_EQ(stats.of(Subset::single), (SubsetCounts{1, 1}));
    EXPECT_EQ(stats.total, (SubsetCounts{4, 10}));
}

TEST(SplitStats, EmptyIsZero) { EXPECT_EQ(split_stats({}), DatasetStats{}); }

TEST(SplitStats, TotalsAreSums) {
    std::vector<Episode> eps;
    std::size_t steps = 0;
    for (std::size_t i = 0; i < 25; ++i) {
        eps.push_back(make_episode("e" + std::to_string(i), kAllSubsets[i % 5], 1 + i % 7));
        steps += 1 + i % 7;
    }
    const auto stats = split_stats(eps);
    SubsetCounts sum;
    for (const auto& c : stats.per_subset) {
        sum.episodes += c.episodes;
        sum.screens += c.screens;
    }
    EXPECT_EQ(sum, stats.total);
    EXPECT_EQ(stats.total, (SubsetCounts{25, steps}));
}

TEST(LoadDataset, TwoEpisodesOfThreeSteps) {
    TempDir dir;
    const std::vector<Episode> eps = {make_episode("x", Subset::install, 3), make_episode("y", Subset::install, 3)};
    write_dataset(dir.path(), eps, {{{"x.json", Split::test}, {"y.json", Split::test}}});
    const auto data = load_dataset(dir.path(), Split::test);
    EXPECT_EQ(data.stats.total, (SubsetCounts{2, 6}));
    EXPECT_EQ(data.episodes, eps);
    EXPECT_TRUE(data.report.excluded.empty());
    EXPECT_EQ(data.report.warnings.size(), 6u);  // no screenshot files
}

TEST(LoadDataset, FixtureInManifestOrder) {
    const auto all = load_dataset(fixture_dir(), Split::all);
    ASSERT_EQ(all.episodes.size(), 10u);
    EXPECT_EQ(all.stats.total.screens, 30u);
    EXPECT_EQ(all.episodes.front().episode_id, "ep01");
    EXPECT_EQ(all.episodes.back().episode_id, "ep10");
    EXPECT_TRUE(all.report.excluded.empty());
    EXPECT_TRUE(all.report.warnings.empty());
    for (const auto& e : all.episodes) EXPECT_TRUE(validate_episode(e).empty());

    const auto test = load_dataset(fixture_dir(), Split::test);
    const auto train = load_dataset(fixture_dir(), Split::train);
    EXPECT_EQ(test.episodes.size() + train.episodes.size(), 10u);
    EXPECT_EQ(test.stats.total.screens + train.stats.total.screens, 30u);
    EXPECT_EQ(load_dataset(fixture_dir(), Split::all).episodes, all.episodes);
}

TEST(LoadDataset, MissingRootOrManifestIsFatal) {
    EXPECT_THROW(load_dataset("/nonexistent/actbench", Split::all), DatasetError);
    TempDir dir;
    EXPECT_THROW(load_dataset(dir.path(), Split::all), DatasetError);
}

TEST(LoadDataset, MalformedAndInvalidEpisodesAreExcluded) {
    TempDir dir;
    Episode bad = make_episode("bad", Subset::general, 2);
    bad.steps[0].gold_action = Stop{};
    write_dataset(dir.path(), {make_episode("ok", Subset::general, 2), bad, make_episode("ok", Subset::general, 1)},
                  {{{"ok.json", Split::train}, {"bad.json", Split::train}, {"dup.json", Split::train}}});
    const Manifest manifest{{{"ok.json", Split::train}, {"bad.json", Split::train}, {"dup.json", Split::train},
                             {"garbage.json", Split::train}, {"wiggle.json", Split::train},
                             {"absent.json", Split::train}}};
    write_json_file(dir.path() / kManifestName, manifest_to_json(manifest));
    std::ofstream(dir.path() / "garbage.json") << "{ not json";
    std::ofstream(dir.path() / "unlisted.json") << "{}";
    {
        Json doc = episode_to_json(make_episode("z", Subset::general, 1));
        doc["steps"][0]["gold_action"] = "wiggle";
        write_json_file(dir.path() / "wiggle.json", doc);
    }
    const auto data = load_dataset(dir.path(), Split::train);
    ASSERT_EQ(data.episodes.size(), 1u);
    EXPECT_EQ(data.episodes[0].episode_id, "ok");
    EXPECT_EQ(data.report.excluded.size(), 5u);
    for (const auto& issue : data.report.excluded) EXPECT_FALSE(issue.reason.empty()) << issue.path;
}

TEST(JsonIo, EpisodeRoundTrip) {
    for (const auto& e : load_dataset(fixture_dir(), Split::all).episodes) {
        EXPECT_EQ(episode_from_json(episode_to_json(e)), e) << e.episode_id;
    }
}

TEST(JsonIo, ReloadIsIdentity) {
    TempDir dir;
    const auto first = load_dataset(fixture_dir(), Split::all);
    Manifest manifest;
    for (const auto& e : first.episodes) manifest.entries.push_back({"episodes/" + e.episode_id + ".json", Split::test});
    write_dataset(dir.path(), first.episodes, manifest);
    const auto second = load_dataset(dir.path(), Split::all);
    EXPECT_EQ(second.episodes, first.episodes);
    EXPECT_EQ(second.stats, first.stats);
}

TEST(JsonIo, ManifestRejectsUnknownSplit) {
    EXPECT_THROW(manifest_from_json(Json::parse(R"({"episodes":[{"path":"a.json","split":"dev"}]})")), Error);
}

TEST(ResolveScreenshot, RelativeAndAbsolute) {
    EXPECT_EQ(resolve_screenshot("/data", "screens/a.png"), std::filesystem::path("/data/screens/a.png"));
    EXPECT_EQ(resolve_screenshot("/data", "/abs/a.png"), std::filesystem::path("/abs/a.png"));
}

}  // namespace
}  // namespace actbench
