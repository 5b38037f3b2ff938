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

#include "actbench/matching.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "actbench/error.hpp"
#include "test_support.hpp"

namespace actbench {
namespace {

using testing::TempDir;

Observation screen(std::vector<UiElement> elements = {}) { return {"s.png", 100, 200, std::move(elements)}; }

long double oracle_distance(Point a, Point b) {
    const long double dy = static_cast<long double>(a.y) - b.y;
    const long double dx = static_cast<long double>(a.x) - b.x;
    return std::sqrt(dy * dy + dx * dx);
}

TEST(MatchAction, NearbyClickMatches) {
    const Point pred{0.50, 0.50};
    const Point gold{0.52, 0.51};
    EXPECT_LT(oracle_distance(pred, gold), 0.0224L + 1e-4L);
    const auto r = match_action(Click{pred}, Click{gold}, screen());
    EXPECT_TRUE(r.type_match);
    EXPECT_TRUE(r.exact_match);
    EXPECT_EQ(r.gold_category, ActionCategory::click);
}

TEST(MatchAction, FarClickDoesNotMatch) {
    const Point pred{0.10, 0.10};
    const Point gold{0.90, 0.90};
    EXPECT_GT(oracle_distance(pred, gold), 1.13L);
    const auto r = match_action(Click{pred}, Click{gold}, screen());
    EXPECT_TRUE(r.type_match);
    EXPECT_FALSE(r.exact_match);
}

TEST(MatchAction, CategoryMismatch) {
    const auto r = match_action(Scroll{ScrollDirection::up}, Click{{0.5, 0.5}}, screen());
    EXPECT_FALSE(r.type_match);
    EXPECT_FALSE(r.exact_match);
}

TEST(MatchAction, TypeTextNormalization) {
    EXPECT_TRUE(match_action(TypeText{"OK "}, TypeText{"ok"}, screen()).exact_match);
    MatchConfig exact;
    exact.text_normalization = TextNormalization::exact;
    EXPECT_FALSE(match_action(TypeText{"OK "}, TypeText{"ok"}, screen(), exact).exact_match);
    EXPECT_TRUE(match_action(TypeText{"ok"}, TypeText{"ok"}, screen(), exact).exact_match);
}

TEST(MatchAction, ClickThresholdBoundary) {
    const Point gold{0.5, 0.5};
    EXPECT_TRUE(match_action(Click{{0.5 + 0.1399, 0.5}}, Click{gold}, screen()).exact_match);
    EXPECT_FALSE(match_action(Click{{0.5 + 0.1401, 0.5}}, Click{gold}, screen()).exact_match);
    EXPECT_TRUE(match_action(Click{{0.5, 0.5 - 0.1399}}, Click{gold}, screen()).exact_match);
    EXPECT_FALSE(match_action(Click{{0.5, 0.5 - 0.1401}}, Click{gold}, screen()).exact_match);
}

TEST(MatchAction, SameElementMatchesAtAnyDistance) {
    const auto obs = screen({{7, {0.0, 0.0, 1.0, 1.0}, {}, {}}});
    EXPECT_TRUE(match_action(Click{{0.01, 0.01}}, Click{{0.99, 0.99}}, obs).exact_match);
}

TEST(MatchAction, NestedElementsResolveToSmallest) {
    const auto obs = screen({{1, {0.0, 0.0, 1.0, 1.0}, {}, {}}, {2, {0.0, 0.0, 0.3, 0.3}, {}, {}}});
    // Both points lie in the big box, but the prediction resolves to the small one.
    EXPECT_FALSE(match_action(Click{{0.1, 0.1}}, Click{{0.9, 0.9}}, obs).exact_match);
    EXPECT_TRUE(match_action(Click{{0.05, 0.05}}, Click{{0.25, 0.25}}, obs).exact_match);
    EXPECT_EQ(containing_element(obs, {0.1, 0.1}), std::optional<std::size_t>(1));
    EXPECT_EQ(containing_element(obs, {0.9, 0.9}), std::optional<std::size_t>(0));
    EXPECT_EQ(containing_element(screen(), {0.9, 0.9}), std::nullopt);
}

TEST(MatchAction, ElementRuleUsesGoldScreenOnly) {
    const auto with_box = screen({{1, {0.0, 0.0, 1.0, 0.5}, {}, {}}});
    EXPECT_TRUE(match_action(Click{{0.1, 0.1}}, Click{{0.9, 0.4}}, with_box).exact_match);
    EXPECT_FALSE(match_action(Click{{0.1, 0.1}}, Click{{0.9, 0.4}}, screen()).exact_match);
}

TEST(MatchAction, StopStateStrictness) {
    EXPECT_FALSE(match_action(Stop{TaskState::impossible}, Stop{TaskState::complete}, screen()).exact_match);
    MatchConfig loose;
    loose.stop_state_strict = false;
    EXPECT_TRUE(match_action(Stop{TaskState::impossible}, Stop{TaskState::complete}, screen(), loose).exact_match);
}

TEST(MatchAction, ScrollAndPressDetails) {
    EXPECT_TRUE(match_action(Scroll{ScrollDirection::left}, Scroll{ScrollDirection::left}, screen()).exact_match);
    const auto r = match_action(Scroll{ScrollDirection::left}, Scroll{ScrollDirection::right}, screen());
    EXPECT_TRUE(r.type_match);
    EXPECT_FALSE(r.exact_match);
    EXPECT_FALSE(match_action(Press{Button::back}, Press{Button::home}, screen()).exact_match);
}

Action random_action(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kind(0, 4);
    std::uniform_int_distribution<int> small(0, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (kind(rng)) {
        case 0: return Click{{unit(rng), unit(rng)}};
        case 1: return Scroll{static_cast<ScrollDirection>(small(rng))};
        case 2: return TypeText{small(rng) % 2 ? "Abc" : " abc"};
        case 3: return Press{static_cast<Button>(small(rng) % 3)};
        default: return Stop{static_cast<TaskState>(small(rng) % 2)};
    }
}

TEST(MatchAction, ExactImpliesTypeAndThresholdMonotone) {
    std::mt19937_64 rng(5);
    const auto obs = screen({{1, {0.2, 0.2, 0.4, 0.6}, {}, {}}, {2, {0.5, 0.1, 0.9, 0.3}, {}, {}}});
    for (int i = 0; i < 5000; ++i) {
        const Action pred = random_action(rng);
        const Action gold = random_action(rng);
        bool previous = false;
        for (const double tau : {0.01, 0.05, 0.14, 0.3, 1.0}) {
            MatchConfig cfg;
            cfg.click_distance_threshold = tau;
            const auto r = match_action(pred, gold, obs, cfg);
            ASSERT_TRUE(!r.exact_match || r.type_match);
            ASSERT_EQ(r.type_match, category_of(pred) == category_of(gold));
            ASSERT_TRUE(!previous || r.exact_match) << "match lost when raising the threshold";
            previous = r.exact_match;
        }
    }
}

TEST(MatchConfig, ThresholdRange) {
    MatchConfig cfg;
    EXPECT_NO_THROW(check_match_config(cfg));
    cfg.click_distance_threshold = 0.0;
    EXPECT_THROW(check_match_config(cfg), ConfigError);
    cfg.click_distance_threshold = 1.0;
    EXPECT_NO_THROW(check_match_config(cfg));
    cfg.click_distance_threshold = 1.01;
    EXPECT_THROW(check_match_config(cfg), ConfigError);
}

TEST(GoalProgress, Examples) {
    EXPECT_DOUBLE_EQ(episode_goal_progress(std::vector<bool>{true, true, false, true}), 0.5);
    EXPECT_DOUBLE_EQ(episode_goal_progress(std::vector<bool>{true, true, true}), 1.0);
    EXPECT_DOUBLE_EQ(episode_goal_progress(std::vector<bool>{false, true}), 0.0);
    EXPECT_THROW(episode_goal_progress(std::vector<bool>{}), Error);
}

double first_false_scan(unsigned bits, unsigned n) {
    for (unsigned i = 0; i < n; ++i) {
        if (((bits >> i) & 1u) == 0) return static_cast<double>(i) / n;
    }
    return 1.0;
}

TEST(GoalProgress, ExhaustiveUpToTwelve) {
    std::size_t cases = 0;
    for (unsigned n = 1; n <= 12; ++n) {
        for (unsigned bits = 0; bits < (1u << n); ++bits) {
            std::vector<bool> seq(n);
            for (unsigned i = 0; i < n; ++i) seq[i] = (bits >> i) & 1u;
            ASSERT_EQ(episode_goal_progress(seq), first_false_scan(bits, n));
            ++cases;
        }
    }
    EXPECT_EQ(cases, 8190u);
}

Episode clicks_episode(const std::string& id, std::size_t steps) {
    Episode e{id, "q", Subset::general, {}};
    for (std::size_t i = 0; i < steps; ++i) {
        e.steps.push_back({i, screen(), Click{{0.5, 0.5}}, {}});
    }
    return e;
}

StepVerdict verdict(const std::string& id, std::size_t step, bool exact, bool hit = true) {
    StepVerdict v{id, step, hit ? "click (0.5000, 0.5000)" : "junk", hit, std::nullopt, {}};
    if (hit) v.match = MatchResult{ActionCategory::click, true, exact};
    return v;
}

TEST(Aggregate, HandCountedFixture) {
    const std::vector<Episode> eps = {clicks_episode("a", 2), clicks_episode("b", 2)};
    const auto report = aggregate(
        {verdict("a", 0, true), verdict("a", 1, true), verdict("b", 0, true), verdict("b", 1, false)}, eps);
    EXPECT_DOUBLE_EQ(report.total_match, 75.0);
    EXPECT_DOUBLE_EQ(report.goal_progress, 75.0);
    EXPECT_DOUBLE_EQ(report.total_type, 100.0);
    EXPECT_DOUBLE_EQ(report.hit_rate, 100.0);
    EXPECT_EQ(report.of(ActionCategory::click).steps, 4u);
}

TEST(Aggregate, ParseMissCountsAsWrong) {
    const std::vector<Episode> eps = {clicks_episode("a", 2)};
    const auto report = aggregate({verdict("a", 0, true), verdict("a", 1, false, false)}, eps);
    EXPECT_DOUBLE_EQ(report.hit_rate, 50.0);
    EXPECT_DOUBLE_EQ(report.total_type, 50.0);
    EXPECT_DOUBLE_EQ(report.total_match, 50.0);
    EXPECT_DOUBLE_EQ(report.goal_progress, 50.0);
}

TEST(Aggregate, RejectsMissingDuplicateAndUnknown) {
    const std::vector<Episode> eps = {clicks_episode("a", 2)};
    EXPECT_THROW(aggregate({verdict("a", 0, true)}, eps), VerdictSetError);
    EXPECT_THROW(aggregate({verdict("a", 0, true), verdict("a", 0, true), verdict("a", 1, true)}, eps),
                 VerdictSetError);
    EXPECT_THROW(aggregate({verdict("a", 0, true), verdict("a", 1, true), verdict("zz", 0, true)}, eps),
                 VerdictSetError);
    try {
        aggregate({verdict("a", 1, true)}, eps);
        FAIL();
    } catch (const VerdictSetError& e) {
        EXPECT_NE(std::string(e.what()).find("a#0"), std::string::npos) << e.what();
    }
}

TEST(Aggregate, MergeEqualsSinglePass) {
    std::vector<Episode> eps;
    std::vector<StepVerdict> all;
    std::mt19937_64 rng(3);
    for (int e = 0; e < 12; ++e) {
        eps.push_back(clicks_episode("e" + std::to_string(e), 1 + e % 5));
        for (std::size_t s = 0; s < eps.back().steps.size(); ++s) {
            all.push_back(verdict(eps.back().episode_id, s, rng() % 3 != 0, rng() % 7 != 0));
        }
    }
    const auto single = aggregate(all, eps);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<MetricsAccumulator> parts(3, MetricsAccumulator(eps));
        for (const auto& v : all) parts[rng() % 3].add(v);
        MetricsAccumulator left(eps);
        left.merge(parts[2]);
        left.merge(parts[0]);
        left.merge(parts[1]);
        EXPECT_EQ(left.finish(), single);
    }
}

TEST(Aggregate, AccuraciesBounded) {
    std::vector<Episode> eps = {clicks_episode("a", 3)};
    const auto report = aggregate({verdict("a", 0, false), verdict("a", 1, true), verdict("a", 2, false)}, eps);
    for (const auto c : kAllCategories) {
        EXPECT_GE(report.match_accuracy(c), 0.0);
        EXPECT_LE(report.match_accuracy(c), 100.0);
    }
    EXPECT_NEAR(report.total_match, 100.0 / 3.0, 1e-9);
    EXPECT_DOUBLE_EQ(report.goal_progress, 0.0);
}

TEST(Verdicts, JsonLinesRoundTrip) {
    TempDir dir;
    std::vector<StepVerdict> vs = {verdict("a", 0, true), verdict("a", 1, false, false)};
    vs[1].diagnostics = {"no recognizable action found"};
    vs[1].prediction = "line\nbreak \"quoted\"";
    write_verdicts(dir.path() / "v.jsonl", vs);
    EXPECT_EQ(read_verdicts(dir.path() / "v.jsonl"), vs);
}

TEST(Report, MarkdownColumnOrder) {
    const std::vector<Episode> eps = {clicks_episode("a", 2)};
    const auto md = render_markdown(aggregate({verdict("a", 0, true), verdict("a", 1, false)}, eps));
    const std::string header =
        "| SCROLL | CLICK type | CLICK match | TYPE type | TYPE match | PRESS | STOP | Total type | Total match | GP |";
    EXPECT_EQ(md.substr(0, header.size()), header);
    EXPECT_NE(md.find("| - | 100.00 | 50.00 | - | - | - | - | 100.00 | 50.00 | 50.00 |"), std::string::npos) << md;
}

TEST(Report, JsonFields) {
    const std::vector<Episode> eps = {clicks_episode("a", 1)};
    const Json doc = report_to_json(aggregate({verdict("a", 0, true)}, eps));
    EXPECT_EQ(doc.at("steps"), 1);
    EXPECT_EQ(doc.at("categories").at("click").at("match"), 100.0);
    EXPECT_EQ(doc.at("goal_progress"), 100.0);
    EXPECT_EQ(doc.at("format_hit").at("rate"), 100.0);
}

}  // namespace
}  // namespace actbench
