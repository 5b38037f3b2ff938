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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace actbench {

// Relative screen coordinate. Origin is the top-left corner, (1, 1) the
// bottom-right one. Stored in (y, x) order, the order actions are written in.
struct Point {
    double y = 0.0;
    double x = 0.0;

    [[nodiscard]] bool in_range() const { return y >= 0.0 && y <= 1.0 && x >= 0.0 && x <= 1.0; }
    friend bool operator==(const Point&, const Point&) = default;
};

enum class CoordinatePolicy { reject, clamp };

// Checked construction: out-of-range coordinates are rejected (nullopt) or
// clamped into [0, 1]. NaN is always rejected.
std::optional<Point> make_point(double y, double x, CoordinatePolicy policy = CoordinatePolicy::reject);

enum class ScrollDirection { up, down, left, right };
enum class Button { back, home, enter };
enum class TaskState { complete, impossible };

struct Click {
    Point point;
    friend bool operator==(const Click&, const Click&) = default;
};
struct Scroll {
    ScrollDirection direction = ScrollDirection::up;
    friend bool operator==(const Scroll&, const Scroll&) = default;
};
struct TypeText {
    std::string text;
    friend bool operator==(const TypeText&, const TypeText&) = default;
};
struct Press {
    Button button = Button::back;
    friend bool operator==(const Press&, const Press&) = default;
};
struct Stop {
    TaskState state = TaskState::complete;
    friend bool operator==(const Stop&, const Stop&) = default;
};

using Action = std::variant<Click, Scroll, TypeText, Press, Stop>;

enum class ActionCategory { click, scroll, type, press, stop };

inline constexpr ActionCategory kAllCategories[] = {ActionCategory::click, ActionCategory::scroll,
                                                    ActionCategory::type, ActionCategory::press,
                                                    ActionCategory::stop};

ActionCategory category_of(const Action& action);

std::string_view to_string(ActionCategory category);
std::string_view to_string(ScrollDirection direction);
std::string_view to_string(Button button);
// "completed" / "impossible", the words used in the stop grammar.
std::string_view to_string(TaskState state);

std::optional<ActionCategory> category_from_string(std::string_view name);

struct ActionRules {
    bool allow_empty_type = false;
};

// Empty when the action honours every invariant (coordinates in range,
// non-empty text unless allowed).
std::vector<std::string> action_violations(const Action& action, const ActionRules& rules = {});

struct Diagnostic {
    std::size_t position = 0;
    std::string message;
    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

// `hit` is true exactly when `parsed` holds an action. Diagnostics can be
// present on hits too (notes about how lenient input was read).
struct ParseOutcome {
    std::optional<Action> parsed;
    bool hit = false;
    std::vector<Diagnostic> diagnostics;
};

enum class ParseMode { strict, lenient };

struct ParseOptions {
    CoordinatePolicy coordinates = CoordinatePolicy::reject;
    bool allow_empty_type = false;
};

// Total: never throws on any input.
//
// Strict mode accepts exactly one canonical action, keywords case-insensitive
// and whitespace flexible. Lenient mode falls back to scanning for the first
// recognizable action anywhere in the text, looking after the last
// "Action:" marker before searching the whole text.
ParseOutcome parse_action(std::string_view text, ParseMode mode, const ParseOptions& options = {});

// Canonical text form. Coordinates carry exactly four decimals; typed text is
// double-quoted with backslash escapes for '"', '\\', newline, CR and tab.
std::string serialize_action(const Action& action);

struct DualPointGesture {
    Point touch;
    Point lift;
};

inline constexpr double kDefaultTapThreshold = 0.04;

// Taps (displacement <= threshold, inclusive) become a Click at the touch
// point. Anything longer is a Scroll named after the finger motion along the
// dominant axis; an exact tie counts as vertical. Throws Error unless the
// threshold is positive.
Action dual_point_to_action(const DualPointGesture& gesture, double tap_threshold = kDefaultTapThreshold);

}  // namespace actbench
