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

#include "actbench/action.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "actbench/error.hpp"

namespace actbench {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           u >= 0x80;
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

struct Failure {
    std::size_t position;
    std::string message;
};

// Recursive-descent scanner over one candidate position. Every production
// either returns an Action with the end offset, or records why it failed.
class Scanner {
public:
    Scanner(std::string_view text, std::size_t pos, bool lenient, const ParseOptions& options)
        : text_(text), pos_(pos), lenient_(lenient), options_(options) {}

    std::optional<Action> action() {
        const std::size_t start = pos_;
        if (keyword("click")) return click();
        pos_ = start;
        if (keyword("scroll")) return scroll();
        pos_ = start;
        if (keyword("type")) return type_text();
        pos_ = start;
        if (keyword("press")) return press();
        pos_ = start;
        if (keyword("stop")) return stop();
        pos_ = start;
        fail("expected one of click, scroll, type, press, stop");
        return std::nullopt;
    }

    void skip_space() {
        while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
    }

    [[nodiscard]] bool at_end() const { return pos_ >= text_.size(); }
    [[nodiscard]] std::size_t position() const { return pos_; }
    [[nodiscard]] const std::optional<Failure>& failure() const { return failure_; }
    // True once a keyword was recognized, i.e. the failure concerns a payload.
    [[nodiscard]] bool committed() const { return committed_; }

    void fail(std::string message) {
        if (!failure_) failure_ = Failure{pos_, std::move(message)};
    }

private:
    // Case-insensitive word match followed by a word boundary.
    bool keyword(std::string_view word) {
        if (text_.size() - pos_ < word.size()) return false;
        for (std::size_t i = 0; i < word.size(); ++i) {
            if (lower(text_[pos_ + i]) != word[i]) return false;
        }
        const std::size_t end = pos_ + word.size();
        if (end < text_.size() && is_word_char(text_[end]) && is_word_char(word.back())) return false;
        pos_ = end;
        return true;
    }

    bool require_space() {
        if (pos_ < text_.size() && is_space(text_[pos_])) {
            skip_space();
            return true;
        }
        fail("expected whitespace");
        return false;
    }

    bool literal(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::optional<double> number() {
        const std::size_t start = pos_;
        std::size_t i = pos_;
        std::size_t digits = 0;
        if (i < text_.size() && text_[i] == '-') ++i;
        while (i < text_.size() && text_[i] >= '0' && text_[i] <= '9') {
            ++i;
            ++digits;
        }
        if (i < text_.size() && text_[i] == '.') {
            ++i;
            while (i < text_.size() && text_[i] >= '0' && text_[i] <= '9') {
                ++i;
                ++digits;
            }
        }
        if (digits == 0) {
            fail("expected a decimal number");
            return std::nullopt;
        }
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + i, value);
        if (ec != std::errc{} || ptr != text_.data() + i) {
            fail("malformed number");
            return std::nullopt;
        }
        pos_ = i;
        return value;
    }

    std::optional<Action> click() {
        committed_ = true;
        skip_space();
        char closer = ')';
        if (literal('(')) {
            closer = ')';
        } else if (lenient_ && literal('[')) {
            closer = ']';
        } else {
            fail("expected '(' after click");
            return std::nullopt;
        }
        skip_space();
        const std::size_t coord_pos = pos_;
        const auto y = number();
        if (!y) return std::nullopt;
        skip_space();
        if (!literal(',')) {
            fail("expected ',' between coordinates");
            return std::nullopt;
        }
        skip_space();
        const auto x = number();
        if (!x) return std::nullopt;
        skip_space();
        if (!literal(closer)) {
            fail(std::string("expected '") + closer + "' after coordinates");
            return std::nullopt;
        }
        const auto point = make_point(*y, *x, options_.coordinates);
        if (!point) {
            failure_ = Failure{coord_pos, "coordinate out of range [0, 1]"};
            return std::nullopt;
        }
        return Click{*point};
    }

    std::optional<Action> scroll() {
        committed_ = true;
        if (!require_space()) return std::nullopt;
        if (keyword("up")) return Scroll{ScrollDirection::up};
        if (keyword("down")) return Scroll{ScrollDirection::down};
        if (keyword("left")) return Scroll{ScrollDirection::left};
        if (keyword("right")) return Scroll{ScrollDirection::right};
        fail("expected scroll direction up, down, left or right");
        return std::nullopt;
    }

    std::optional<Action> press() {
        committed_ = true;
        if (!require_space()) return std::nullopt;
        if (lenient_) {
            const std::size_t save = pos_;
            if (!(keyword("the") && require_space())) {
                pos_ = save;
                failure_.reset();
            }
        }
        if (keyword("back")) return Press{Button::back};
        if (keyword("home")) return Press{Button::home};
        if (keyword("enter")) return Press{Button::enter};
        fail("expected button back, home or enter");
        return std::nullopt;
    }

    std::optional<Action> stop() {
        committed_ = true;
        for (std::string_view word : {"and", "set", "the", "query", "as"}) {
            if (!require_space()) return std::nullopt;
            if (!keyword(word)) {
                fail(std::string("expected '") + std::string(word) + "' in stop action");
                return std::nullopt;
            }
        }
        if (!require_space()) return std::nullopt;
        if (keyword("completed")) return Stop{TaskState::complete};
        if (keyword("impossible")) return Stop{TaskState::impossible};
        if (lenient_ && keyword("complete")) return Stop{TaskState::complete};
        fail("expected task state completed or impossible");
        return std::nullopt;
    }

    std::optional<Action> type_text() {
        committed_ = true;
        // Strict grammar wants whitespace before the quote; lenient tolerates none.
        if (lenient_) {
            skip_space();
        } else if (!require_space()) {
            return std::nullopt;
        }
        std::string_view close = "\"";
        bool escapes = true;
        if (literal('"')) {
            close = "\"";
        } else if (lenient_ && text_.substr(pos_).starts_with("“")) {
            pos_ += std::string_view("“").size();
            close = "”";
            escapes = false;
        } else if (lenient_ && literal('\'')) {
            close = "'";
            escapes = false;
        } else {
            fail("expected '\"' to open typed text");
            return std::nullopt;
        }
        std::string out;
        while (pos_ < text_.size()) {
            if (text_.substr(pos_).starts_with(close)) {
                pos_ += close.size();
                if (out.empty() && !options_.allow_empty_type) {
                    fail("typed text is empty");
                    return std::nullopt;
                }
                return TypeText{std::move(out)};
            }
            const char c = text_[pos_];
            if (escapes && c == '\\' && pos_ + 1 < text_.size()) {
                const char next = text_[pos_ + 1];
                switch (next) {
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    case 'n': out.push_back('\n'); break;
                    case 'r': out.push_back('\r'); break;
                    case 't': out.push_back('\t'); break;
                    default:
                        out.push_back('\\');
                        out.push_back(next);
                        break;
                }
                pos_ += 2;
                continue;
            }
            out.push_back(c);
            ++pos_;
        }
        fail("unterminated typed text");
        return std::nullopt;
    }

    std::string_view text_;
    std::size_t pos_;
    bool lenient_;
    const ParseOptions& options_;
    std::optional<Failure> failure_;
    bool committed_ = false;
};

ParseOutcome parse_strict(std::string_view text, const ParseOptions& options) {
    ParseOutcome outcome;
    Scanner scanner(text, 0, /*lenient=*/false, options);
    scanner.skip_space();
    auto action = scanner.action();
    if (action) {
        scanner.skip_space();
        if (scanner.at_end()) {
            outcome.parsed = std::move(action);
            outcome.hit = true;
            return outcome;
        }
        outcome.diagnostics.push_back({scanner.position(), "unexpected trailing text"});
        return outcome;
    }
    const auto& failure = scanner.failure();
    outcome.diagnostics.push_back({failure ? failure->position : 0,
                                   failure ? failure->message : std::string("no action recognized")});
    return outcome;
}

std::size_t find_marker(std::string_view text) {
    constexpr std::string_view marker = "action:";
    std::size_t found = std::string_view::npos;
    for (std::size_t i = 0; i + marker.size() <= text.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < marker.size(); ++j) {
            if (lower(text[i + j]) != marker[j]) {
                match = false;
                break;
            }
        }
        if (match && (i == 0 || !is_word_char(text[i - 1]))) found = i + marker.size();
    }
    return found;
}

std::optional<std::pair<Action, std::size_t>> scan_from(std::string_view text, std::size_t from,
                                                        const ParseOptions& options,
                                                        std::vector<Diagnostic>& diagnostics) {
    for (std::size_t i = from; i < text.size(); ++i) {
        if (i > 0 && is_word_char(text[i - 1])) continue;
        const char c = lower(text[i]);
        if (c != 'c' && c != 's' && c != 't' && c != 'p') continue;
        Scanner scanner(text, i, /*lenient=*/true, options);
        auto action = scanner.action();
        if (action) return std::make_pair(std::move(*action), i);
        if (scanner.committed() && scanner.failure()) {
            diagnostics.push_back({scanner.failure()->position, scanner.failure()->message});
        }
    }
    return std::nullopt;
}

ParseOutcome parse_lenient(std::string_view text, const ParseOptions& options) {
    ParseOutcome strict = parse_strict(text, options);
    if (strict.hit) return strict;

    ParseOutcome outcome;
    std::vector<Diagnostic> payload_failures;
    std::optional<std::pair<Action, std::size_t>> found;
    if (const std::size_t marker = find_marker(text); marker != std::string_view::npos) {
        found = scan_from(text, marker, options, payload_failures);
    }
    if (!found) found = scan_from(text, 0, options, payload_failures);

    if (found) {
        outcome.parsed = std::move(found->first);
        outcome.hit = true;
        if (std::holds_alternative<Click>(*outcome.parsed)) {
            outcome.diagnostics.push_back(
                {found->second, "click coordinates read in (y, x) order; not strict canonical form"});
        }
        return outcome;
    }
    // Keep the first failure per position so repeated scans don't duplicate.
    std::sort(payload_failures.begin(), payload_failures.end(),
              [](const Diagnostic& a, const Diagnostic& b) { return a.position < b.position; });
    payload_failures.erase(std::unique(payload_failures.begin(), payload_failures.end()),
                           payload_failures.end());
    outcome.diagnostics = std::move(payload_failures);
    outcome.diagnostics.push_back({0, "no recognizable action found"});
    return outcome;
}

std::string escape_text(std::string_view text) {
    std::string out;
    out.reserve(text.size() + 2);
    for (const char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::optional<Point> make_point(double y, double x, CoordinatePolicy policy) {
    if (std::isnan(y) || std::isnan(x)) return std::nullopt;
    Point p{y, x};
    if (p.in_range()) return p;
    if (policy == CoordinatePolicy::reject) return std::nullopt;
    return Point{std::clamp(y, 0.0, 1.0), std::clamp(x, 0.0, 1.0)};
}

ActionCategory category_of(const Action& action) {
    return std::visit(Overloaded{
                          [](const Click&) { return ActionCategory::click; },
                          [](const Scroll&) { return ActionCategory::scroll; },
                          [](const TypeText&) { return ActionCategory::type; },
                          [](const Press&) { return ActionCategory::press; },
                          [](const Stop&) { return ActionCategory::stop; },
                      },
                      action);
}

std::string_view to_string(ActionCategory category) {
    switch (category) {
        case ActionCategory::click: return "click";
        case ActionCategory::scroll: return "scroll";
        case ActionCategory::type: return "type";
        case ActionCategory::press: return "press";
        case ActionCategory::stop: return "stop";
    }
    return "unknown";
}

std::string_view to_string(ScrollDirection direction) {
    switch (direction) {
        case ScrollDirection::up: return "up";
        case ScrollDirection::down: return "down";
        case ScrollDirection::left: return "left";
        case ScrollDirection::right: return "right";
    }
    return "unknown";
}

std::string_view to_string(Button button) {
    switch (button) {
        case Button::back: return "back";
        case Button::home: return "home";
        case Button::enter: return "enter";
    }
    return "unknown";
}

std::string_view to_string(TaskState state) {
    switch (state) {
        case TaskState::complete: return "completed";
        case TaskState::impossible: return "impossible";
    }
    return "unknown";
}

std::optional<ActionCategory> category_from_string(std::string_view name) {
    for (const auto category : kAllCategories) {
        if (to_string(category) == name) return category;
    }
    return std::nullopt;
}

std::vector<std::string> action_violations(const Action& action, const ActionRules& rules) {
    std::vector<std::string> out;
    if (const auto* click = std::get_if<Click>(&action)) {
        if (!click->point.in_range()) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "click coordinate (%g, %g) outside [0, 1]", click->point.y,
                          click->point.x);
            out.emplace_back(buf);
        }
    } else if (const auto* type = std::get_if<TypeText>(&action)) {
        if (type->text.empty() && !rules.allow_empty_type) out.emplace_back("typed text is empty");
    }
    return out;
}

ParseOutcome parse_action(std::string_view text, ParseMode mode, const ParseOptions& options) {
    return mode == ParseMode::strict ? parse_strict(text, options) : parse_lenient(text, options);
}

std::string serialize_action(const Action& action) {
    return std::visit(Overloaded{
                          [](const Click& a) {
                              char buf[64];
                              std::snprintf(buf, sizeof buf, "click (%.4f, %.4f)", a.point.y, a.point.x);
                              return std::string(buf);
                          },
                          [](const Scroll& a) { return "scroll " + std::string(to_string(a.direction)); },
                          [](const TypeText& a) { return "type \"" + escape_text(a.text) + "\""; },
                          [](const Press& a) { return "press " + std::string(to_string(a.button)); },
                          [](const Stop& a) {
                              return "stop and set the query as " + std::string(to_string(a.state));
                          },
                      },
                      action);
}

Action dual_point_to_action(const DualPointGesture& gesture, double tap_threshold) {
    if (!(tap_threshold > 0.0)) throw Error("tap threshold must be positive");
    const double dy = gesture.lift.y - gesture.touch.y;
    const double dx = gesture.lift.x - gesture.touch.x;
    if (std::hypot(dy, dx) <= tap_threshold) return Click{gesture.touch};
    if (std::abs(dy) >= std::abs(dx)) {
        return Scroll{dy < 0 ? ScrollDirection::up : ScrollDirection::down};
    }
    return Scroll{dx > 0 ? ScrollDirection::right : ScrollDirection::left};
}

}  // namespace actbench
