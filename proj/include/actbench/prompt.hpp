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
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "actbench/action.hpp"
#include "actbench/episode.hpp"
#include "actbench/json_io.hpp"

namespace actbench {

enum class PromptMode { standard, coa, cot, coat };
enum class UiRepresentation { txt, tag };

// Context components: screen description, previous action result, action
// think and action description.
enum class Component : std::uint8_t { SD = 1, PAR = 2, AT = 4, AD = 8 };

class ComponentSet {
public:
    constexpr ComponentSet() = default;
    constexpr ComponentSet(std::initializer_list<Component> components) {
        for (const auto c : components) bits_ |= static_cast<std::uint8_t>(c);
    }
    static constexpr ComponentSet all() { return {Component::SD, Component::PAR, Component::AT, Component::AD}; }

    [[nodiscard]] constexpr bool has(Component c) const { return (bits_ & static_cast<std::uint8_t>(c)) != 0; }
    [[nodiscard]] constexpr bool empty() const { return bits_ == 0; }
    constexpr void insert(Component c) { bits_ |= static_cast<std::uint8_t>(c); }
    [[nodiscard]] std::string to_string() const;  // e.g. "SD,PAR"

    friend constexpr bool operator==(ComponentSet, ComponentSet) = default;

private:
    std::uint8_t bits_ = 0;
};

std::string_view to_string(PromptMode mode);
std::string_view to_string(UiRepresentation rep);
std::string_view to_string(Component component);
std::optional<PromptMode> prompt_mode_from_string(std::string_view name);
std::optional<UiRepresentation> ui_representation_from_string(std::string_view name);
// Comma separated, case-insensitive, e.g. "SD,PAR". Throws ConfigError on unknown names.
ComponentSet parse_components(std::string_view list);

// Versioned prompt wording. The built-in set is compiled from templates/;
// a directory of UTF-8 files named <key>.txt can override any of them.
class TemplateSet {
public:
    static const TemplateSet& builtin();
    static TemplateSet load_overrides(const std::filesystem::path& dir);

    // Throws Error for an unknown key.
    [[nodiscard]] const std::string& get(std::string_view key) const;
    [[nodiscard]] const std::string& version() const { return version_; }

    // Replaces "{name}" placeholders.
    [[nodiscard]] std::string fill(std::string_view key,
                                   std::initializer_list<std::pair<std::string_view, std::string_view>> values) const;

private:
    std::map<std::string, std::string, std::less<>> templates_;
    std::string version_;
};

enum class SegmentRole {
    screenshot,
    som_overlay,
    screen_description,
    ui_elements,
    history,
    query,
    instruction,
};

std::string_view to_string(SegmentRole role);

struct PromptSegment {
    SegmentRole role = SegmentRole::query;
    bool is_image = false;
    std::string value;  // text, or an image reference for image segments
    friend bool operator==(const PromptSegment&, const PromptSegment&) = default;
};

struct PromptDoc {
    std::string system_text;
    std::vector<PromptSegment> user_segments;
    ComponentSet component_flags;

    [[nodiscard]] std::size_t image_count() const;
    // Concatenation of system text and every text segment.
    [[nodiscard]] std::string all_text() const;
    friend bool operator==(const PromptDoc&, const PromptDoc&) = default;
};

// {"system", "segments": [{"kind": "text", "value"} | {"kind": "image", "ref"}], "components"}
Json prompt_to_json(const PromptDoc& doc);

struct HistoryEntry {
    std::size_t step_index = 0;
    std::string action_description;
    std::optional<std::string> action_result;
    Action action;
    friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

// Value type; appending returns a new history. With max_entries > 0 the
// oldest entries are dropped beyond that size.
class History {
public:
    History() = default;
    explicit History(std::size_t max_entries) : max_entries_(max_entries) {}

    [[nodiscard]] const std::vector<HistoryEntry>& entries() const { return entries_; }
    [[nodiscard]] bool empty() const { return entries_.empty(); }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] std::size_t max_entries() const { return max_entries_; }

    friend History update_history(const History& history, std::size_t step_index, std::string action_description,
                                  std::optional<std::string> action_result, Action action);
    friend bool operator==(const History&, const History&) = default;

private:
    std::vector<HistoryEntry> entries_;
    std::size_t max_entries_ = 0;
};

// Throws Error unless step_index is greater than the last entry's.
History update_history(const History& history, std::size_t step_index, std::string action_description,
                       std::optional<std::string> action_result, Action action);

// One line per step. Entries use their description when `descriptions` is
// set (falling back to the canonical action), the canonical action
// otherwise; with `results` each available result follows on its own line.
std::string render_history(const History& history, bool descriptions, bool results,
                           const TemplateSet& templates = TemplateSet::builtin());

// "[id] <type> '<text>' @ (top,left,bottom,right)", two decimals, one line
// per element in the given order.
std::string render_textual_ui(const Observation& obs);

// Id list shown next to the set-of-mark image: "[id] <type> '<text>'".
std::string render_som_legend(const Observation& obs);

// Overlay images default to "<screenshot>.som.png".
std::string default_overlay_ref(const Observation& obs);

struct PromptInputs {
    PromptMode mode = PromptMode::coat;
    std::string query;
    const Observation* observation = nullptr;
    UiRepresentation rep = UiRepresentation::txt;
    History history;
    std::optional<std::string> screen_description;
    ComponentSet flags = ComponentSet::all();  // honoured in coat mode only
    std::optional<std::string> overlay_ref;
};

// Segment order: screenshot, set-of-mark overlay, screen description, UI
// elements, history, query, instruction. Standard mode carries only the
// screenshot and the query. Throws ConfigError for an empty query or a coat
// prompt missing a required component.
PromptDoc build_prompt(const PromptInputs& inputs, const TemplateSet& templates = TemplateSet::builtin());

PromptDoc build_prompt(PromptMode mode, std::string_view query, const Observation& obs, UiRepresentation rep,
                       const History& history, const std::optional<std::string>& screen_description,
                       ComponentSet flags);

enum class AnnotationKind { screen_description, action_grounding, action_thinking, action_result };

std::string_view to_string(AnnotationKind kind);
std::optional<AnnotationKind> annotation_kind_from_string(std::string_view name);

struct AnnotationInputs {
    AnnotationKind kind = AnnotationKind::screen_description;
    std::optional<std::string> query;
    std::optional<Action> gold;
    std::optional<std::string> before_ref;
    std::optional<std::string> after_ref;
};

// Instruction for generating one annotation. Each kind only uses the inputs
// it is allowed to see: screen descriptions never see the query. Throws
// ConfigError naming a missing required input.
PromptDoc build_annotation_prompt(const AnnotationInputs& inputs,
                                  const TemplateSet& templates = TemplateSet::builtin());

// Template-generated description used for non-click history entries.
std::string describe_action(const Action& action, const TemplateSet& templates = TemplateSet::builtin());

}  // namespace actbench
