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

#include "actbench/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "actbench/error.hpp"

namespace actbench {

namespace {

struct BuiltinTemplate {
    const char* key;
    const char* text;
};

// Generated from templates/*.txt at configure time.
#include "builtin_templates.inc"

std::string strip_final_newline(std::string text) {
    if (!text.empty() && text.back() == '\n') text.pop_back();
    if (!text.empty() && text.back() == '\r') text.pop_back();
    return text;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char l, char r) {
               return std::tolower(static_cast<unsigned char>(l)) == std::tolower(static_cast<unsigned char>(r));
           });
}

std::string fraction2(double v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string element_label(const UiElement& element) {
    std::string line = "[" + std::to_string(element.id) + "]";
    if (element.elem_type && !element.elem_type->empty()) line += " " + *element.elem_type;
    if (element.text && !element.text->empty()) line += " '" + *element.text + "'";
    return line;
}

bool blank(const std::optional<std::string>& s) {
    return !s || std::all_of(s->begin(), s->end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

PromptSegment text_segment(SegmentRole role, std::string text) { return {role, false, std::move(text)}; }
PromptSegment image_segment(SegmentRole role, std::string ref) { return {role, true, std::move(ref)}; }

std::string system_text(PromptMode mode, ComponentSet flags, const TemplateSet& t) {
    std::string text = t.get(std::string("system_") + std::string(to_string(mode)));
    text += "\n\n" + t.get("action_space");
    text += "\n\n" + t.get("format_header");
    if (mode == PromptMode::cot) text += "\n" + t.get("format_reasoning");
    if (mode == PromptMode::coat && flags.has(Component::AT)) text += "\n" + t.get("format_think");
    if (mode == PromptMode::coat && flags.has(Component::AD)) text += "\n" + t.get("format_description");
    text += "\n" + t.get("format_action");
    return text;
}

}  // namespace

std::string ComponentSet::to_string() const {
    std::string out;
    for (const auto c : {Component::SD, Component::PAR, Component::AT, Component::AD}) {
        if (!has(c)) continue;
        if (!out.empty()) out += ",";
        out += actbench::to_string(c);
    }
    return out;
}

std::string_view to_string(PromptMode mode) {
    switch (mode) {
        case PromptMode::standard: return "standard";
        case PromptMode::coa: return "coa";
        case PromptMode::cot: return "cot";
        case PromptMode::coat: return "coat";
    }
    return "unknown";
}

std::string_view to_string(UiRepresentation rep) { return rep == UiRepresentation::txt ? "txt" : "tag"; }

std::string_view to_string(Component component) {
    switch (component) {
        case Component::SD: return "SD";
        case Component::PAR: return "PAR";
        case Component::AT: return "AT";
        case Component::AD: return "AD";
    }
    return "unknown";
}

std::optional<PromptMode> prompt_mode_from_string(std::string_view name) {
    for (const auto mode : {PromptMode::standard, PromptMode::coa, PromptMode::cot, PromptMode::coat}) {
        if (iequals(to_string(mode), name)) return mode;
    }
    return std::nullopt;
}

std::optional<UiRepresentation> ui_representation_from_string(std::string_view name) {
    if (iequals(name, "txt")) return UiRepresentation::txt;
    if (iequals(name, "tag")) return UiRepresentation::tag;
    return std::nullopt;
}

ComponentSet parse_components(std::string_view list) {
    ComponentSet set;
    std::size_t start = 0;
    while (start <= list.size()) {
        const std::size_t comma = std::min(list.find(',', start), list.size());
        std::string_view item = list.substr(start, comma - start);
        while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.remove_prefix(1);
        while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
        if (!item.empty()) {
            bool known = false;
            for (const auto c : {Component::SD, Component::PAR, Component::AT, Component::AD}) {
                if (iequals(to_string(c), item)) {
                    set.insert(c);
                    known = true;
                }
            }
            if (!known) throw ConfigError("unknown component '" + std::string(item) + "' (expected SD, PAR, AT, AD)");
        }
        start = comma + 1;
    }
    return set;
}

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet set = [] {
        TemplateSet s;
        for (const auto& entry : kBuiltinTemplates) {
            s.templates_.emplace(entry.key, strip_final_newline(entry.text));
        }
        s.version_ = s.templates_.at("VERSION");
        return s;
    }();
    return set;
}

TemplateSet TemplateSet::load_overrides(const std::filesystem::path& dir) {
    TemplateSet set = builtin();
    if (!std::filesystem::is_directory(dir)) throw ConfigError("template directory not found: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto& path = entry.path();
        const bool is_version = path.filename() == "VERSION";
        if (!is_version && path.extension() != ".txt") continue;
        std::ifstream in(path, std::ios::binary);
        std::stringstream buffer;
        buffer << in.rdbuf();
        const std::string key = is_version ? "VERSION" : path.stem().string();
        set.templates_[key] = strip_final_newline(buffer.str());
    }
    set.version_ = set.templates_.at("VERSION");
    return set;
}

const std::string& TemplateSet::get(std::string_view key) const {
    const auto it = templates_.find(key);
    if (it == templates_.end()) throw Error("unknown prompt template '" + std::string(key) + "'");
    return it->second;
}

std::string TemplateSet::fill(std::string_view key,
                              std::initializer_list<std::pair<std::string_view, std::string_view>> values) const {
    const std::string& tpl = get(key);
    std::string out;
    out.reserve(tpl.size());
    for (std::size_t i = 0; i < tpl.size();) {
        bool replaced = false;
        if (tpl[i] == '{') {
            for (const auto& [name, value] : values) {
                if (tpl.compare(i + 1, name.size(), name) == 0 && i + 1 + name.size() < tpl.size() &&
                    tpl[i + 1 + name.size()] == '}') {
                    out += value;
                    i += name.size() + 2;
                    replaced = true;
                    break;
                }
            }
        }
        if (!replaced) out.push_back(tpl[i++]);
    }
    return out;
}

std::string_view to_string(SegmentRole role) {
    switch (role) {
        case SegmentRole::screenshot: return "screenshot";
        case SegmentRole::som_overlay: return "som_overlay";
        case SegmentRole::screen_description: return "screen_description";
        case SegmentRole::ui_elements: return "ui_elements";
        case SegmentRole::history: return "history";
        case SegmentRole::query: return "query";
        case SegmentRole::instruction: return "instruction";
    }
    return "unknown";
}

std::size_t PromptDoc::image_count() const {
    return static_cast<std::size_t>(
        std::count_if(user_segments.begin(), user_segments.end(), [](const auto& s) { return s.is_image; }));
}

std::string PromptDoc::all_text() const {
    std::string out = system_text;
    for (const auto& segment : user_segments) {
        if (segment.is_image) continue;
        out += "\n";
        out += segment.value;
    }
    return out;
}

Json prompt_to_json(const PromptDoc& doc) {
    Json segments = Json::array();
    for (const auto& s : doc.user_segments) {
        if (s.is_image) {
            segments.push_back({{"kind", "image"}, {"ref", s.value}});
        } else {
            segments.push_back({{"kind", "text"}, {"value", s.value}});
        }
    }
    Json components = Json::array();
    for (const auto c : {Component::SD, Component::PAR, Component::AT, Component::AD}) {
        if (doc.component_flags.has(c)) components.push_back(to_string(c));
    }
    return {{"system", doc.system_text}, {"segments", std::move(segments)}, {"components", std::move(components)}};
}

History update_history(const History& history, std::size_t step_index, std::string action_description,
                       std::optional<std::string> action_result, Action action) {
    if (!history.entries_.empty() && step_index <= history.entries_.back().step_index) {
        throw Error("history step index " + std::to_string(step_index) + " does not follow " +
                    std::to_string(history.entries_.back().step_index));
    }
    History next = history;
    next.entries_.push_back({step_index, std::move(action_description), std::move(action_result), std::move(action)});
    if (next.max_entries_ > 0 && next.entries_.size() > next.max_entries_) {
        next.entries_.erase(next.entries_.begin(),
                            next.entries_.begin() + static_cast<std::ptrdiff_t>(next.entries_.size() - next.max_entries_));
    }
    return next;
}

std::string render_history(const History& history, bool descriptions, bool results, const TemplateSet& templates) {
    std::string out;
    for (const auto& entry : history.entries()) {
        const std::string action = descriptions && !entry.action_description.empty() ? entry.action_description
                                                                                     : serialize_action(entry.action);
        if (!out.empty()) out += "\n";
        out += templates.fill("history_line", {{"n", std::to_string(entry.step_index + 1)}, {"action", action}});
        if (results && !blank(entry.action_result)) {
            out += "\n" + templates.fill("history_result", {{"result", *entry.action_result}});
        }
    }
    return out;
}

std::string render_textual_ui(const Observation& obs) {
    if (obs.elements.empty()) return "no elements detected";
    std::string out;
    for (const auto& e : obs.elements) {
        if (!out.empty()) out += "\n";
        out += element_label(e) + " @ (" + fraction2(e.bbox.top) + "," + fraction2(e.bbox.left) + "," +
               fraction2(e.bbox.bottom) + "," + fraction2(e.bbox.right) + ")";
    }
    return out;
}

std::string render_som_legend(const Observation& obs) {
    if (obs.elements.empty()) return "no elements detected";
    std::string out;
    for (const auto& e : obs.elements) {
        if (!out.empty()) out += "\n";
        out += element_label(e);
    }
    return out;
}

std::string default_overlay_ref(const Observation& obs) { return obs.screenshot_ref + ".som.png"; }

PromptDoc build_prompt(const PromptInputs& in, const TemplateSet& t) {
    if (in.observation == nullptr) throw Error("build_prompt: observation required");
    if (blank(in.query)) throw ConfigError("prompt requires a non-empty user request");
    const Observation& obs = *in.observation;
    const bool coat = in.mode == PromptMode::coat;
    const ComponentSet flags = coat ? in.flags : ComponentSet{};
    if (coat && flags.has(Component::SD) && blank(in.screen_description)) {
        throw ConfigError("coat prompt requires component SD (screen description) but none was supplied");
    }

    PromptDoc doc;
    doc.component_flags = flags;
    doc.system_text = system_text(in.mode, flags, t);
    auto& segs = doc.user_segments;
    segs.push_back(image_segment(SegmentRole::screenshot, obs.screenshot_ref));

    if (in.mode != PromptMode::standard) {
        if (in.rep == UiRepresentation::tag) {
            segs.push_back(image_segment(SegmentRole::som_overlay, in.overlay_ref.value_or(default_overlay_ref(obs))));
        }
        if (coat && flags.has(Component::SD)) {
            segs.push_back(text_segment(SegmentRole::screen_description,
                                        t.fill("segment_screen_description", {{"text", *in.screen_description}})));
        }
        if (in.rep == UiRepresentation::tag) {
            segs.push_back(
                text_segment(SegmentRole::ui_elements, t.fill("segment_som_legend", {{"elements", render_som_legend(obs)}})));
        } else {
            segs.push_back(
                text_segment(SegmentRole::ui_elements, t.fill("segment_ui_text", {{"elements", render_textual_ui(obs)}})));
        }
        const bool with_history = in.mode == PromptMode::coa || coat;
        if (with_history && !in.history.empty()) {
            const std::string lines =
                render_history(in.history, coat && flags.has(Component::AD), coat && flags.has(Component::PAR), t);
            segs.push_back(text_segment(SegmentRole::history, t.fill("segment_history", {{"lines", lines}})));
        }
    }
    segs.push_back(text_segment(SegmentRole::query, t.fill("segment_query", {{"query", in.query}})));
    if (in.mode == PromptMode::cot) {
        segs.push_back(text_segment(SegmentRole::instruction, t.get("segment_cot_instruction")));
    }
    return doc;
}

PromptDoc build_prompt(PromptMode mode, std::string_view query, const Observation& obs, UiRepresentation rep,
                       const History& history, const std::optional<std::string>& screen_description,
                       ComponentSet flags) {
    PromptInputs in;
    in.mode = mode;
    in.query = std::string(query);
    in.observation = &obs;
    in.rep = rep;
    in.history = history;
    in.screen_description = screen_description;
    in.flags = flags;
    return build_prompt(in);
}

std::string_view to_string(AnnotationKind kind) {
    switch (kind) {
        case AnnotationKind::screen_description: return "screen_description";
        case AnnotationKind::action_grounding: return "action_grounding";
        case AnnotationKind::action_thinking: return "action_thinking";
        case AnnotationKind::action_result: return "action_result";
    }
    return "unknown";
}

std::optional<AnnotationKind> annotation_kind_from_string(std::string_view name) {
    for (const auto kind : {AnnotationKind::screen_description, AnnotationKind::action_grounding,
                            AnnotationKind::action_thinking, AnnotationKind::action_result}) {
        if (iequals(to_string(kind), name)) return kind;
    }
    return std::nullopt;
}

PromptDoc build_annotation_prompt(const AnnotationInputs& in, const TemplateSet& t) {
    const auto require_ref = [](const std::optional<std::string>& ref, const char* what) -> const std::string& {
        if (blank(ref)) throw ConfigError(std::string("missing ") + what);
        return *ref;
    };
    PromptDoc doc;
    doc.system_text = t.get("annotate_system");
    auto& segs = doc.user_segments;
    switch (in.kind) {
        case AnnotationKind::screen_description: {
            segs.push_back(image_segment(SegmentRole::screenshot, require_ref(in.before_ref, "screenshot")));
            segs.push_back(text_segment(SegmentRole::instruction, t.get("annotate_screen_description")));
            break;
        }
        case AnnotationKind::action_grounding: {
            if (!in.gold) throw ConfigError("missing gold action");
            const std::string& before = require_ref(in.before_ref, "screenshot");
            const std::string action = serialize_action(*in.gold);
            segs.push_back(image_segment(SegmentRole::screenshot, before));
            segs.push_back(text_segment(
                SegmentRole::instruction,
                blank(in.query) ? t.fill("annotate_action_grounding_noquery", {{"action", action}})
                                : t.fill("annotate_action_grounding", {{"query", *in.query}, {"action", action}})));
            break;
        }
        case AnnotationKind::action_thinking: {
            if (blank(in.query)) throw ConfigError("missing query");
            const std::string& before = require_ref(in.before_ref, "screenshot");
            segs.push_back(image_segment(SegmentRole::screenshot, before));
            segs.push_back(text_segment(
                SegmentRole::instruction,
                in.gold ? t.fill("annotate_action_thinking_gold",
                                 {{"query", *in.query}, {"action", serialize_action(*in.gold)}})
                        : t.fill("annotate_action_thinking", {{"query", *in.query}})));
            break;
        }
        case AnnotationKind::action_result: {
            const std::string& before = require_ref(in.before_ref, "before image");
            const std::string& after = require_ref(in.after_ref, "after image");
            segs.push_back(image_segment(SegmentRole::screenshot, before));
            segs.push_back(image_segment(SegmentRole::screenshot, after));
            segs.push_back(text_segment(
                SegmentRole::instruction,
                in.gold ? t.fill("annotate_action_result_gold", {{"action", serialize_action(*in.gold)}})
                        : t.get("annotate_action_result")));
            break;
        }
    }
    return doc;
}

std::string describe_action(const Action& action, const TemplateSet& t) {
    if (const auto* a = std::get_if<Click>(&action)) {
        char y[16];
        char x[16];
        std::snprintf(y, sizeof y, "%.4f", a->point.y);
        std::snprintf(x, sizeof x, "%.4f", a->point.x);
        return t.fill("describe_click", {{"y", y}, {"x", x}});
    }
    if (const auto* a = std::get_if<Scroll>(&action)) return t.fill("describe_scroll", {{"direction", to_string(a->direction)}});
    if (const auto* a = std::get_if<TypeText>(&action)) return t.fill("describe_type", {{"text", a->text}});
    if (const auto* a = std::get_if<Press>(&action)) return t.fill("describe_press", {{"button", to_string(a->button)}});
    return t.fill("describe_stop", {{"state", to_string(std::get<Stop>(action).state)}});
}

}  // namespace actbench
