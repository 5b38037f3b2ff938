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

#include "actbench/json_io.hpp"

#include <fstream>
#include <sstream>

#include "actbench/error.hpp"

namespace actbench {

namespace {

Json optional_string(const std::optional<std::string>& value) {
    return value ? Json(*value) : Json(nullptr);
}

const Json& require(const Json& doc, const char* key, std::string_view where) {
    if (!doc.is_object()) throw Error(std::string(where) + ": expected an object");
    const auto it = doc.find(key);
    if (it == doc.end()) throw Error(std::string(where) + ": missing key '" + key + "'");
    return *it;
}

std::string require_string(const Json& doc, const char* key, std::string_view where) {
    const Json& value = require(doc, key, where);
    if (!value.is_string()) throw Error(std::string(where) + ": '" + key + "' must be a string");
    return value.get<std::string>();
}

std::int64_t require_int(const Json& doc, const char* key, std::string_view where) {
    const Json& value = require(doc, key, where);
    if (!value.is_number_integer()) throw Error(std::string(where) + ": '" + key + "' must be an integer");
    return value.get<std::int64_t>();
}

std::optional<std::string> optional_string_field(const Json& doc, const char* key, std::string_view where) {
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(std::string(where) + ": '" + key + "' must be a string or null");
    return it->get<std::string>();
}

UiElement element_from_json(const Json& doc, const std::string& where) {
    UiElement element;
    element.id = require_int(doc, "id", where);
    const Json& bbox = require(doc, "bbox", where);
    if (!bbox.is_array() || bbox.size() != 4) throw Error(where + ": 'bbox' must be [top, left, bottom, right]");
    for (const auto& v : bbox) {
        if (!v.is_number()) throw Error(where + ": bbox entries must be numbers");
    }
    element.bbox = {bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(), bbox[3].get<double>()};
    element.text = optional_string_field(doc, "text", where);
    element.elem_type = optional_string_field(doc, "type", where);
    return element;
}

}  // namespace

Json episode_to_json(const Episode& episode) {
    Json steps = Json::array();
    for (const auto& step : episode.steps) {
        Json elements = Json::array();
        for (const auto& e : step.observation.elements) {
            elements.push_back({{"id", e.id},
                                {"bbox", {e.bbox.top, e.bbox.left, e.bbox.bottom, e.bbox.right}},
                                {"text", optional_string(e.text)},
                                {"type", optional_string(e.elem_type)}});
        }
        steps.push_back({{"index", step.index},
                         {"observation",
                          {{"screenshot", step.observation.screenshot_ref},
                           {"width_px", step.observation.width_px},
                           {"height_px", step.observation.height_px},
                           {"elements", std::move(elements)}}},
                         {"gold_action", serialize_action(step.gold_action)},
                         {"coat",
                          {{"screen_description", optional_string(step.coat.screen_description)},
                           {"action_think", optional_string(step.coat.action_think)},
                           {"action_description", optional_string(step.coat.action_description)},
                           {"action_result", optional_string(step.coat.action_result)}}}});
    }
    return {{"episode_id", episode.episode_id},
            {"instruction", episode.instruction},
            {"subset", to_string(episode.subset)},
            {"steps", std::move(steps)}};
}

Episode episode_from_json(const Json& doc) {
    Episode episode;
    episode.episode_id = require_string(doc, "episode_id", "episode");
    const std::string where = "episode " + episode.episode_id;
    episode.instruction = require_string(doc, "instruction", where);
    const std::string subset = require_string(doc, "subset", where);
    const auto parsed_subset = subset_from_string(subset);
    if (!parsed_subset) throw Error(where + ": unknown subset '" + subset + "'");
    episode.subset = *parsed_subset;

    const Json& steps = require(doc, "steps", where);
    if (!steps.is_array()) throw Error(where + ": 'steps' must be an array");
    for (std::size_t n = 0; n < steps.size(); ++n) {
        const Json& s = steps[n];
        const std::string step_where = where + " step #" + std::to_string(n);
        Step step;
        const auto index = require_int(s, "index", step_where);
        if (index < 0) throw Error(step_where + ": negative index");
        step.index = static_cast<std::size_t>(index);

        const Json& obs = require(s, "observation", step_where);
        step.observation.screenshot_ref = require_string(obs, "screenshot", step_where);
        step.observation.width_px = static_cast<int>(require_int(obs, "width_px", step_where));
        step.observation.height_px = static_cast<int>(require_int(obs, "height_px", step_where));
        const Json& elements = require(obs, "elements", step_where);
        if (!elements.is_array()) throw Error(step_where + ": 'elements' must be an array");
        for (const auto& e : elements) step.observation.elements.push_back(element_from_json(e, step_where));

        const std::string gold = require_string(s, "gold_action", step_where);
        auto outcome = parse_action(gold, ParseMode::strict);
        if (!outcome.hit) {
            const std::string reason = outcome.diagnostics.empty() ? "unparseable" : outcome.diagnostics[0].message;
            throw Error("step " + std::to_string(index) + ": gold_action '" + gold + "': " + reason);
        }
        step.gold_action = std::move(*outcome.parsed);

        const auto coat_it = s.find("coat");
        if (coat_it != s.end() && !coat_it->is_null()) {
            step.coat.screen_description = optional_string_field(*coat_it, "screen_description", step_where);
            step.coat.action_think = optional_string_field(*coat_it, "action_think", step_where);
            step.coat.action_description = optional_string_field(*coat_it, "action_description", step_where);
            step.coat.action_result = optional_string_field(*coat_it, "action_result", step_where);
        }
        episode.steps.push_back(std::move(step));
    }
    return episode;
}

Json manifest_to_json(const Manifest& manifest) {
    Json entries = Json::array();
    for (const auto& entry : manifest.entries) {
        entries.push_back({{"path", entry.path}, {"split", to_string(entry.split)}});
    }
    return {{"episodes", std::move(entries)}};
}

Manifest manifest_from_json(const Json& doc) {
    Manifest manifest;
    const Json& entries = require(doc, "episodes", "manifest");
    if (!entries.is_array()) throw Error("manifest: 'episodes' must be an array");
    for (const auto& e : entries) {
        ManifestEntry entry;
        entry.path = require_string(e, "path", "manifest entry");
        const std::string split = require_string(e, "split", "manifest entry " + entry.path);
        const auto parsed = split_from_string(split);
        if (!parsed || *parsed == Split::all) {
            throw Error("manifest entry " + entry.path + ": split must be train or test");
        }
        entry.split = *parsed;
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return Json::parse(buffer.str());
    } catch (const Json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_dataset(const std::filesystem::path& root, const std::vector<Episode>& episodes,
                   const Manifest& manifest) {
    if (episodes.size() != manifest.entries.size()) {
        throw Error("write_dataset: one manifest entry per episode required");
    }
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        write_json_file(root / manifest.entries[i].path, episode_to_json(episodes[i]));
    }
    write_json_file(root / kManifestName, manifest_to_json(manifest));
}

}  // namespace actbench
