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

#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "actbench/action.hpp"
#include "actbench/cli.hpp"
#include "actbench/episode.hpp"
#include "actbench/error.hpp"
#include "actbench/matching.hpp"
#include "actbench/sampler.hpp"

namespace py = pybind11;
using namespace actbench;

namespace {

Action parse_or_raise(const std::string& text) {
    const auto outcome = parse_action(text, ParseMode::strict);
    if (!outcome.hit) {
        throw py::value_error("not a canonical action: " + text +
                              (outcome.diagnostics.empty() ? "" : " (" + outcome.diagnostics.front().message + ")"));
    }
    return *outcome.parsed;
}

Observation screen_of(const std::vector<std::array<double, 4>>& boxes) {
    Observation obs;
    std::int64_t id = 0;
    for (const auto& b : boxes) obs.elements.push_back({id++, {b[0], b[1], b[2], b[3]}, std::nullopt, std::nullopt});
    return obs;
}

py::dict stats_dict(const DatasetStats& stats) {
    py::dict out;
    for (const auto s : kAllSubsets) {
        out[py::str(std::string(to_string(s)))] = py::make_tuple(stats.of(s).episodes, stats.of(s).screens);
    }
    out["total"] = py::make_tuple(stats.total.episodes, stats.total.screens);
    return out;
}

}  // namespace

PYBIND11_MODULE(_actbench, m) {
    m.doc() = "Bindings for the actbench action grammar, metrics and tool entry point.";

    const auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DatasetError>(m, "DatasetError", base.ptr());

    m.def(
        "parse_action",
        [](const std::string& text, bool lenient) -> py::tuple {
            const auto outcome = parse_action(text, lenient ? ParseMode::lenient : ParseMode::strict);
            std::vector<std::string> notes;
            for (const auto& d : outcome.diagnostics) notes.push_back(d.message);
            if (!outcome.hit) return py::make_tuple(py::none(), notes);
            return py::make_tuple(serialize_action(*outcome.parsed), notes);
        },
        py::arg("text"), py::arg("lenient") = false,
        "Returns (canonical action or None, diagnostics).");

    m.def(
        "category",
        [](const std::string& text) { return std::string(to_string(category_of(parse_or_raise(text)))); },
        py::arg("action"));

    m.def(
        "dual_point_to_action",
        [](double touch_y, double touch_x, double lift_y, double lift_x, double threshold) {
            return serialize_action(dual_point_to_action({{touch_y, touch_x}, {lift_y, lift_x}}, threshold));
        },
        py::arg("touch_y"), py::arg("touch_x"), py::arg("lift_y"), py::arg("lift_x"),
        py::arg("threshold") = kDefaultTapThreshold);

    m.def(
        "match",
        [](const std::string& pred, const std::string& gold, const std::vector<std::array<double, 4>>& boxes,
           double threshold) {
            MatchConfig config;
            config.click_distance_threshold = threshold;
            check_match_config(config);
            const auto r = match_action(parse_or_raise(pred), parse_or_raise(gold), screen_of(boxes), config);
            return py::make_tuple(r.type_match, r.exact_match);
        },
        py::arg("prediction"), py::arg("gold"), py::arg("boxes") = std::vector<std::array<double, 4>>{},
        py::arg("threshold") = 0.14,
        "Returns (type_match, exact_match). Boxes are (top, left, bottom, right) on the gold screen.");

    m.def(
        "goal_progress", [](const std::vector<bool>& steps) { return episode_goal_progress(steps); },
        py::arg("step_matches"));

    m.def(
        "dataset_stats",
        [](const std::filesystem::path& root, const std::string& split) {
            const auto s = split_from_string(split);
            if (!s) throw py::value_error("unknown split: " + split);
            return stats_dict(load_dataset(root, *s).stats);
        },
        py::arg("root"), py::arg("split") = "all", "Per-subset (episodes, screens) of one split.");

    m.def(
        "tfidf",
        [](const std::vector<std::string>& texts) {
            const auto matrix = tfidf_vectors(texts);
            std::vector<std::map<std::string, double>> rows;
            for (const auto& row : matrix.rows) {
                auto& out = rows.emplace_back();
                for (const auto& [term, w] : row.entries) out[matrix.vocabulary[term]] = w;
            }
            return rows;
        },
        py::arg("texts"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out;
            std::ostringstream err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line tool in-process; returns (exit code, stdout, stderr).");
}
