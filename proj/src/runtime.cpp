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

#include "actbench/runtime.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "actbench/error.hpp"
#include "actbench/http_backend.hpp"
#include "actbench/overlay.hpp"

namespace actbench {

namespace {

const TemplateSet& templates_of(const RunConfig& config) {
    return config.templates != nullptr ? *config.templates : TemplateSet::builtin();
}

std::optional<std::string> render_overlay(const Episode& episode, const Step& step, const RunConfig& config) {
    if (config.rep != UiRepresentation::tag || !config.render_dir) return std::nullopt;
    const auto source = resolve_screenshot(config.dataset_root, step.observation.screenshot_ref);
    if (!std::filesystem::exists(source)) return std::nullopt;
    const auto target = *config.render_dir / (episode.episode_id + "_" + std::to_string(step.index) + ".png");
    write_image(target, render_som_overlay(step.observation, read_image(source)));
    return target.string();
}

}  // namespace

std::string oracle_predict(const Step& step) { return serialize_action(step.gold_action); }

OracleBackend::OracleBackend(const std::vector<Episode>& episodes) {
    for (const auto& episode : episodes) {
        for (const auto& step : episode.steps) {
            answers_.emplace(StepKey{episode.episode_id, step.index}, oracle_predict(step));
        }
    }
}

PolicyResponse OracleBackend::predict(const PolicyRequest& request) {
    const auto it = answers_.find({request.episode_id, request.step_index});
    if (it == answers_.end()) {
        throw BackendError("oracle has no gold action for " + request.episode_id + "#" +
                           std::to_string(request.step_index));
    }
    return {it->second, 0.0, id()};
}

ScriptedBackend::ScriptedBackend(const std::vector<ScriptEntry>& entries, const std::vector<Episode>* fallback) {
    for (const auto& entry : entries) script_[{entry.episode_id, entry.step_index}] = entry;
    if (fallback != nullptr) fallback_.emplace(*fallback);
}

PolicyResponse ScriptedBackend::predict(const PolicyRequest& request) {
    const auto it = script_.find({request.episode_id, request.step_index});
    if (it != script_.end()) {
        if (it->second.fail) throw BackendError("scripted failure");
        return {it->second.text, 0.0, id()};
    }
    if (fallback_) {
        auto response = fallback_->predict(request);
        response.backend_id = id();
        return response;
    }
    return {"", 0.0, id()};
}

std::vector<ScriptEntry> load_script(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open script " + path.string());
    std::vector<ScriptEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const Json doc = Json::parse(line);
            ScriptEntry entry;
            entry.episode_id = doc.at("episode_id").get<std::string>();
            entry.step_index = doc.at("step_index").get<std::size_t>();
            entry.text = doc.value("text", std::string());
            entry.fail = doc.value("fail", false);
            entries.push_back(std::move(entry));
        } catch (const std::exception& e) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad script line: " + e.what());
        }
    }
    return entries;
}

std::string_view to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::oracle: return "oracle";
        case BackendKind::scripted: return "scripted";
        case BackendKind::http: return "http";
    }
    return "unknown";
}

std::optional<BackendKind> backend_kind_from_string(std::string_view name) {
    for (const auto kind : {BackendKind::oracle, BackendKind::scripted, BackendKind::http}) {
        if (to_string(kind) == name) return kind;
    }
    return std::nullopt;
}

std::unique_ptr<PolicyBackend> make_backend(const BackendConfig& config, const std::vector<Episode>& episodes) {
    switch (config.kind) {
        case BackendKind::oracle: return std::make_unique<OracleBackend>(episodes);
        case BackendKind::scripted:
            if (config.script_path.empty()) throw ConfigError("scripted backend requires a script path");
            return std::make_unique<ScriptedBackend>(load_script(config.script_path), &episodes);
        case BackendKind::http:
            if (config.endpoint.empty()) throw ConfigError("http backend requires an endpoint");
            return std::make_unique<HttpBackend>(config);
    }
    throw ConfigError("unknown backend kind");
}

void check_run_requirements(const std::vector<Episode>& episodes, const RunConfig& config) {
    check_match_config(config.match);
    if (config.mode != PromptMode::coat || !config.flags.has(Component::SD)) return;
    for (const auto& episode : episodes) {
        for (const auto& step : episode.steps) {
            const auto& sd = step.coat.screen_description;
            if (!sd || sd->find_first_not_of(" \t\r\n") == std::string::npos) {
                throw ConfigError("coat mode with component SD requires screen descriptions; missing at " +
                                  episode.episode_id + "#" + std::to_string(step.index));
            }
        }
    }
}

History teacher_forced_history(const Episode& episode, std::size_t step_index, std::size_t max_entries) {
    History history(max_entries);
    for (std::size_t i = 0; i < step_index && i < episode.steps.size(); ++i) {
        const Step& prior = episode.steps[i];
        history = update_history(history, prior.index, prior.coat.action_description.value_or(""),
                                 prior.coat.action_result, prior.gold_action);
    }
    return history;
}

PromptDoc step_prompt(const Episode& episode, std::size_t step_index, const RunConfig& config,
                      std::optional<std::string> overlay_ref) {
    const Step& step = episode.steps.at(step_index);
    PromptInputs inputs;
    inputs.mode = config.mode;
    inputs.query = episode.instruction;
    inputs.observation = &step.observation;
    inputs.rep = config.rep;
    inputs.history = teacher_forced_history(episode, step_index, config.history_max_entries);
    inputs.screen_description = step.coat.screen_description;
    inputs.flags = config.flags;
    inputs.overlay_ref = std::move(overlay_ref);
    return build_prompt(inputs, templates_of(config));
}

PromptDoc step_prompt(const Episode& episode, std::size_t step_index, const RunConfig& config) {
    return step_prompt(episode, step_index, config, std::nullopt);
}

std::vector<StepVerdict> run_episode(const Episode& episode, PolicyBackend& backend, const RunConfig& config,
                                     const StepObserver& observer) {
    if (const auto violations = validate_episode(episode); !violations.empty()) {
        throw Error("episode " + episode.episode_id + " is invalid: " + violations.front().describe());
    }
    std::vector<StepVerdict> verdicts;
    verdicts.reserve(episode.steps.size());
    for (std::size_t t = 0; t < episode.steps.size(); ++t) {
        const Step& step = episode.steps[t];
        PolicyRequest request;
        request.query = episode.instruction;
        request.prompt = step_prompt(episode, t, config, render_overlay(episode, step, config));
        request.step_index = step.index;
        request.episode_id = episode.episode_id;

        StepVerdict verdict;
        verdict.episode_id = episode.episode_id;
        verdict.step_index = step.index;
        try {
            verdict.prediction = backend.predict(request).raw_text;
            auto outcome = parse_action(verdict.prediction, ParseMode::lenient);
            verdict.hit = outcome.hit;
            for (const auto& d : outcome.diagnostics) verdict.diagnostics.push_back(d.message);
            if (outcome.hit) {
                verdict.match = match_action(*outcome.parsed, step.gold_action, step.observation, config.match);
            }
        } catch (const BackendError& e) {
            verdict.hit = false;
            verdict.diagnostics.push_back(std::string("backend error: ") + e.what());
        }
        if (observer) observer(episode, step, request.prompt, verdict);
        verdicts.push_back(std::move(verdict));
    }
    return verdicts;
}

SuiteResult run_suite(const std::vector<Episode>& episodes, PolicyBackend& backend, const RunConfig& config,
                      std::size_t parallelism) {
    if (episodes.empty()) throw DatasetError("no episodes");
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    check_run_requirements(episodes, config);

    std::vector<std::vector<StepVerdict>> per_episode(episodes.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= episodes.size()) return;
            try {
                per_episode[i] = run_episode(episodes[i], backend, config);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(episodes.size());
                return;
            }
        }
    };

    const std::size_t workers = std::min(parallelism, episodes.size());
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    SuiteResult result;
    for (auto& verdicts : per_episode) {
        result.verdicts.insert(result.verdicts.end(), std::make_move_iterator(verdicts.begin()),
                               std::make_move_iterator(verdicts.end()));
    }
    sort_verdicts(result.verdicts);
    result.report = aggregate(result.verdicts, episodes);
    return result;
}

}  // namespace actbench
