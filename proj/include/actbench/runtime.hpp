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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "actbench/episode.hpp"
#include "actbench/matching.hpp"
#include "actbench/prompt.hpp"

namespace actbench {

struct PolicyRequest {
    std::string query;
    PromptDoc prompt;
    std::size_t step_index = 0;
    std::string episode_id;
};

struct PolicyResponse {
    std::string raw_text;  // may be empty; scored as a parse miss
    double latency_ms = 0.0;
    std::string backend_id;
};

// Backends must be safe to call from several workers at once. A hard
// failure is reported by throwing BackendError.
class PolicyBackend {
public:
    virtual ~PolicyBackend() = default;
    virtual PolicyResponse predict(const PolicyRequest& request) = 0;
    [[nodiscard]] virtual std::string id() const = 0;
};

// Canonical form of the step's gold action.
std::string oracle_predict(const Step& step);

// Replays gold actions of the episodes it was built over.
class OracleBackend : public PolicyBackend {
public:
    explicit OracleBackend(const std::vector<Episode>& episodes);
    PolicyResponse predict(const PolicyRequest& request) override;
    [[nodiscard]] std::string id() const override { return "oracle"; }

private:
    std::map<StepKey, std::string> answers_;
};

struct ScriptEntry {
    std::string episode_id;
    std::size_t step_index = 0;
    std::string text;
    bool fail = false;  // simulate a backend failure at this step
};

// Answers from a fixed script keyed by (episode_id, step_index). Steps the
// script does not list replay the gold action when episodes are supplied
// and get an empty answer otherwise.
class ScriptedBackend : public PolicyBackend {
public:
    ScriptedBackend(const std::vector<ScriptEntry>& entries, const std::vector<Episode>* fallback = nullptr);
    PolicyResponse predict(const PolicyRequest& request) override;
    [[nodiscard]] std::string id() const override { return "scripted"; }

private:
    std::map<StepKey, ScriptEntry> script_;
    std::optional<OracleBackend> fallback_;
};

// JSON lines: {"episode_id": str, "step_index": int, "text": str, "fail": bool?}
std::vector<ScriptEntry> load_script(const std::filesystem::path& path);

enum class BackendKind { oracle, scripted, http };
enum class ImageTransport { ref, b64 };
enum class WireFormat { core, openai };

std::string_view to_string(BackendKind kind);
std::optional<BackendKind> backend_kind_from_string(std::string_view name);

struct BackendConfig {
    BackendKind kind = BackendKind::oracle;
    // http only
    std::string endpoint;
    std::string auth_env;  // name of the variable holding the bearer token
    int timeout_ms = 30000;
    int max_retries = 2;
    int max_concurrent = 4;
    double requests_per_minute = 0.0;  // 0: unlimited
    int backoff_base_ms = 500;
    int max_tokens = 512;
    ImageTransport images = ImageTransport::ref;
    WireFormat wire = WireFormat::core;
    std::string model;                  // openai wire only
    std::filesystem::path image_root;   // resolves relative refs for b64 transport
    // scripted only
    std::filesystem::path script_path;
};

// Throws ConfigError: http without endpoint, negative retries, unset auth
// variable, missing or unreadable script.
std::unique_ptr<PolicyBackend> make_backend(const BackendConfig& config, const std::vector<Episode>& episodes);

struct RunConfig {
    PromptMode mode = PromptMode::coat;
    UiRepresentation rep = UiRepresentation::txt;
    ComponentSet flags = ComponentSet::all();
    MatchConfig match;
    std::size_t history_max_entries = 0;  // 0: unbounded
    // With rep=tag and a render directory, overlays are drawn from the
    // screenshots under dataset_root and referenced in prompts.
    std::optional<std::filesystem::path> render_dir;
    std::filesystem::path dataset_root;
    const TemplateSet* templates = nullptr;  // builtin when null
};

// Throws ConfigError naming the first component the episodes cannot supply
// (currently SD in coat mode). Checked before any backend call.
void check_run_requirements(const std::vector<Episode>& episodes, const RunConfig& config);

// Gold history for step `step_index`: descriptions and results of every
// earlier step, independent of what any backend answered.
History teacher_forced_history(const Episode& episode, std::size_t step_index, std::size_t max_entries = 0);

PromptDoc step_prompt(const Episode& episode, std::size_t step_index, const RunConfig& config);

// Called after each step with the prompt, the raw response and the verdict.
using StepObserver = std::function<void(const Episode&, const Step&, const PromptDoc&, const StepVerdict&)>;

// Teacher-forced replay; one verdict per step. Backend failures become
// parse misses carrying a "backend error" diagnostic, so an episode never aborts.
std::vector<StepVerdict> run_episode(const Episode& episode, PolicyBackend& backend, const RunConfig& config,
                                     const StepObserver& observer = {});

struct SuiteResult {
    std::vector<StepVerdict> verdicts;  // sorted by (episode_id, step_index)
    MetricsReport report;
};

// Bounded-concurrency run over every episode; output is independent of
// `parallelism`. Throws DatasetError for an empty dataset.
SuiteResult run_suite(const std::vector<Episode>& episodes, PolicyBackend& backend, const RunConfig& config,
                      std::size_t parallelism);

}  // namespace actbench
