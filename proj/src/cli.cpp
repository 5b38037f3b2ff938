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

#include "actbench/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>

#include "actbench/error.hpp"
#include "actbench/runtime.hpp"
#include "actbench/sampler.hpp"

namespace actbench {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
    std::string dataset;
    std::string split = "test";
    std::string out;
    std::uint64_t seed = 0;
    std::size_t parallelism = 1;
};

struct BackendOptions {
    std::string kind = "oracle";
    std::string endpoint;
    std::string auth_env;
    std::string script;
    std::string wire = "core";
    std::string images = "ref";
    std::string model;
    int timeout_ms = 30000;
    int max_retries = 2;
    int max_concurrent = 4;
    double requests_per_minute = 0.0;
};

struct RunOptions {
    std::string mode = "coat";
    std::string rep = "txt";
    std::string flags = "SD,PAR,AT,AD";
    double click_threshold = 0.14;
    bool render = false;
    std::size_t history_max = 0;
    std::string templates;
};

struct Options {
    CommonOptions common;
    BackendOptions backend;
    RunOptions run;
    std::string episode;
    std::string kind;
    std::string corpus;
    std::vector<std::string> quotas;
    std::size_t cluster_quota = 3;
    std::size_t cell_quota = 3;
    std::size_t cluster_threshold = 50;
    std::string manifest_split = "train";
    std::vector<std::string> verdict_files;
};

void add_dataset_options(CLI::App& cmd, CommonOptions& c, bool require_out) {
    cmd.add_option("--dataset", c.dataset, "Dataset root containing manifest.json")->required();
    cmd.add_option("--split", c.split, "train, test or all")->capture_default_str();
    auto* out = cmd.add_option("--out", c.out, "Output directory");
    if (require_out) out->required();
    cmd.add_option("--seed", c.seed, "Seed for every randomized choice")->capture_default_str();
    cmd.add_option("--parallelism", c.parallelism, "Concurrent episodes")->capture_default_str();
}

void add_backend_options(CLI::App& cmd, BackendOptions& b) {
    cmd.add_option("--backend", b.kind, "oracle, scripted or http")->capture_default_str();
    cmd.add_option("--endpoint", b.endpoint, "HTTP endpoint URL");
    cmd.add_option("--auth-env", b.auth_env, "Environment variable holding the bearer token");
    cmd.add_option("--script", b.script, "JSON lines script for the scripted backend");
    cmd.add_option("--wire", b.wire, "core or openai")->capture_default_str();
    cmd.add_option("--images", b.images, "ref or b64")->capture_default_str();
    cmd.add_option("--model", b.model, "Model name for the openai wire format");
    cmd.add_option("--timeout-ms", b.timeout_ms)->capture_default_str();
    cmd.add_option("--max-retries", b.max_retries)->capture_default_str();
    cmd.add_option("--max-concurrent", b.max_concurrent)->capture_default_str();
    cmd.add_option("--requests-per-minute", b.requests_per_minute, "0 for unlimited")->capture_default_str();
}

void add_run_options(CLI::App& cmd, RunOptions& r) {
    cmd.add_option("--mode", r.mode, "standard, coa, cot or coat")->capture_default_str();
    cmd.add_option("--rep", r.rep, "txt or tag")->capture_default_str();
    cmd.add_option("--flags", r.flags, "coat components, e.g. SD,PAR,AT,AD")->capture_default_str();
    cmd.add_option("--click-threshold", r.click_threshold)->capture_default_str();
    cmd.add_flag("--render", r.render, "Write set-of-mark overlays under <out>/overlays");
    cmd.add_option("--history-max", r.history_max, "Keep only the latest N history entries (0: all)");
    cmd.add_option("--templates", r.templates, "Directory of prompt template overrides");
}

Split parse_split(const std::string& name) {
    const auto split = split_from_string(name);
    if (!split) throw ConfigError("unknown split '" + name + "'");
    return *split;
}

BackendConfig backend_config(const BackendOptions& b, const fs::path& dataset_root) {
    BackendConfig config;
    const auto kind = backend_kind_from_string(b.kind);
    if (!kind) throw ConfigError("unknown backend '" + b.kind + "'");
    config.kind = *kind;
    config.endpoint = b.endpoint;
    config.auth_env = b.auth_env;
    config.script_path = b.script;
    config.model = b.model;
    config.timeout_ms = b.timeout_ms;
    config.max_retries = b.max_retries;
    config.max_concurrent = b.max_concurrent;
    config.requests_per_minute = b.requests_per_minute;
    config.image_root = dataset_root;
    if (b.wire == "core") {
        config.wire = WireFormat::core;
    } else if (b.wire == "openai") {
        config.wire = WireFormat::openai;
    } else {
        throw ConfigError("unknown wire format '" + b.wire + "'");
    }
    if (b.images == "ref") {
        config.images = ImageTransport::ref;
    } else if (b.images == "b64") {
        config.images = ImageTransport::b64;
    } else {
        throw ConfigError("unknown image transport '" + b.images + "'");
    }
    if (config.max_retries < 0) throw ConfigError("max retries must be >= 0");
    if (config.kind == BackendKind::http && config.endpoint.empty()) {
        throw ConfigError("http backend requires --endpoint");
    }
    return config;
}

struct RunSetup {
    RunConfig config;
    std::optional<TemplateSet> templates;
};

void configure_run(RunSetup& setup, const RunOptions& r, const fs::path& dataset_root,
                   const std::optional<fs::path>& overlay_dir) {
    RunConfig& config = setup.config;
    const auto mode = prompt_mode_from_string(r.mode);
    if (!mode) throw ConfigError("unknown mode '" + r.mode + "'");
    const auto rep = ui_representation_from_string(r.rep);
    if (!rep) throw ConfigError("unknown UI representation '" + r.rep + "'");
    config.mode = *mode;
    config.rep = *rep;
    config.flags = parse_components(r.flags);
    config.match.click_distance_threshold = r.click_threshold;
    check_match_config(config.match);
    config.history_max_entries = r.history_max;
    config.dataset_root = dataset_root;
    if (r.render && config.rep == UiRepresentation::tag && overlay_dir) {
        fs::create_directories(*overlay_dir);
        config.render_dir = *overlay_dir;
    }
    if (!r.templates.empty()) {
        setup.templates = TemplateSet::load_overrides(r.templates);
        config.templates = &*setup.templates;
    }
}

void ensure_outside_dataset(const fs::path& out, const fs::path& dataset) {
    const auto a = fs::weakly_canonical(out);
    const auto b = fs::weakly_canonical(dataset);
    auto it = std::mismatch(b.begin(), b.end(), a.begin(), a.end());
    if (it.first == b.end()) throw ConfigError("output directory must not be inside the dataset");
}

LoadedDataset load_checked(const CommonOptions& c, std::ostream& err) {
    LoadedDataset data = load_dataset(c.dataset, parse_split(c.split));
    for (const auto& issue : data.report.excluded) err << "excluded " << issue.path << ": " << issue.reason << "\n";
    for (const auto& issue : data.report.warnings) err << "warning " << issue.path << ": " << issue.reason << "\n";
    if (data.episodes.empty()) throw DatasetError("no valid episodes in " + c.dataset);
    return data;
}

Json run_header(const Options& o, const RunConfig& config) {
    return {{"command", "evaluate"},
            {"dataset", o.common.dataset},
            {"split", o.common.split},
            {"backend", o.backend.kind},
            {"mode", std::string(to_string(config.mode))},
            {"rep", std::string(to_string(config.rep))},
            {"flags", config.mode == PromptMode::coat ? config.flags.to_string() : std::string()},
            {"click_threshold", config.match.click_distance_threshold},
            {"seed", o.common.seed},
            {"templates", (config.templates ? *config.templates : TemplateSet::builtin()).version()}};
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void write_reports(const fs::path& dir, const Json& header, const MetricsReport& report) {
    write_json_file(dir / "report.json", Json{{"run", header}, {"metrics", report_to_json(report)}});
    write_text_file(dir / "report.md", render_markdown(report));
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
    const LoadedDataset data = load_checked(o.common, err);
    const fs::path out_dir = o.common.out;
    ensure_outside_dataset(out_dir, data.root);
    RunSetup setup;
    configure_run(setup, o.run, data.root, out_dir / "overlays");
    check_run_requirements(data.episodes, setup.config);
    auto backend = make_backend(backend_config(o.backend, data.root), data.episodes);

    fs::create_directories(out_dir);
    const SuiteResult result = run_suite(data.episodes, *backend, setup.config, o.common.parallelism);
    write_verdicts(out_dir / "verdicts.jsonl", result.verdicts);
    write_reports(out_dir, run_header(o, setup.config), result.report);
    out << render_markdown(result.report);
    return kExitOk;
}

std::string verdict_word(const StepVerdict& v) {
    if (!v.hit || !v.match) return "parse-miss";
    if (v.match->exact_match) return "match";
    return v.match->type_match ? "type-only" : "mismatch";
}

int cmd_replay(const Options& o, std::ostream& out, std::ostream& err) {
    const LoadedDataset data = load_checked(o.common, err);
    const Episode* episode = data.find(o.episode);
    if (episode == nullptr) {
        err << "unknown episode '" << o.episode << "'\n";
        return kExitUnknownEpisode;
    }
    std::optional<fs::path> out_dir;
    if (!o.common.out.empty()) {
        out_dir = fs::path(o.common.out);
        ensure_outside_dataset(*out_dir, data.root);
    }
    RunSetup setup;
    configure_run(setup, o.run, data.root,
                  out_dir ? std::optional<fs::path>(*out_dir / "overlays") : std::nullopt);
    const std::vector<Episode> one{*episode};
    check_run_requirements(one, setup.config);
    auto backend = make_backend(backend_config(o.backend, data.root), one);

    out << "episode " << episode->episode_id << ": " << episode->instruction << "\n";
    const auto observer = [&](const Episode&, const Step& step, const PromptDoc& prompt, const StepVerdict& v) {
        out << "step " << step.index << ": images=" << prompt.image_count()
            << " segments=" << prompt.user_segments.size() << " prompt_chars=" << prompt.all_text().size() << "\n";
        out << "  gold: " << serialize_action(step.gold_action) << "\n";
        out << "  prediction: " << v.prediction << "\n";
        out << "  verdict: " << verdict_word(v) << "\n";
        for (const auto& d : v.diagnostics) out << "  note: " << d << "\n";
    };
    const auto verdicts = run_episode(*episode, *backend, setup.config, observer);
    const MetricsReport report = aggregate(verdicts, one);
    char summary[128];
    std::snprintf(summary, sizeof(summary), "match %.2f, goal progress %.2f\n", report.total_match,
                  report.goal_progress);
    out << summary;
    if (out_dir) {
        fs::create_directories(*out_dir);
        write_verdicts(*out_dir / "verdicts.jsonl", verdicts);
        Json header = run_header(o, setup.config);
        header["command"] = "replay";
        header["episode"] = episode->episode_id;
        write_reports(*out_dir, header, report);
    }
    return kExitOk;
}

QuotaMap parse_quotas(const std::vector<std::string>& entries) {
    QuotaMap quotas = default_quotas();
    for (const auto& entry : entries) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) throw ConfigError("quota must look like subset=N: " + entry);
        const auto subset = subset_from_string(entry.substr(0, eq));
        if (!subset) throw ConfigError("unknown subset in quota: " + entry);
        std::size_t value = 0;
        try {
            value = std::stoul(entry.substr(eq + 1));
        } catch (const std::exception&) {
            throw ConfigError("quota value is not a number: " + entry);
        }
        if (value < 1) throw ConfigError("quota must be positive: " + entry);
        quotas[*subset] = value;
    }
    return quotas;
}

int cmd_sample(const Options& o, std::ostream& out, std::ostream&) {
    SamplerOptions options;
    options.seed = o.common.seed;
    options.quotas = parse_quotas(o.quotas);
    options.per_cluster_quota = o.cluster_quota;
    options.per_cell_quota = o.cell_quota;
    options.cluster_threshold = o.cluster_threshold;
    if (options.per_cluster_quota < 1 || options.per_cell_quota < 1) throw ConfigError("quotas must be positive");
    const Split split = parse_split(o.manifest_split);
    if (split == Split::all) throw ConfigError("manifest split must be train or test");

    const auto records = read_corpus(o.corpus);
    const SampleResult result = run_sampler(records, options);
    const fs::path out_dir = o.common.out;
    fs::create_directories(out_dir);
    write_json_file(out_dir / kManifestName, manifest_to_json(sample_manifest(result, split)));
    write_json_file(out_dir / "clusters.json", cluster_report(result, options));
    std::size_t flagged = 0;
    for (const auto& c : result.clusters) flagged += c.needs_review ? 1 : 0;
    out << "sampled " << result.episode_ids.size() << " episodes from " << records.size() << " instructions; "
        << result.clusters.size() << " clusters (" << flagged << " flagged for review)\n";
    return kExitOk;
}

const std::optional<std::string>& existing_annotation(const Step& step, AnnotationKind kind) {
    switch (kind) {
        case AnnotationKind::screen_description: return step.coat.screen_description;
        case AnnotationKind::action_grounding: return step.coat.action_description;
        case AnnotationKind::action_thinking: return step.coat.action_think;
        case AnnotationKind::action_result: return step.coat.action_result;
    }
    return step.coat.screen_description;
}

int cmd_annotate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto kind = annotation_kind_from_string(o.kind);
    if (!kind) throw ConfigError("unknown annotation kind '" + o.kind + "'");
    const LoadedDataset data = load_checked(o.common, err);
    const fs::path out_dir = o.common.out;
    ensure_outside_dataset(out_dir, data.root);
    RunSetup setup;
    configure_run(setup, o.run, data.root, std::nullopt);
    auto backend = make_backend(backend_config(o.backend, data.root), data.episodes);
    const TemplateSet& templates = setup.config.templates ? *setup.config.templates : TemplateSet::builtin();

    fs::create_directories(out_dir);
    const fs::path sidecar = out_dir / ("annotations." + std::string(to_string(*kind)) + ".jsonl");
    std::ofstream file(sidecar, std::ios::binary);
    if (!file) throw Error("cannot write " + sidecar.string());

    std::size_t written = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
    for (const auto& episode : data.episodes) {
        for (std::size_t t = 0; t < episode.steps.size(); ++t) {
            const Step& step = episode.steps[t];
            const bool terminal = t + 1 == episode.steps.size();
            if (existing_annotation(step, *kind) || (*kind == AnnotationKind::action_result && terminal)) {
                ++skipped;
                continue;
            }
            AnnotationInputs inputs;
            inputs.kind = *kind;
            inputs.query = episode.instruction;
            inputs.gold = step.gold_action;
            inputs.before_ref = step.observation.screenshot_ref;
            if (!terminal) inputs.after_ref = episode.steps[t + 1].observation.screenshot_ref;

            PolicyRequest request;
            request.query = episode.instruction;
            request.prompt = build_annotation_prompt(inputs, templates);
            request.step_index = step.index;
            request.episode_id = episode.episode_id;
            try {
                const auto response = backend->predict(request);
                const Json entry = {{"episode_id", episode.episode_id},
                                    {"step_index", step.index},
                                    {"kind", std::string(to_string(*kind))},
                                    {"text", response.raw_text}};
                file << entry.dump() << "\n";
                ++written;
            } catch (const BackendError& e) {
                err << "backend error at " << episode.episode_id << "#" << step.index << ": " << e.what() << "\n";
                ++failed;
            }
        }
    }
    out << "wrote " << written << " " << to_string(*kind) << " candidates to " << sidecar.string() << " (" << skipped
        << " skipped, " << failed << " failed)\n";
    return failed == 0 ? kExitOk : kExitFailure;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream& err) {
    const LoadedDataset data = load_checked(o.common, err);
    std::vector<StepVerdict> verdicts;
    for (const auto& path : o.verdict_files) {
        auto part = read_verdicts(path);
        verdicts.insert(verdicts.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    const MetricsReport report = aggregate(verdicts, data.episodes);
    if (!o.common.out.empty()) {
        const fs::path out_dir = o.common.out;
        fs::create_directories(out_dir);
        Json header = {{"command", "report"}, {"dataset", o.common.dataset}, {"split", o.common.split}};
        header["verdicts"] = o.verdict_files;
        write_reports(out_dir, header, report);
    }
    out << render_markdown(report);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Evaluation harness for smartphone GUI agents", "actbench"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML config file with one [subcommand] table per subcommand");
    Options ev;
    Options rp;
    Options sa;
    Options an;
    Options re;

    auto* evaluate = app.add_subcommand("evaluate", "Score a backend on a dataset split");
    add_dataset_options(*evaluate, ev.common, true);
    add_backend_options(*evaluate, ev.backend);
    add_run_options(*evaluate, ev.run);

    auto* replay = app.add_subcommand("replay", "Step through one episode");
    add_dataset_options(*replay, rp.common, false);
    add_backend_options(*replay, rp.backend);
    add_run_options(*replay, rp.run);
    replay->add_option("--episode", rp.episode, "Episode id")->required();

    auto* sample = app.add_subcommand("sample", "Sample instructions and episodes from a corpus");
    sample->add_option("--corpus", sa.corpus, "JSON lines instruction corpus")->required()->check(CLI::ExistingFile);
    sample->add_option("--out", sa.common.out, "Output directory")->required();
    sample->add_option("--seed", sa.common.seed)->capture_default_str();
    sample->add_option("--quota", sa.quotas, "Per-instruction quota, e.g. general=3 (repeatable)");
    sample->add_option("--cluster-quota", sa.cluster_quota, "Instructions per cluster")->capture_default_str();
    sample->add_option("--cell-quota", sa.cell_quota, "Instructions per (website, object) cell")->capture_default_str();
    sample->add_option("--cluster-threshold", sa.cluster_threshold, "Cluster verb groups larger than this")
        ->capture_default_str();
    sample->add_option("--manifest-split", sa.manifest_split, "Split recorded in the manifest")->capture_default_str();

    auto* annotate = app.add_subcommand("annotate", "Generate candidate annotations into a sidecar file");
    add_dataset_options(*annotate, an.common, true);
    add_backend_options(*annotate, an.backend);
    add_run_options(*annotate, an.run);
    annotate->add_option("--kind", an.kind, "screen_description, action_grounding, action_thinking, action_result")
        ->required();

    auto* report = app.add_subcommand("report", "Recompute metrics from stored verdicts");
    add_dataset_options(*report, re.common, false);
    report->add_option("--verdicts", re.verdict_files, "Verdict files (repeatable)")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (evaluate->parsed()) return cmd_evaluate(ev, out, err);
        if (replay->parsed()) return cmd_replay(rp, out, err);
        if (sample->parsed()) return cmd_sample(sa, out, err);
        if (annotate->parsed()) return cmd_annotate(an, out, err);
        if (report->parsed()) return cmd_report(re, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DatasetError& e) {
        err << "dataset error: " << e.what() << "\n";
        return kExitDataset;
    } catch (const VerdictSetError& e) {
        err << "incomplete verdicts: " << e.what() << "\n";
        return kExitIncompleteVerdicts;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace actbench
