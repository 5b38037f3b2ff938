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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "actbench/error.hpp"

namespace actbench {

namespace {

double percent(std::size_t part, std::size_t whole) {
    return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

std::string describe_keys(const std::vector<StepKey>& keys) {
    std::string out;
    constexpr std::size_t kMaxListed = 20;
    for (std::size_t i = 0; i < keys.size() && i < kMaxListed; ++i) {
        if (!out.empty()) out += ", ";
        out += keys[i].first + "#" + std::to_string(keys[i].second);
    }
    if (keys.size() > kMaxListed) out += ", ... (" + std::to_string(keys.size()) + " total)";
    return out;
}

std::string cell(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", value);
    return buf;
}

}  // namespace

void check_match_config(const MatchConfig& config) {
    if (!(config.click_distance_threshold > 0.0 && config.click_distance_threshold <= 1.0)) {
        throw ConfigError("click distance threshold must lie in (0, 1]");
    }
}

std::optional<std::size_t> containing_element(const Observation& screen, const Point& p) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < screen.elements.size(); ++i) {
        const auto& box = screen.elements[i].bbox;
        if (!box.contains(p)) continue;
        if (!best || box.area() < screen.elements[*best].bbox.area()) best = i;
    }
    return best;
}

std::string normalize_text(std::string_view text, TextNormalization mode) {
    if (mode == TextNormalization::exact) return std::string(text);
    const auto space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && space(text[begin])) ++begin;
    while (end > begin && space(text[end - 1])) --end;
    std::string out(text.substr(begin, end - begin));
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

MatchResult match_action(const Action& pred, const Action& gold, const Observation& gold_screen,
                         const MatchConfig& config) {
    MatchResult result;
    result.gold_category = category_of(gold);
    result.type_match = category_of(pred) == result.gold_category;
    if (!result.type_match) return result;

    switch (result.gold_category) {
        case ActionCategory::click: {
            const Point& p = std::get<Click>(pred).point;
            const Point& g = std::get<Click>(gold).point;
            const auto pred_element = containing_element(gold_screen, p);
            const auto gold_element = containing_element(gold_screen, g);
            const bool same_element = pred_element && gold_element && *pred_element == *gold_element;
            result.exact_match =
                same_element || std::hypot(p.y - g.y, p.x - g.x) <= config.click_distance_threshold;
            break;
        }
        case ActionCategory::scroll:
            result.exact_match = std::get<Scroll>(pred).direction == std::get<Scroll>(gold).direction;
            break;
        case ActionCategory::type:
            result.exact_match = normalize_text(std::get<TypeText>(pred).text, config.text_normalization) ==
                                 normalize_text(std::get<TypeText>(gold).text, config.text_normalization);
            break;
        case ActionCategory::press:
            result.exact_match = std::get<Press>(pred).button == std::get<Press>(gold).button;
            break;
        case ActionCategory::stop:
            result.exact_match =
                !config.stop_state_strict || std::get<Stop>(pred).state == std::get<Stop>(gold).state;
            break;
    }
    return result;
}

double episode_goal_progress(std::span<const bool> step_matches) {
    if (step_matches.empty()) throw Error("goal progress of an episode with no steps is undefined");
    const auto first_error = std::find(step_matches.begin(), step_matches.end(), false);
    return static_cast<double>(first_error - step_matches.begin()) / static_cast<double>(step_matches.size());
}

double episode_goal_progress(const std::vector<bool>& step_matches) {
    if (step_matches.empty()) throw Error("goal progress of an episode with no steps is undefined");
    std::size_t prefix = 0;
    while (prefix < step_matches.size() && step_matches[prefix]) ++prefix;
    return static_cast<double>(prefix) / static_cast<double>(step_matches.size());
}

double MetricsReport::match_accuracy(ActionCategory category) const {
    return percent(of(category).match_correct, of(category).steps);
}

double MetricsReport::type_accuracy(ActionCategory category) const {
    return percent(of(category).type_correct, of(category).steps);
}

MetricsAccumulator::MetricsAccumulator(const std::vector<Episode>& episodes) : episodes_(&episodes) {
    progress_.resize(episodes.size());
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        episode_pos_.emplace(episodes[i].episode_id, i);
        progress_[i].steps = episodes[i].steps.size();
        progress_[i].first_error = episodes[i].steps.size();
    }
}

void MetricsAccumulator::add(const StepVerdict& verdict) {
    const auto it = episode_pos_.find(verdict.episode_id);
    if (it == episode_pos_.end() || verdict.step_index >= progress_[it->second].steps) {
        unknown_.emplace_back(verdict.episode_id, verdict.step_index);
        return;
    }
    auto& progress = progress_[it->second];
    if (!progress.seen.insert(verdict.step_index).second) {
        duplicates_.emplace_back(verdict.episode_id, verdict.step_index);
        return;
    }
    const Step& step = (*episodes_)[it->second].steps[verdict.step_index];
    auto& counts = per_category_[static_cast<std::size_t>(category_of(step.gold_action))];
    counts.steps += 1;
    const bool parsed = verdict.hit && verdict.match.has_value();
    const bool type_ok = parsed && verdict.match->type_match;
    const bool exact_ok = parsed && verdict.match->exact_match;
    if (parsed) parsed_ += 1;
    if (type_ok) counts.type_correct += 1;
    if (exact_ok) counts.match_correct += 1;
    if (!exact_ok) progress.first_error = std::min(progress.first_error, verdict.step_index);
}

void MetricsAccumulator::merge(const MetricsAccumulator& other) {
    if (other.episodes_ != episodes_) throw Error("cannot merge accumulators over different episode sets");
    for (std::size_t i = 0; i < progress_.size(); ++i) {
        auto& mine = progress_[i];
        const auto& theirs = other.progress_[i];
        for (const std::size_t index : theirs.seen) {
            if (!mine.seen.insert(index).second) duplicates_.emplace_back((*episodes_)[i].episode_id, index);
        }
        mine.first_error = std::min(mine.first_error, theirs.first_error);
    }
    for (std::size_t c = 0; c < per_category_.size(); ++c) {
        per_category_[c].steps += other.per_category_[c].steps;
        per_category_[c].type_correct += other.per_category_[c].type_correct;
        per_category_[c].match_correct += other.per_category_[c].match_correct;
    }
    parsed_ += other.parsed_;
    unknown_.insert(unknown_.end(), other.unknown_.begin(), other.unknown_.end());
    duplicates_.insert(duplicates_.end(), other.duplicates_.begin(), other.duplicates_.end());
}

std::vector<StepKey> MetricsAccumulator::missing_steps() const {
    std::vector<StepKey> missing;
    for (std::size_t i = 0; i < progress_.size(); ++i) {
        for (std::size_t s = 0; s < progress_[i].steps; ++s) {
            if (!progress_[i].seen.contains(s)) missing.emplace_back((*episodes_)[i].episode_id, s);
        }
    }
    return missing;
}

MetricsReport MetricsAccumulator::finish() const {
    std::string problems;
    if (!unknown_.empty()) problems += "unknown steps: " + describe_keys(unknown_) + ". ";
    if (!duplicates_.empty()) problems += "duplicate verdicts: " + describe_keys(duplicates_) + ". ";
    if (const auto missing = missing_steps(); !missing.empty()) {
        problems += "missing verdicts: " + describe_keys(missing) + ". ";
    }
    if (!problems.empty()) {
        problems.pop_back();
        throw VerdictSetError(problems);
    }

    MetricsReport report;
    report.per_category = per_category_;
    report.episode_count = progress_.size();
    std::size_t type_total = 0;
    std::size_t match_total = 0;
    for (const auto& counts : per_category_) {
        report.step_count += counts.steps;
        type_total += counts.type_correct;
        match_total += counts.match_correct;
    }
    report.parsed_count = parsed_;
    report.total_type = percent(type_total, report.step_count);
    report.total_match = percent(match_total, report.step_count);
    report.hit_rate = percent(parsed_, report.step_count);

    double gp_sum = 0.0;
    std::size_t scored = 0;
    for (const auto& progress : progress_) {
        if (progress.steps == 0) continue;
        gp_sum += static_cast<double>(progress.first_error) / static_cast<double>(progress.steps);
        scored += 1;
    }
    report.goal_progress = scored == 0 ? 0.0 : 100.0 * gp_sum / static_cast<double>(scored);
    return report;
}

MetricsReport aggregate(const std::vector<StepVerdict>& verdicts, const std::vector<Episode>& episodes) {
    MetricsAccumulator accumulator(episodes);
    for (const auto& verdict : verdicts) accumulator.add(verdict);
    return accumulator.finish();
}

Json verdict_to_json(const StepVerdict& verdict) {
    Json match = nullptr;
    if (verdict.match) {
        match = {{"gold_category", to_string(verdict.match->gold_category)},
                 {"type_match", verdict.match->type_match},
                 {"exact_match", verdict.match->exact_match}};
    }
    return {{"episode_id", verdict.episode_id},
            {"step_index", verdict.step_index},
            {"prediction", verdict.prediction},
            {"hit", verdict.hit},
            {"match", std::move(match)},
            {"diagnostics", verdict.diagnostics}};
}

StepVerdict verdict_from_json(const Json& doc) {
    StepVerdict verdict;
    try {
        verdict.episode_id = doc.at("episode_id").get<std::string>();
        verdict.step_index = doc.at("step_index").get<std::size_t>();
        verdict.prediction = doc.at("prediction").get<std::string>();
        verdict.hit = doc.at("hit").get<bool>();
        const Json& match = doc.at("match");
        if (!match.is_null()) {
            MatchResult result;
            const auto category = category_from_string(match.at("gold_category").get<std::string>());
            if (!category) throw Error("unknown gold_category");
            result.gold_category = *category;
            result.type_match = match.at("type_match").get<bool>();
            result.exact_match = match.at("exact_match").get<bool>();
            verdict.match = result;
        }
        if (const auto it = doc.find("diagnostics"); it != doc.end()) {
            verdict.diagnostics = it->get<std::vector<std::string>>();
        }
    } catch (const Json::exception& e) {
        throw Error(std::string("bad verdict record: ") + e.what());
    }
    if (verdict.match && !verdict.hit) throw Error("bad verdict record: match present on a parse miss");
    return verdict;
}

void write_verdicts(const std::filesystem::path& path, const std::vector<StepVerdict>& verdicts) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& verdict : verdicts) out << verdict_to_json(verdict).dump() << '\n';
}

std::vector<StepVerdict> read_verdicts(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<StepVerdict> verdicts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            verdicts.push_back(verdict_from_json(Json::parse(line)));
        } catch (const std::exception& e) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return verdicts;
}

void sort_verdicts(std::vector<StepVerdict>& verdicts) {
    std::sort(verdicts.begin(), verdicts.end(), [](const StepVerdict& a, const StepVerdict& b) {
        return std::tie(a.episode_id, a.step_index) < std::tie(b.episode_id, b.step_index);
    });
}

Json report_to_json(const MetricsReport& report) {
    Json categories = Json::object();
    // Table column order.
    for (const auto category : {ActionCategory::scroll, ActionCategory::click, ActionCategory::type,
                                ActionCategory::press, ActionCategory::stop}) {
        const auto& counts = report.of(category);
        categories[std::string(to_string(category))] = {{"steps", counts.steps},
                                                        {"type_correct", counts.type_correct},
                                                        {"match_correct", counts.match_correct},
                                                        {"type", report.type_accuracy(category)},
                                                        {"match", report.match_accuracy(category)}};
    }
    return {{"episodes", report.episode_count},
            {"steps", report.step_count},
            {"categories", std::move(categories)},
            {"total", {{"type", report.total_type}, {"match", report.total_match}}},
            {"goal_progress", report.goal_progress},
            {"format_hit", {{"parsed", report.parsed_count}, {"rate", report.hit_rate}}}};
}

std::string render_markdown(const MetricsReport& report) {
    const auto acc = [&](ActionCategory category, bool type) {
        if (report.of(category).steps == 0) return std::string("-");
        return cell(type ? report.type_accuracy(category) : report.match_accuracy(category));
    };
    const std::vector<std::pair<std::string, std::string>> columns = {
        {"SCROLL", acc(ActionCategory::scroll, false)},
        {"CLICK type", acc(ActionCategory::click, true)},
        {"CLICK match", acc(ActionCategory::click, false)},
        {"TYPE type", acc(ActionCategory::type, true)},
        {"TYPE match", acc(ActionCategory::type, false)},
        {"PRESS", acc(ActionCategory::press, false)},
        {"STOP", acc(ActionCategory::stop, false)},
        {"Total type", cell(report.total_type)},
        {"Total match", cell(report.total_match)},
        {"GP", cell(report.goal_progress)},
    };
    std::ostringstream out;
    out << '|';
    for (const auto& [name, value] : columns) out << ' ' << name << " |";
    out << "\n|";
    for (std::size_t i = 0; i < columns.size(); ++i) out << " ---: |";
    out << "\n|";
    for (const auto& [name, value] : columns) out << ' ' << value << " |";
    out << "\n\nepisodes: " << report.episode_count << ", steps: " << report.step_count
        << ", format hit rate: " << cell(report.hit_rate) << '\n';
    return out.str();
}

}  // namespace actbench
