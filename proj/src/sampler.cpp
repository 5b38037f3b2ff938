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

#include "actbench/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "actbench/error.hpp"

namespace actbench {

namespace {

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_token_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

double dot(const SparseVector& a, const std::vector<double>& dense) {
    double sum = 0.0;
    for (const auto& [term, w] : a.entries) sum += w * dense[term];
    return sum;
}

double dense_norm(const std::vector<double>& v) {
    double sum = 0.0;
    for (const double x : v) sum += x * x;
    return std::sqrt(sum);
}

std::vector<double> densify(const SparseVector& v, std::size_t dim) {
    std::vector<double> out(dim, 0.0);
    for (const auto& [term, w] : v.entries) out[term] = w;
    return out;
}

std::vector<InstructionRecord> sample_members(const std::vector<Cluster>& clusters, std::size_t quota,
                                              SeededRng& rng) {
    if (quota < 1) throw Error("quota per cluster must be >= 1");
    std::vector<InstructionRecord> out;
    for (const auto& cluster : clusters) {
        for (const std::size_t i : rng.choose(cluster.members.size(), std::min(quota, cluster.members.size()))) {
            out.push_back(cluster.members[i]);
        }
    }
    return out;
}

std::vector<std::string> sample_episodes(const std::vector<InstructionRecord>& records, const QuotaMap& quotas,
                                         SeededRng& rng) {
    for (const auto& [subset, x] : quotas) {
        if (x < 1) throw Error("quota for " + std::string(to_string(subset)) + " must be positive");
    }
    std::vector<std::string> out;
    for (const auto& record : records) {
        const auto it = quotas.find(record.subset);
        if (it == quotas.end()) {
            throw Error("no per-instruction quota for subset " + std::string(to_string(record.subset)));
        }
        const auto picks = rng.choose(record.episode_ids.size(), std::min(it->second, record.episode_ids.size()));
        for (const std::size_t i : picks) out.push_back(record.episode_ids[i]);
    }
    return out;
}

std::vector<Cluster> cluster_with(const std::vector<InstructionRecord>& group, std::size_t k, std::uint64_t seed,
                                  const std::string& label) {
    if (k < 1) throw Error("k must be >= 1");
    if (k > group.size()) {
        throw Error("k = " + std::to_string(k) + " exceeds group size " + std::to_string(group.size()));
    }
    std::vector<std::string> texts;
    texts.reserve(group.size());
    for (const auto& r : group) texts.push_back(r.text);
    const auto labels = kmeans_cosine(tfidf_vectors(texts), k, seed);
    const std::size_t count = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<Cluster> clusters(count);
    for (std::size_t c = 0; c < count; ++c) clusters[c].label = label + "#" + std::to_string(c);
    for (std::size_t i = 0; i < group.size(); ++i) clusters[labels[i]].members.push_back(group[i]);
    return clusters;
}

std::string attribute_or(const InstructionRecord& r, const std::string& key) {
    const auto it = r.attributes.find(key);
    return it == r.attributes.end() || it->second.empty() ? "unknown" : it->second;
}

}  // namespace

std::size_t SeededRng::below(std::size_t n) {
    if (n == 0) throw Error("SeededRng::below(0)");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    for (;;) {
        const std::uint64_t draw = engine_();
        if (draw < limit) return static_cast<std::size_t>(draw % bound);
    }
}

std::vector<std::size_t> SeededRng::choose(std::size_t n, std::size_t count) {
    if (count > n) throw Error("cannot choose " + std::to_string(count) + " of " + std::to_string(n));
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < count; ++i) std::swap(pool[i], pool[i + below(n - i)]);
    pool.resize(count);
    return pool;
}

std::string leading_verb(const std::string& text) {
    std::size_t begin = 0;
    while (begin < text.size() && is_space(text[begin])) ++begin;
    std::size_t end = begin;
    while (end < text.size() && !is_space(text[end])) ++end;
    std::string verb = text.substr(begin, end - begin);
    std::transform(verb.begin(), verb.end(), verb.begin(), ascii_lower);
    return verb;
}

std::map<std::string, std::vector<InstructionRecord>> group_by_verb(const std::vector<InstructionRecord>& records) {
    std::map<std::string, std::vector<InstructionRecord>> groups;
    for (const auto& r : records) groups[leading_verb(r.text)].push_back(r);
    return groups;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (const char c : text) {
        if (is_token_char(c)) {
            current.push_back(ascii_lower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

double SparseVector::weight(std::size_t term) const {
    const auto it = std::lower_bound(entries.begin(), entries.end(), term,
                                     [](const auto& e, std::size_t t) { return e.first < t; });
    return it != entries.end() && it->first == term ? it->second : 0.0;
}

double SparseVector::norm() const {
    double sum = 0.0;
    for (const auto& [term, w] : entries) sum += w * w;
    return std::sqrt(sum);
}

std::size_t TfidfMatrix::term(const std::string& token) const {
    const auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), token);
    return it != vocabulary.end() && *it == token ? static_cast<std::size_t>(it - vocabulary.begin()) : npos;
}

TfidfMatrix tfidf_vectors(const std::vector<std::string>& texts) {
    TfidfMatrix matrix;
    std::vector<std::vector<std::string>> docs;
    docs.reserve(texts.size());
    std::set<std::string> vocab;
    for (const auto& t : texts) {
        docs.push_back(tokenize(t));
        vocab.insert(docs.back().begin(), docs.back().end());
    }
    matrix.vocabulary.assign(vocab.begin(), vocab.end());

    std::vector<std::map<std::size_t, std::size_t>> counts(docs.size());
    std::vector<std::size_t> df(matrix.vocabulary.size(), 0);
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const auto& tok : docs[d]) ++counts[d][matrix.term(tok)];
        for (const auto& [term, n] : counts[d]) ++df[term];
    }

    const double n_docs = static_cast<double>(docs.size());
    matrix.rows.resize(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        auto& row = matrix.rows[d];
        const double length = static_cast<double>(docs[d].size());
        for (const auto& [term, n] : counts[d]) {
            const double w = (static_cast<double>(n) / length) * std::log(n_docs / static_cast<double>(df[term]));
            if (w != 0.0) row.entries.emplace_back(term, w);
        }
        const double norm = row.norm();
        if (norm > 0.0) {
            for (auto& e : row.entries) e.second /= norm;
        }
    }
    return matrix;
}

double cosine_distance(const SparseVector& a, const std::vector<double>& centroid) {
    const double na = a.norm();
    const double nc = dense_norm(centroid);
    if (na == 0.0 || nc == 0.0) return 1.0;
    return 1.0 - dot(a, centroid) / (na * nc);
}

namespace {

struct KmeansRun {
    std::vector<std::size_t> labels;
    double cost = 0.0;
};

std::vector<std::vector<double>> plus_plus_seeds(const TfidfMatrix& matrix, std::size_t k, SeededRng& rng) {
    const std::size_t n = matrix.rows.size();
    const std::size_t dim = matrix.vocabulary.size();
    std::vector<std::vector<double>> centroids;
    centroids.push_back(densify(matrix.rows[rng.below(n)], dim));
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = cosine_distance(matrix.rows[i], centroids.back());
            nearest[i] = std::min(nearest[i], d * d);
            total += nearest[i];
        }
        std::size_t pick = rng.below(n);
        if (total > 0.0) {
            double target = rng.unit() * total;
            for (std::size_t i = 0; i < n; ++i) {
                if (nearest[i] <= 0.0) continue;
                pick = i;
                target -= nearest[i];
                if (target < 0.0) break;
            }
        }
        centroids.push_back(densify(matrix.rows[pick], dim));
    }
    return centroids;
}

KmeansRun lloyd(const TfidfMatrix& matrix, std::vector<std::vector<double>> centroids, std::size_t max_iterations) {
    const std::size_t n = matrix.rows.size();
    const std::size_t dim = matrix.vocabulary.size();
    KmeansRun run;
    run.labels.assign(n, 0);
    std::vector<double> distance(n, 0.0);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        bool changed = iter == 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_distance = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < centroids.size(); ++c) {
                const double d = cosine_distance(matrix.rows[i], centroids[c]);
                if (d < best_distance) {
                    best_distance = d;
                    best = c;
                }
            }
            if (run.labels[i] != best) changed = true;
            run.labels[i] = best;
            distance[i] = best_distance;
        }
        if (!changed) break;
        std::vector<std::vector<double>> sums(centroids.size(), std::vector<double>(dim, 0.0));
        std::vector<std::size_t> sizes(centroids.size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& [term, w] : matrix.rows[i].entries) sums[run.labels[i]][term] += w;
            ++sizes[run.labels[i]];
        }
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            if (sizes[c] == 0) continue;
            for (auto& x : sums[c]) x /= static_cast<double>(sizes[c]);
            centroids[c] = std::move(sums[c]);
        }
    }
    for (const double d : distance) run.cost += d;
    return run;
}

}  // namespace

std::vector<std::size_t> kmeans_cosine(const TfidfMatrix& matrix, std::size_t k, std::uint64_t seed,
                                       std::size_t max_iterations, std::size_t restarts) {
    const std::size_t n = matrix.rows.size();
    if (k < 1) throw Error("k must be >= 1");
    if (k > n) throw Error("k = " + std::to_string(k) + " exceeds " + std::to_string(n) + " points");

    SeededRng rng(seed);
    KmeansRun best;
    for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
        auto run = lloyd(matrix, plus_plus_seeds(matrix, k, rng), max_iterations);
        if (r == 0 || run.cost < best.cost - 1e-12) best = std::move(run);
    }

    std::vector<std::size_t> remap(k, n);
    std::size_t next = 0;
    for (auto& label : best.labels) {
        if (remap[label] == n) remap[label] = next++;
        label = remap[label];
    }
    return best.labels;
}

std::vector<Cluster> cluster_group(const std::vector<InstructionRecord>& group, std::size_t k, std::uint64_t seed,
                                   const std::string& label) {
    return cluster_with(group, k, seed, label);
}

std::vector<InstructionRecord> balanced_sample(const std::vector<Cluster>& clusters, std::size_t quota,
                                               std::uint64_t seed) {
    SeededRng rng(seed);
    return sample_members(clusters, quota, rng);
}

QuotaMap default_quotas() { return {{Subset::general, 3}, {Subset::install, 3}, {Subset::googleapps, 5}}; }

std::vector<std::string> quota_sample(const std::vector<InstructionRecord>& records, const QuotaMap& quotas,
                                      std::uint64_t seed) {
    SeededRng rng(seed);
    return sample_episodes(records, quotas, rng);
}

SampleResult run_sampler(const std::vector<InstructionRecord>& records, const SamplerOptions& options) {
    if (options.group_size_per_cluster < 1) throw ConfigError("group size per cluster must be >= 1");
    SeededRng rng(options.seed);
    SampleResult result;

    std::vector<InstructionRecord> single;
    std::vector<InstructionRecord> shopping;
    std::vector<InstructionRecord> quota_path;
    for (const auto& r : records) {
        if (r.subset == Subset::single) {
            single.push_back(r);
        } else if (r.subset == Subset::webshopping) {
            shopping.push_back(r);
        } else {
            quota_path.push_back(r);
        }
    }

    const auto one_episode_each = [&](const std::vector<InstructionRecord>& chosen) {
        for (const auto& r : chosen) {
            if (!r.episode_ids.empty()) result.episode_ids.push_back(r.episode_ids[rng.below(r.episode_ids.size())]);
        }
    };

    std::vector<Cluster> single_clusters;
    for (const auto& [verb, group] : group_by_verb(single)) {
        if (group.size() > options.cluster_threshold) {
            const std::size_t k = (group.size() + options.group_size_per_cluster - 1) / options.group_size_per_cluster;
            auto clusters = cluster_with(group, k, rng.next(), verb);
            single_clusters.insert(single_clusters.end(), std::make_move_iterator(clusters.begin()),
                                   std::make_move_iterator(clusters.end()));
        } else {
            single_clusters.push_back({verb, group, true});
        }
    }
    one_episode_each(sample_members(single_clusters, options.per_cluster_quota, rng));

    std::map<std::pair<std::string, std::string>, Cluster> cells;
    for (const auto& r : shopping) {
        const auto key = std::make_pair(attribute_or(r, "website"), attribute_or(r, "object"));
        auto& cell = cells[key];
        cell.label = key.first + "/" + key.second;
        cell.members.push_back(r);
    }
    std::vector<Cluster> shopping_clusters;
    for (auto& [key, cell] : cells) shopping_clusters.push_back(std::move(cell));
    one_episode_each(sample_members(shopping_clusters, options.per_cell_quota, rng));

    auto quota_ids = sample_episodes(quota_path, options.quotas, rng);
    result.episode_ids.insert(result.episode_ids.end(), quota_ids.begin(), quota_ids.end());

    std::set<std::string> seen;
    std::vector<std::string> unique;
    for (auto& id : result.episode_ids) {
        if (seen.insert(id).second) unique.push_back(std::move(id));
    }
    result.episode_ids = std::move(unique);

    result.clusters = std::move(single_clusters);
    result.clusters.insert(result.clusters.end(), std::make_move_iterator(shopping_clusters.begin()),
                           std::make_move_iterator(shopping_clusters.end()));
    return result;
}

std::vector<InstructionRecord> read_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open corpus " + path.string());
    std::vector<InstructionRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
        InstructionRecord r;
        try {
            const Json doc = Json::parse(line);
            r.text = doc.at("text").get<std::string>();
            const auto subset_name = doc.at("subset").get<std::string>();
            const auto subset = subset_from_string(subset_name);
            if (!subset) throw DatasetError(where + "unknown subset '" + subset_name + "'");
            r.subset = *subset;
            r.episode_ids = doc.value("episode_ids", std::vector<std::string>{});
            if (doc.contains("attributes") && !doc["attributes"].is_null()) {
                for (const auto& [key, value] : doc["attributes"].items()) r.attributes[key] = value.get<std::string>();
            }
        } catch (const Json::exception& e) {
            throw DatasetError(where + e.what());
        }
        if (leading_verb(r.text).empty()) throw DatasetError(where + "empty instruction text");
        records.push_back(std::move(r));
    }
    return records;
}

Json cluster_report(const SampleResult& result, const SamplerOptions& options) {
    Json clusters = Json::array();
    for (const auto& c : result.clusters) {
        Json texts = Json::array();
        for (const auto& m : c.members) texts.push_back(m.text);
        clusters.push_back({{"label", c.label},
                            {"size", c.members.size()},
                            {"needs_review", c.needs_review},
                            {"members", std::move(texts)}});
    }
    Json quotas = Json::object();
    for (const auto& [subset, x] : options.quotas) quotas[std::string(to_string(subset))] = x;
    return {{"seed", options.seed},
            {"quotas", std::move(quotas)},
            {"cluster_threshold", options.cluster_threshold},
            {"per_cluster_quota", options.per_cluster_quota},
            {"per_cell_quota", options.per_cell_quota},
            {"selected_episodes", result.episode_ids.size()},
            {"clusters", std::move(clusters)}};
}

Manifest sample_manifest(const SampleResult& result, Split split) {
    Manifest manifest;
    for (const auto& id : result.episode_ids) manifest.entries.push_back({"episodes/" + id + ".json", split});
    return manifest;
}

}  // namespace actbench
