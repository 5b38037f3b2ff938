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
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "actbench/episode.hpp"
#include "actbench/json_io.hpp"

namespace actbench {

// Portable seeded generator: the same seed yields the same draws on every
// platform, unlike the std distributions.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, n); n must be positive.
    std::size_t below(std::size_t n);
    std::uint64_t next() { return engine_(); }
    // Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Indices of `count` distinct items out of `n`, in draw order.
    std::vector<std::size_t> choose(std::size_t n, std::size_t count);

private:
    std::mt19937_64 engine_;
};

struct InstructionRecord {
    std::string text;
    Subset subset = Subset::general;
    std::vector<std::string> episode_ids;
    std::map<std::string, std::string> attributes;  // e.g. website, object

    friend bool operator==(const InstructionRecord&, const InstructionRecord&) = default;
};

struct Cluster {
    std::string label;
    std::vector<InstructionRecord> members;
    bool needs_review = false;  // pass-through group that was not clustered
};

// Casefolded first whitespace-delimited token.
std::string leading_verb(const std::string& text);

std::map<std::string, std::vector<InstructionRecord>> group_by_verb(const std::vector<InstructionRecord>& records);

// Casefold, then split on anything that is not an ASCII letter or digit.
// Bytes at or above 0x80 are kept inside tokens.
std::vector<std::string> tokenize(const std::string& text);

struct SparseVector {
    std::vector<std::pair<std::size_t, double>> entries;  // (term index, weight), ascending index

    [[nodiscard]] double weight(std::size_t term) const;
    [[nodiscard]] double norm() const;
};

struct TfidfMatrix {
    std::vector<std::string> vocabulary;  // sorted
    std::vector<SparseVector> rows;       // one per text

    [[nodiscard]] std::size_t term(const std::string& token) const;  // npos when absent
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// tf = count / length, idf = ln(N / df); rows are L2-normalized unless all zero.
TfidfMatrix tfidf_vectors(const std::vector<std::string>& texts);

// 1 - cosine similarity; a zero vector is at distance 1 from everything.
double cosine_distance(const SparseVector& a, const std::vector<double>& centroid);

// Cluster index per row. Each restart seeds with k-means++ (squared cosine
// distance) and runs Lloyd iterations until assignments settle. The restart
// with the lowest total distance wins, earliest on ties. Labels are numbered
// by first appearance, so they cover [0, number of non-empty clusters).
std::vector<std::size_t> kmeans_cosine(const TfidfMatrix& matrix, std::size_t k, std::uint64_t seed,
                                       std::size_t max_iterations = 100, std::size_t restarts = 10);

// Throws Error when k is 0 or exceeds the group size.
std::vector<Cluster> cluster_group(const std::vector<InstructionRecord>& group, std::size_t k, std::uint64_t seed,
                                   const std::string& label = "cluster");

// min(quota, size) members per cluster, without replacement.
std::vector<InstructionRecord> balanced_sample(const std::vector<Cluster>& clusters, std::size_t quota,
                                               std::uint64_t seed);

using QuotaMap = std::map<Subset, std::size_t>;

// general 3, install 3, googleapps 5.
QuotaMap default_quotas();

// min(x, available) episode ids per instruction. Throws Error for a subset
// without a quota or a zero quota.
std::vector<std::string> quota_sample(const std::vector<InstructionRecord>& records, const QuotaMap& quotas,
                                      std::uint64_t seed);

struct SamplerOptions {
    std::uint64_t seed = 0;
    QuotaMap quotas = default_quotas();
    std::size_t cluster_threshold = 50;   // groups above this size are clustered
    std::size_t group_size_per_cluster = 50;  // k = ceil(size / this)
    std::size_t per_cluster_quota = 3;    // single subset
    std::size_t per_cell_quota = 3;       // webshopping (website, object) cells
};

struct SampleResult {
    std::vector<std::string> episode_ids;  // deduplicated, in selection order
    std::vector<Cluster> clusters;         // single verb clusters, then webshopping cells
};

// single: verb groups, clustered when large, then balanced sampling with
// one episode per chosen instruction. webshopping: balanced over
// (website, object). Everything else: quota_sample.
SampleResult run_sampler(const std::vector<InstructionRecord>& records, const SamplerOptions& options);

// JSON lines with the InstructionRecord fields.
std::vector<InstructionRecord> read_corpus(const std::filesystem::path& path);

Json cluster_report(const SampleResult& result, const SamplerOptions& options);

// Entries point at "episodes/<id>.json".
Manifest sample_manifest(const SampleResult& result, Split split);

}  // namespace actbench
