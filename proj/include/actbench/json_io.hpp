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

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "actbench/episode.hpp"

namespace actbench {

using Json = nlohmann::ordered_json;

// Canonical episode document. Gold actions are stored as canonical action
// strings; bbox arrays are [top, left, bottom, right].
Json episode_to_json(const Episode& episode);

// Throws Error describing the first schema problem (missing key, wrong type,
// unparseable gold action).
Episode episode_from_json(const Json& doc);

struct ManifestEntry {
    std::string path;
    Split split = Split::train;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
};

Json manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(const Json& doc);

// Two-space indented JSON followed by a newline.
void write_json_file(const std::filesystem::path& path, const Json& doc);
Json read_json_file(const std::filesystem::path& path);

// Writes root/manifest.json plus one file per episode at the manifest path.
void write_dataset(const std::filesystem::path& root, const std::vector<Episode>& episodes,
                   const Manifest& manifest);

}  // namespace actbench
