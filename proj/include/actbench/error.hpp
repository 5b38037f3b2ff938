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

#include <stdexcept>
#include <string>

namespace actbench {

// Fatal errors. Recoverable per-item failures (parse misses, malformed
// episodes, backend errors) are reported as values instead.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration: bad flag combinations, missing endpoint, unset auth variable.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Dataset cannot be used at all: missing root or manifest, no episodes.
class DatasetError : public Error {
public:
    using Error::Error;
};

// A stored verdict set does not line up with the dataset.
class VerdictSetError : public Error {
public:
    using Error::Error;
};

// Backend request failed after all retries.
class BackendError : public Error {
public:
    using Error::Error;
};

}  // namespace actbench
