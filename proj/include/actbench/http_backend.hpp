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

#include <memory>
#include <semaphore>
#include <string>

#include "actbench/rate_limiter.hpp"
#include "actbench/runtime.hpp"

namespace actbench {

struct Endpoint {
    std::string scheme_host_port;  // "http://host:port"
    std::string path;              // "/v1/predict"
};

// Throws ConfigError for anything but http:// or https:// URLs.
Endpoint parse_endpoint(const std::string& url);

std::string base64_encode(std::string_view bytes);

// Request body for the configured wire format.
Json build_wire_request(const PromptDoc& prompt, const BackendConfig& config);
// Extracts the answer text; throws BackendError when the body does not fit the format.
std::string parse_wire_response(const std::string& body, WireFormat wire);

// Remote policy over HTTP. Shares one rate limiter and one concurrency cap
// across all callers; retries transport errors, 408, 429 and 5xx with
// exponential backoff.
class HttpBackend : public PolicyBackend {
public:
    // Reads the auth token once; throws ConfigError when the configured
    // variable is unset.
    explicit HttpBackend(BackendConfig config, Clock& clock = Clock::steady());

    PolicyResponse predict(const PolicyRequest& request) override;
    [[nodiscard]] std::string id() const override { return "http"; }

    // Body sent for `request`; exposed for inspection.
    [[nodiscard]] std::string request_body(const PolicyRequest& request) const;

private:
    BackendConfig config_;
    Endpoint endpoint_;
    std::string token_;
    Clock& clock_;
    RateLimiter limiter_;
    std::unique_ptr<std::counting_semaphore<>> slots_;
};

}  // namespace actbench
