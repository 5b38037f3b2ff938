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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "actbench/http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <openssl/evp.h>

#include "actbench/error.hpp"

namespace actbench {

namespace {

class SlotGuard {
public:
    explicit SlotGuard(std::counting_semaphore<>& slots) : slots_(slots) { slots_.acquire(); }
    ~SlotGuard() { slots_.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    std::counting_semaphore<>& slots_;
};

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BackendError("cannot read image " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string mime_for(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".jpg" || ext == ".jpeg" || ext == ".JPG" || ext == ".JPEG") return "image/jpeg";
    if (ext == ".webp") return "image/webp";
    return "image/png";
}

}  // namespace

Endpoint parse_endpoint(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must start with http:// or https://: " + url);
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw ConfigError("unsupported endpoint scheme: " + scheme);
    const std::size_t host_start = scheme_end + 3;
    const std::size_t path_start = url.find('/', host_start);
    Endpoint endpoint;
    if (path_start == std::string::npos) {
        endpoint.scheme_host_port = url;
        endpoint.path = "/";
    } else {
        endpoint.scheme_host_port = url.substr(0, path_start);
        endpoint.path = url.substr(path_start);
    }
    if (endpoint.scheme_host_port.size() <= host_start) throw ConfigError("endpoint has no host: " + url);
    return endpoint;
}

std::string base64_encode(std::string_view bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                        reinterpret_cast<const unsigned char*>(bytes.data()),
                                        static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(written));
    return out;
}

Json build_wire_request(const PromptDoc& prompt, const BackendConfig& config) {
    const auto image_payload = [&](const std::string& ref) {
        return base64_encode(read_file(resolve_screenshot(config.image_root, ref)));
    };

    if (config.wire == WireFormat::core) {
        Json segments = Json::array();
        for (const auto& s : prompt.user_segments) {
            if (!s.is_image) {
                segments.push_back({{"kind", "text"}, {"value", s.value}});
            } else if (config.images == ImageTransport::b64) {
                segments.push_back({{"kind", "image"}, {"b64", image_payload(s.value)}});
            } else {
                segments.push_back({{"kind", "image"}, {"ref", s.value}});
            }
        }
        return {{"system", prompt.system_text}, {"segments", std::move(segments)}, {"max_tokens", config.max_tokens}};
    }

    Json content = Json::array();
    for (const auto& s : prompt.user_segments) {
        if (!s.is_image) {
            content.push_back({{"type", "text"}, {"text", s.value}});
            continue;
        }
        const std::string url = config.images == ImageTransport::b64
                                    ? "data:" + mime_for(s.value) + ";base64," + image_payload(s.value)
                                    : s.value;
        content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
    }
    Json body = {{"messages",
                  {{{"role", "system"}, {"content", prompt.system_text}},
                   {{"role", "user"}, {"content", std::move(content)}}}},
                 {"max_tokens", config.max_tokens}};
    if (!config.model.empty()) body["model"] = config.model;
    return body;
}

std::string parse_wire_response(const std::string& body, WireFormat wire) {
    Json doc;
    try {
        doc = Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw BackendError(std::string("response is not JSON: ") + e.what());
    }
    try {
        if (wire == WireFormat::core) return doc.at("text").get<std::string>();
        const Json& content = doc.at("choices").at(0).at("message").at("content");
        if (content.is_null()) return "";
        return content.get<std::string>();
    } catch (const Json::exception& e) {
        throw BackendError(std::string("unexpected response shape: ") + e.what());
    }
}

HttpBackend::HttpBackend(BackendConfig config, Clock& clock)
    : config_(std::move(config)),
      endpoint_(parse_endpoint(config_.endpoint)),
      clock_(clock),
      limiter_(config_.requests_per_minute, 0.0, clock),
      slots_(std::make_unique<std::counting_semaphore<>>(std::max(1, config_.max_concurrent))) {
    if (config_.max_retries < 0) throw ConfigError("max retries must be >= 0");
    if (config_.timeout_ms <= 0) throw ConfigError("timeout must be positive");
    if (!config_.auth_env.empty()) {
        const char* token = std::getenv(config_.auth_env.c_str());
        if (token == nullptr) throw ConfigError("auth environment variable " + config_.auth_env + " is not set");
        token_ = token;
    }
}

std::string HttpBackend::request_body(const PolicyRequest& request) const {
    return build_wire_request(request.prompt, config_).dump();
}

PolicyResponse HttpBackend::predict(const PolicyRequest& request) {
    const std::string body = request_body(request);
    SlotGuard slot(*slots_);

    const auto started = std::chrono::steady_clock::now();
    std::string last_error;
    int attempts = 0;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            const auto backoff = std::chrono::milliseconds(static_cast<long long>(config_.backoff_base_ms)
                                                           << std::min(attempt - 1, 20));
            clock_.sleep_for(std::chrono::duration_cast<Clock::Duration>(backoff));
        }
        limiter_.acquire();
        ++attempts;

        httplib::Client client(endpoint_.scheme_host_port);
        const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        httplib::Headers headers;
        if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

        const auto result = client.Post(endpoint_.path, headers, body, "application/json");
        if (!result) {
            last_error = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status >= 200 && result->status < 300) {
            PolicyResponse response;
            response.raw_text = parse_wire_response(result->body, config_.wire);
            response.latency_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
            response.backend_id = id();
            return response;
        }
        last_error = "HTTP status " + std::to_string(result->status);
        if (!retryable_status(result->status)) break;
    }
    throw BackendError(last_error + " after " + std::to_string(attempts) + " attempt(s)");
}

}  // namespace actbench
