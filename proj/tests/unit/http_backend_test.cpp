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

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "actbench/error.hpp"
#include "test_support.hpp"

namespace actbench {
namespace {

using testing::fixture_dir;

class MockServer {
public:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    explicit MockServer(Handler handler) : handler_(std::move(handler)) {
        server_.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
            const int now = ++in_flight_;
            int seen = max_in_flight_.load();
            while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
            }
            ++hits_;
            {
                std::lock_guard lock(mutex_);
                last_body_ = req.body;
                last_auth_ = req.get_header_value("Authorization");
            }
            handler_(req, res);
            --in_flight_;
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockServer() {
        server_.stop();
        thread_.join();
    }

    [[nodiscard]] std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/predict"; }
    [[nodiscard]] int hits() const { return hits_; }
    [[nodiscard]] int max_in_flight() const { return max_in_flight_; }
    Json last_body() {
        std::lock_guard lock(mutex_);
        return Json::parse(last_body_);
    }
    std::string last_auth() {
        std::lock_guard lock(mutex_);
        return last_auth_;
    }

private:
    Handler handler_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_{0};
    std::mutex mutex_;
    std::string last_body_;
    std::string last_auth_;
};

void reply(httplib::Response& res, const std::string& text) {
    res.set_content(Json{{"text", text}}.dump(), "application/json");
}

PolicyRequest sample_request() {
    PolicyRequest req;
    req.episode_id = "e";
    req.query = "q";
    req.prompt.system_text = "sys";
    req.prompt.user_segments = {{SegmentRole::screenshot, true, "screens/ep01_0.png"},
                                {SegmentRole::query, false, "User request: q"}};
    return req;
}

BackendConfig config_for(const MockServer& server) {
    BackendConfig cfg;
    cfg.kind = BackendKind::http;
    cfg.endpoint = server.url();
    cfg.backoff_base_ms = 10;
    cfg.timeout_ms = 2000;
    return cfg;
}

TEST(HttpBackend, EchoesAnswerVerbatim) {
    MockServer server([](const httplib::Request&, httplib::Response& res) { reply(res, "scroll up"); });
    ::setenv("ACTBENCH_TEST_TOKEN", "s3cret", 1);
    BackendConfig cfg = config_for(server);
    cfg.auth_env = "ACTBENCH_TEST_TOKEN";
    HttpBackend backend(cfg);
    const auto response = backend.predict(sample_request());
    EXPECT_EQ(response.raw_text, "scroll up");
    EXPECT_EQ(response.backend_id, "http");
    EXPECT_EQ(server.last_auth(), "Bearer s3cret");
    const Json body = server.last_body();
    EXPECT_EQ(body.at("system"), "sys");
    EXPECT_EQ(body.at("max_tokens"), 512);
    ASSERT_EQ(body.at("segments").size(), 2u);
    EXPECT_EQ(body.at("segments")[0].at("kind"), "image");
    EXPECT_EQ(body.at("segments")[0].at("ref"), "screens/ep01_0.png");
    EXPECT_EQ(body.at("segments")[1], (Json{{"kind", "text"}, {"value", "User request: q"}}));
}

TEST(HttpBackend, ServerErrorsExhaustRetries) {
    MockServer server([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    BackendConfig cfg = config_for(server);
    cfg.max_retries = 2;
    ManualClock clock;
    HttpBackend backend(cfg, clock);
    try {
        backend.predict(sample_request());
        FAIL();
    } catch (const BackendError& e) {
        EXPECT_NE(std::string(e.what()).find("after 3 attempt(s)"), std::string::npos) << e.what();
    }
    EXPECT_EQ(server.hits(), 3);
    EXPECT_EQ(clock.elapsed(), std::chrono::milliseconds(10 + 20));
}

TEST(HttpBackend, RetriesThrottlingThenSucceeds) {
    std::atomic<int> calls{0};
    MockServer server([&](const httplib::Request&, httplib::Response& res) {
        if (calls++ == 0) {
            res.status = 429;
        } else {
            reply(res, "press back");
        }
    });
    ManualClock clock;
    HttpBackend backend(config_for(server), clock);
    EXPECT_EQ(backend.predict(sample_request()).raw_text, "press back");
    EXPECT_EQ(server.hits(), 2);
}

TEST(HttpBackend, ClientErrorsAreNotRetried) {
    MockServer server([](const httplib::Request&, httplib::Response& res) { res.status = 400; });
    ManualClock clock;
    HttpBackend backend(config_for(server), clock);
    EXPECT_THROW(backend.predict(sample_request()), BackendError);
    EXPECT_EQ(server.hits(), 1);
}

TEST(HttpBackend, TimeoutEveryStepGivesZeroGoalProgress) {
    MockServer server([](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(600));
        reply(res, "scroll up");
    });
    BackendConfig cfg = config_for(server);
    cfg.timeout_ms = 100;
    cfg.max_retries = 0;
    HttpBackend backend(cfg);
    const auto data = load_dataset(fixture_dir(), Split::all);
    const std::vector<Episode> eps = {*data.find("ep02")};
    const auto verdicts = run_episode(eps[0], backend, RunConfig{});
    for (const auto& v : verdicts) {
        EXPECT_FALSE(v.hit);
        ASSERT_FALSE(v.diagnostics.empty());
        EXPECT_NE(v.diagnostics[0].find("backend error"), std::string::npos);
    }
    EXPECT_DOUBLE_EQ(aggregate(verdicts, eps).goal_progress, 0.0);
}

TEST(HttpBackend, ConnectionRefusedIsBackendError) {
    BackendConfig cfg;
    cfg.kind = BackendKind::http;
    cfg.endpoint = "http://127.0.0.1:1/predict";
    cfg.max_retries = 1;
    ManualClock clock;
    HttpBackend backend(cfg, clock);
    EXPECT_THROW(backend.predict(sample_request()), BackendError);
}

TEST(HttpBackend, ConcurrencyCap) {
    MockServer server([](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
        reply(res, "press home");
    });
    BackendConfig cfg = config_for(server);
    cfg.max_concurrent = 2;
    HttpBackend backend(cfg);
    std::vector<std::thread> workers;
    for (int i = 0; i < 8; ++i) workers.emplace_back([&] { backend.predict(sample_request()); });
    for (auto& w : workers) w.join();
    EXPECT_EQ(server.hits(), 8);
    EXPECT_LE(server.max_in_flight(), 2);
}

TEST(HttpBackend, RateCapSpreadsRequestsOverAMinute) {
    MockServer server([](const httplib::Request&, httplib::Response& res) { reply(res, "press home"); });
    BackendConfig cfg = config_for(server);
    cfg.requests_per_minute = 60;
    ManualClock clock;
    HttpBackend backend(cfg, clock);
    for (int i = 0; i < 120; ++i) backend.predict(sample_request());
    const double seconds = std::chrono::duration<double>(clock.elapsed()).count();
    EXPECT_GE(seconds, 59.0);
    EXPECT_LE(seconds, 61.0);
}

TEST(HttpBackend, MissingAuthVariableFailsAtConstruction) {
    BackendConfig cfg;
    cfg.kind = BackendKind::http;
    cfg.endpoint = "http://127.0.0.1:1/predict";
    cfg.auth_env = "ACTBENCH_TEST_UNSET_TOKEN";
    ::unsetenv("ACTBENCH_TEST_UNSET_TOKEN");
    EXPECT_THROW(HttpBackend backend(cfg), ConfigError);
}

TEST(WireFormat, OpenAiTranslation) {
    BackendConfig cfg;
    cfg.wire = WireFormat::openai;
    cfg.model = "some-model";
    const Json body = build_wire_request(sample_request().prompt, cfg);
    EXPECT_EQ(body.at("model"), "some-model");
    EXPECT_EQ(body.at("messages")[0].at("role"), "system");
    EXPECT_EQ(body.at("messages")[1].at("content")[0].at("type"), "image_url");
    EXPECT_EQ(parse_wire_response(R"({"choices":[{"message":{"content":"stop and set the query as completed"}}]})",
                                  WireFormat::openai),
              "stop and set the query as completed");
    EXPECT_THROW(parse_wire_response("{}", WireFormat::openai), BackendError);
    EXPECT_THROW(parse_wire_response("not json", WireFormat::core), BackendError);
}

TEST(WireFormat, Base64Images) {
    BackendConfig cfg;
    cfg.images = ImageTransport::b64;
    cfg.image_root = fixture_dir();
    const Json body = build_wire_request(sample_request().prompt, cfg);
    const std::string b64 = body.at("segments")[0].at("b64");
    EXPECT_EQ(b64.substr(0, 8), "iVBORw0K");  // PNG signature
    cfg.image_root = "/nonexistent";
    EXPECT_THROW(build_wire_request(sample_request().prompt, cfg), BackendError);
}

TEST(Base64, KnownVectors) {
    EXPECT_EQ(base64_encode(""), "");
    EXPECT_EQ(base64_encode("M"), "TQ==");
    EXPECT_EQ(base64_encode("Ma"), "TWE=");
    EXPECT_EQ(base64_encode("Man"), "TWFu");
}

TEST(Endpoint, Parse) {
    const auto e = parse_endpoint("https://api.example.com:8443/v1/chat");
    EXPECT_EQ(e.scheme_host_port, "https://api.example.com:8443");
    EXPECT_EQ(e.path, "/v1/chat");
    EXPECT_EQ(parse_endpoint("http://localhost").path, "/");
    EXPECT_THROW(parse_endpoint("ftp://x/y"), ConfigError);
    EXPECT_THROW(parse_endpoint("localhost:80"), ConfigError);
    EXPECT_THROW(parse_endpoint("http:///path"), ConfigError);
}

TEST(RateLimiter, TokenBucketArithmetic) {
    ManualClock clock;
    RateLimiter limiter(60, 0.0, clock);
    for (int i = 0; i < 60; ++i) limiter.acquire();
    EXPECT_EQ(clock.elapsed(), Clock::Duration::zero());
    limiter.acquire();
    EXPECT_EQ(clock.elapsed(), std::chrono::seconds(1));
    RateLimiter strict(120, 1.0, clock);
    const auto before = clock.elapsed();
    for (int i = 0; i < 5; ++i) strict.acquire();
    EXPECT_EQ(clock.elapsed() - before, std::chrono::seconds(2));
    RateLimiter unlimited(0, 0.0, clock);
    for (int i = 0; i < 1000; ++i) unlimited.acquire();
    EXPECT_EQ(clock.elapsed() - before, std::chrono::seconds(2));
}

}  // namespace
}  // namespace actbench
