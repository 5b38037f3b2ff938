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

#include <chrono>
#include <mutex>

namespace actbench {

class Clock {
public:
    using Duration = std::chrono::nanoseconds;
    using TimePoint = std::chrono::time_point<std::chrono::steady_clock, Duration>;

    virtual ~Clock() = default;
    virtual TimePoint now() = 0;
    virtual void sleep_until(TimePoint deadline) = 0;
    void sleep_for(Duration d) { sleep_until(now() + d); }

    static Clock& steady();
};

// Time only moves when someone sleeps. Thread-safe.
class ManualClock : public Clock {
public:
    TimePoint now() override;
    void sleep_until(TimePoint deadline) override;
    [[nodiscard]] Duration elapsed();

private:
    std::mutex mutex_;
    TimePoint start_{};
    TimePoint now_{};
};

// Token bucket shared by every worker. Each acquire() reserves the next
// slot, so waiting callers are served in arrival order.
class RateLimiter {
public:
    // requests_per_minute <= 0 disables limiting. burst defaults to one
    // minute's worth of requests.
    RateLimiter(double requests_per_minute, double burst = 0.0, Clock& clock = Clock::steady());

    void acquire();

private:
    Clock& clock_;
    double rate_per_second_;
    double capacity_;
    std::mutex mutex_;
    double tokens_;
    Clock::TimePoint last_;
};

}  // namespace actbench
