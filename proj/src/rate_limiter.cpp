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

#include "actbench/rate_limiter.hpp"

#include <algorithm>
#include <thread>

namespace actbench {

namespace {

class SteadyClock : public Clock {
public:
    TimePoint now() override { return std::chrono::time_point_cast<Duration>(std::chrono::steady_clock::now()); }
    void sleep_until(TimePoint deadline) override { std::this_thread::sleep_until(deadline); }
};

}  // namespace

Clock& Clock::steady() {
    static SteadyClock clock;
    return clock;
}

Clock::TimePoint ManualClock::now() {
    std::lock_guard lock(mutex_);
    return now_;
}

void ManualClock::sleep_until(TimePoint deadline) {
    std::lock_guard lock(mutex_);
    now_ = std::max(now_, deadline);
}

Clock::Duration ManualClock::elapsed() {
    std::lock_guard lock(mutex_);
    return now_ - start_;
}

RateLimiter::RateLimiter(double requests_per_minute, double burst, Clock& clock)
    : clock_(clock),
      rate_per_second_(requests_per_minute / 60.0),
      capacity_(burst > 0.0 ? burst : std::max(1.0, requests_per_minute)),
      tokens_(capacity_),
      last_(clock.now()) {}

void RateLimiter::acquire() {
    if (rate_per_second_ <= 0.0) return;
    Clock::TimePoint wake;
    {
        std::lock_guard lock(mutex_);
        const auto now = clock_.now();
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_second_);
        tokens_ -= 1.0;
        if (tokens_ >= 0.0) return;
        const auto wait = std::chrono::duration<double>(-tokens_ / rate_per_second_);
        wake = now + std::chrono::duration_cast<Clock::Duration>(wait);
    }
    clock_.sleep_until(wake);
}

}  // namespace actbench
