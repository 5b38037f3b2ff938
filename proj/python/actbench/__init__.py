# Copyright (C) 2026 The actbench Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python access to the actbench action grammar, metrics and command line tool."""

from ._actbench import (
    ConfigError,
    DatasetError,
    Error,
    category,
    dataset_stats,
    dual_point_to_action,
    goal_progress,
    match,
    parse_action,
    run_cli,
    tfidf,
)

__all__ = [
    "ConfigError",
    "DatasetError",
    "Error",
    "category",
    "dataset_stats",
    "dual_point_to_action",
    "goal_progress",
    "match",
    "parse_action",
    "run_cli",
    "tfidf",
]
