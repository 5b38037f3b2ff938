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

import math
import os
import tempfile
from pathlib import Path

import pytest

import actbench

FIXTURE = Path(os.environ.get("ACTBENCH_FIXTURE_DIR", Path(__file__).resolve().parents[1] / "data" / "fixture"))


def test_parse_and_canonicalize():
    assert actbench.parse_action("CLICK ( 0.5 , 0.25 )") == ("click (0.5000, 0.2500)", [])
    action, notes = actbench.parse_action("Thought: go home.\nAction: press home", lenient=True)
    assert action == "press home"
    assert actbench.parse_action("wiggle")[0] is None
    assert actbench.category('type "hi"') == "type"


def test_dual_point():
    assert actbench.dual_point_to_action(0.5, 0.5, 0.51, 0.5) == "click (0.5000, 0.5000)"
    assert actbench.dual_point_to_action(0.8, 0.5, 0.2, 0.5) == "scroll up"
    with pytest.raises(actbench.Error):
        actbench.dual_point_to_action(0.5, 0.5, 0.5, 0.5, 0.0)


def test_match_and_goal_progress():
    assert actbench.match("click (0.6399, 0.5000)", "click (0.5000, 0.5000)") == (True, True)
    assert actbench.match("click (0.6401, 0.5000)", "click (0.5000, 0.5000)") == (True, False)
    assert actbench.match("click (0.0100, 0.0100)", "click (0.9900, 0.9900)", [(0, 0, 1, 1)]) == (True, True)
    assert actbench.match("scroll up", "scroll down") == (True, False)
    with pytest.raises(ValueError):
        actbench.match("nonsense", "scroll up")
    assert actbench.goal_progress([True, True, False, True]) == 0.5


def test_tfidf_zero_idf():
    rows = actbench.tfidf(["open a b", "open a c"])
    assert all(row.get("open", 0.0) == 0.0 for row in rows)
    assert math.isclose(rows[0]["b"], 1.0)


def test_dataset_stats_and_cli():
    stats = actbench.dataset_stats(str(FIXTURE))
    assert stats["total"] == (10, 30)
    with pytest.raises(actbench.DatasetError):
        actbench.dataset_stats("/nonexistent/actbench")
    with tempfile.TemporaryDirectory() as out:
        code, stdout, _ = actbench.run_cli(["evaluate", "--dataset", str(FIXTURE), "--split", "all", "--out", out])
        assert code == 0
        assert "| 100.00 |" in stdout
        assert (Path(out) / "report.json").exists()
    code, _, stderr = actbench.run_cli(["replay", "--dataset", str(FIXTURE), "--episode", "nope"])
    assert code == 4 and "nope" in stderr
