import json
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import GOLDEN
from uavfpg import PlannerParseError
from uavfpg.mockllm import MockLlmServer, load_fixture
from uavfpg.planner import (
    LlmClient, LlmClientConfig, PositionRewardHistory, build_prompt, extract_waypoints,
    format_directions, parse_path, plan, plan_heuristic,
)
from uavfpg.world import MotionLimits, Vec3, WorldBounds

B, L = WorldBounds(), MotionLimits(10.0, 1.0)
FIXTURE = os.path.join(os.path.dirname(__file__), "..", "src", "uavfpg", "fixtures", "mock_llm.json")


def golden(name):
    with open(os.path.join(GOLDEN, name), newline="") as fh:
        return fh.read()


def check_path(path, start):
    prev = start
    for p in path:
        assert B.contains(p, eps=0.0)
        assert math.dist(prev, p) <= L.step_length + 1e-9
        prev = p


# -- prompt --------------------------------------------------------------------

def test_prompt_golden_empty():
    text = build_prompt(PositionRewardHistory(), (0, 0, 0), 1)
    assert text == golden("prompt_empty_n1.txt")
    assert text.count("Current Position: [0.00, 0.00, 0.00]") == 1
    assert "Positions and Rewards" not in text


def test_prompt_golden_one_entry():
    h = PositionRewardHistory(20, [((10, 0, 0), 1.5)])
    text = build_prompt(h, (20, 0, 0), 2)
    assert "Positions and Rewards: [10.00, 0.00, 0.00]: 1.50" in text
    assert text == golden("prompt_one_n2.txt")


def test_prompt_golden_rounding():
    h = PositionRewardHistory(20, [((750, 50, 300), 0.0), ((750, 60, 300), -0.25),
                                   ((752.1349, 69.7651, 301.0), 1.0)])
    assert build_prompt(h, (754.399, 79.506, 302.0), 10) == golden("prompt_three_n10.txt")


def test_history_fifo():
    h = PositionRewardHistory(2)
    for i in range(4):
        h.append((i, 0, 0), i)
    assert [p[0] for p, _ in h] == [2, 3]
    assert h.best()[1] == 3
    with pytest.raises(ValueError):
        h.append((0, 0, 0), float("inf"))


# -- parse ---------------------------------------------------------------------

def test_parse_examples():
    p = parse_path("Next directions: [[1,2,3]]", 1, B, L, (0, 0, 0))
    assert list(p.directions) == [Vec3(1, 2, 3)] and p.source == "llm"
    p = parse_path("blah Next directions: [[0,0,0],[100,0,0]] thanks", 2, B, L, (0, 0, 0))
    assert list(p.directions) == [Vec3(0, 0, 0), Vec3(10, 0, 0)]
    with pytest.raises(PlannerParseError):
        parse_path("no marker here", 1, B, L, (0, 0, 0))
    with pytest.raises(PlannerParseError):
        parse_path("Next directions: none", 1, B, L, (0, 0, 0))


def test_parse_uses_last_marker_and_pads():
    text = "Next directions: [[9,9,9]]\nOn reflection, Next directions: [[1,0,0], [2,0,0]]"
    p = parse_path(text, 4, B, L, (0, 0, 0))
    assert [q.x for q in p.directions] == [1, 2, 2, 2]


def test_round_trip_exact_pre_clamp():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(1, 12))
        pts = [Vec3(*rng.uniform(-500, 2000, 3)) for _ in range(n)]
        reply = "Sure.\n" + format_directions(pts) + "\n"
        assert extract_waypoints(reply) == pts


def test_echo_of_prompt_exemplar():
    h = PositionRewardHistory(20, [((10, 0, 0), 1.5)])
    prompt = build_prompt(h, (20, 0, 0), 2)
    wanted = [Vec3(25.0, 3.0, 0.5), Vec3(30.0, 6.0, 1.0)]
    reply = prompt.splitlines()[-1].replace("Reply only with: ", "").split("[[")[0] + format_directions(wanted)[len("Next directions: "):]
    assert extract_waypoints(reply) == wanted
    assert list(parse_path(reply, 2, B, L, (20, 0, 0)).directions) == wanted


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(*[st.floats(-1e4, 1e4)] * 3), min_size=1, max_size=15),
       st.integers(1, 12), st.tuples(st.floats(0, 1500), st.floats(0, 1500), st.floats(0, 600)))
def test_parsed_paths_respect_motion(pts, n, start):
    path = parse_path(format_directions(pts), n, B, L, start)
    assert len(path) == n
    check_path(path, start)


# -- heuristic -----------------------------------------------------------------

def test_heuristic_examples():
    p = plan_heuristic(None, (0, 0, 0), (100, 0, 0), 3, L, B, bias=False)
    assert list(p.directions) == [Vec3(10, 0, 0), Vec3(20, 0, 0), Vec3(30, 0, 0)]
    p = plan_heuristic(None, (5, 5, 5), (5, 5, 5), 4, L, B, bias=False)
    assert list(p.directions) == [Vec3(5, 5, 5)] * 4
    p = plan_heuristic(None, (1495, 5, 5), (5000, -100, 900), 5, L, B, bias=False)
    check_path(p.directions, (1495, 5, 5))


def test_heuristic_deterministic_under_seed():
    h = PositionRewardHistory(20, [((300, 300, 300), 2.0)])
    runs = [plan_heuristic(h, (0, 0, 0), (100, 0, 0), 5, L, B, np.random.default_rng(8)) for _ in range(2)]
    assert runs[0] == runs[1]
    check_path(runs[0].directions, (0, 0, 0))


# -- plan with transport -------------------------------------------------------

def client(url, retries=2, timeout=2.0):
    return LlmClient(LlmClientConfig(url, timeout=timeout, max_retries=retries))


def plan_args(events=None, seed=0):
    return dict(ally_pos_estimate=(800, 700, 300), limits=L, bounds=B,
                rng=np.random.default_rng(seed), events=events)


def test_offline_equals_heuristic():
    h = PositionRewardHistory(20, [((760, 60, 300), 1.0)])
    ev = []
    a = plan(None, h, (750, 50, 300), 10, **plan_args(ev))
    b = plan_heuristic(h, (750, 50, 300), (800, 700, 300), 10, L, B, np.random.default_rng(0))
    assert a == b and ev[0].reason == "offline"


def test_mock_fixture_reply_parsed():
    first = load_fixture(FIXTURE)[0]["content"]
    expect = [Vec3(*p) for p in json.loads(first.split("Next directions:")[1])]
    start = (750, 690, 300)
    with MockLlmServer([{"content": first}]) as srv:
        p = plan(client(srv.url), PositionRewardHistory(), start, 10, **plan_args())
    assert p.source == "llm"
    assert list(p.directions) == expect
    check_path(p.directions, start)


def test_request_body_and_auth_header():
    with MockLlmServer([{"content": "Next directions: [[1, 1, 1]]"}]) as srv:
        c = LlmClient(LlmClientConfig(srv.url, model="m1", api_key="secret-token"))
        c.complete("hello")
        body = srv.requests[0]
    assert body["model"] == "m1" and body["messages"][0]["content"] == "hello"
    assert "secret-token" not in repr(c.config)


@pytest.mark.parametrize("fault", [
    {"content": "I refuse."},
    {"status": 503, "raw": "busy"},
    {"status": 200, "raw": "not json at all"},
    {"delay": 0.6, "content": "Next directions: [[1, 1, 1]]"},
])
@pytest.mark.parametrize("retries", [0, 2])
def test_fault_injection_falls_back(fault, retries):
    ev = []
    start = (750, 50, 300)
    with MockLlmServer([fault]) as srv:
        c = client(srv.url, retries, timeout=0.2)
        p = plan(c, PositionRewardHistory(), start, 5, **plan_args(ev, seed=4))
        assert c.attempts == retries + 1
        assert srv.request_count == retries + 1
    ref = plan_heuristic(PositionRewardHistory(), start, (800, 700, 300), 5, L, B, np.random.default_rng(4))
    assert p == ref and p.source == "heuristic"
    assert len(ev) == 1 and ev[0].attempts == retries + 1


def test_recovers_after_transient_fault():
    with MockLlmServer([{"status": 500}, {"content": "Next directions: [[751, 50, 300]]"}]) as srv:
        p = plan(client(srv.url, 2), PositionRewardHistory(), (750, 50, 300), 1, **plan_args())
        assert srv.request_count == 2
    assert p.source == "llm" and p.directions == (Vec3(751, 50, 300),)


def test_connection_refused_falls_back():
    ev = []
    with MockLlmServer([{"content": "x"}]) as srv:
        url = srv.url
    p = plan(client(url, 1, timeout=0.5), PositionRewardHistory(), (0, 0, 0), 2, **plan_args(ev))
    assert p.source == "heuristic" and ev[0].attempts == 2
