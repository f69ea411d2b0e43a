import pytest

from evstream.bench import QUERIES, check, generate, report, run_query, run_suite
from evstream.errors import EngineError
from evstream.events import Tuple
from evstream.reference import evaluate, parse


def test_generator_is_reproducible():
    assert generate(100, 3) == generate(100, 3)
    assert generate(100, 3) != generate(100, 4)
    rows = parse(generate(500, 1, (2, 4)))
    assert [r[2] for r in rows] == list(range(500))
    assert {r[0] for r in rows} == {1, 2, 3}
    assert {r[1] for r in rows} <= {2, 3, 4}
    with pytest.raises(ValueError):
        generate(0)


@pytest.mark.parametrize("query", QUERIES)
@pytest.mark.parametrize("seed,prices", [(1, (0, 9)), (2, (0, 3)), (3, (0, 2))])
def test_queries_match_reference(query, seed, prices):
    lines = generate(1500, seed, prices)
    ok, n = check(query, lines)
    assert ok
    if query not in ("S5", "S6") or prices != (0, 9):
        assert n > 0  # make sure the comparison is not vacuous


def test_s1_is_a_passthrough():
    lines = generate(50, 9)
    out, _, _ = run_query("S1", lines)
    assert [",".join(str(v) for v in t.values()) for t in out] == lines[1:]


def test_s2_and_s3_by_hand():
    lines = ["stockSymbol,closingPrice,timestamp"] + [f"{s},{p},{t}" for t, (s, p) in enumerate(
        [(1, 1), (2, 5), (1, 2), (1, 3), (3, 0), (1, 4), (1, 5), (1, 10)])]
    assert [t["closingPrice"] for t in run_query("S2", lines)[0]] == [1, 2, 3, 4, 5, 10]
    assert run_query("S3", lines)[0] == [3, 4.8]


def test_s5_by_hand():
    lines = ["stockSymbol,closingPrice,timestamp", "2,1,0", "2,0,1", "3,1,2", "1,1,3", "2,1,4", "1,0,5"]
    assert evaluate("S5", lines) == [Tuple(stockSymbol=2, closingPrice=1, timestamp=0)]
    assert run_query("S5", lines)[0] == evaluate("S5", lines)


def test_suite_and_report():
    res = run_suite(generate(400, 5), ["S1", "S2"], check_prefix=200)
    assert [r.query for r in res] == ["S1", "S2"]
    assert res[0].outputs == 400
    text = report(res)
    assert text.splitlines()[0].split()[0] == "query"
    assert "1.000" in text.splitlines()[1]


def test_suite_detects_a_wrong_trace_header():
    with pytest.raises((EngineError, ValueError)):
        run_suite(["a,b,c", "1,2,3"], ["S1"])
