"""Smoke test for the pykdemand extension. Run after `maturin develop`."""

from fractions import Fraction

import pykdemand as kd

UD = """market 2 2
agent 1 unit-demand 3 2
agent 2 unit-demand 2 3
"""

NO_WE = """market 2 2
agent 1 single-minded 3 : 1 2
agent 2 unit-demand 2 2
"""


def main():
    market = kd.Market.parse(UD)
    assert (market.agent_count, market.item_count) == (2, 2)
    assert kd.Market.parse(market.to_text()).to_text() == market.to_text()

    best = kd.winner(market)
    assert best["welfare"] == 6, best
    assert best["allocation"] == [[0], [1]], best
    assert kd.winner(market, "brute-force")["welfare"] == 6

    result = kd.solve(market)
    assert result["equilibrium"]
    assert all(isinstance(p, Fraction) for p in result["prices"])
    ok, reason = kd.verify(market, result["allocation"], result["prices"])
    assert ok and reason is None
    ok, reason = kd.verify(market, [[1], [0]], [0, 0])
    assert not ok and reason

    no_we = kd.solve(kd.Market.parse(NO_WE))
    assert not no_we["equilibrium"] and no_we["prices"] is None
    assert no_we["welfare"] == 3 and no_we["witness"]

    a = kd.random_market("k-demand", 3, 5, 10, 2, 7)
    b = kd.random_market("k-demand", 3, 5, 10, 2, 7)
    assert a.to_text() == b.to_text()

    assert kd.winner(kd.reduce_3dm3(1, [(0, 0, 0)]))["welfare"] == 2
    assert kd.reduce_3dm3(2, [(0, 0, 0), (0, 1, 1)]) is None
    part = kd.reduce_3partition([1, 2, 3, 1, 2, 3], 2)
    assert kd.winner(part)["welfare"] == 12

    try:
        kd.Market.parse("market 1 1\nagent 1 nonsense\n")
    except kd.KDemandError:
        pass
    else:
        raise AssertionError("bad market parsed")

    print("smoke test ok")


if __name__ == "__main__":
    main()
