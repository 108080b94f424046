"""Smoke test for the tadpole_explore extension module."""

from fractions import Fraction as F

import tadpole_explore as tx


def main():
    tri = tx.Graph.cycle(["5/4", 1, F(3, 4)])
    assert tri.shape == "cycle" and len(tri) == 3
    geo = tri.geometry()
    assert geo["d_long"] + geo["d_short"] + geo["e_mid_length"] == 3

    run = tx.explore(tri, "amp-cycle")
    makespan, method = tx.opt(tri, 2)
    assert (run.energy, makespan, method) == (F(5, 2), F(5, 2), "closed")
    assert tx.competitive_ratio(run.time, makespan) <= F(3, 2)

    tad = tx.Graph.parse("cycle 3 1 2 2 1; tail 2 1 1 2; start t3")
    assert tx.Graph.parse(tad.to_text()) == tad
    assert tx.opt(tad, 2) == (16, "brute")
    assert len(tx.opt_plan(tad, 3)) == 3
    three = tx.explore(tad, "amp-tad3")
    assert three.energy == tx.opt(tad, 3)[0]
    assert three.trace_csv().startswith("time,agent,kind")

    doubled = tx.make_2_5_example(F(1, 10))
    times = {tx.explore(doubled, "amp-tad2", choices=[c]).time for c in range(3)}
    assert times == {3, 5}, times

    lb = tx.lowerbound("energy-cycle", "1/100", "ale-cycle")
    assert lb["holds"] and lb["ratio"] == F(150, 101)

    s = tx.sweep("cycle", "amp", trials=25, seed=3, model="energy")
    assert s["max_ratio"] == 1 and s["violations"] == 0

    try:
        tx.Graph.cycle([1, 1])
    except ValueError as e:
        assert "cycle" in str(e)
    else:
        raise AssertionError("two-edge cycle accepted")

    print("smoke test ok:", ", ".join(tx.strategies()))


if __name__ == "__main__":
    main()
