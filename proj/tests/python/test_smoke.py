import pathlib

import pytest

import antcsp

DATA = pathlib.Path(__file__).resolve().parents[1] / "data"


def read(name):
    return (DATA / name).read_text()


def test_solve_and_count():
    tri = read("triangle.json")
    h = antcsp.solve(tri, "k3")
    assert h == [0, 1, 2]
    assert antcsp.count(tri, "k3") == 6
    assert antcsp.solve(read("k4.json"), "k3") is None


def test_dict_inputs():
    edge = {"signature": [{"name": "E", "arity": 2}], "universe": 2,
            "relations": {"E": [[0, 1], [1, 0]]}}
    assert antcsp.solve(edge, antcsp.builtin("k2")) in ([0, 1], [1, 0])


def test_robust_and_reflection():
    v = antcsp.is_robust(read("triangle.json"), "k3", 2, read("E.json"))
    assert v["robust"] is True
    v = antcsp.is_robust(read("c4.json"), "k3", 3)
    assert v["robust"] is False and v["reason"] == "non-extendable"
    r = antcsp.reflect(read("gadget.json"), "one-in-three", 2, read("shared_prefix.json"), full=True)
    assert r["quotient_map"] == [0, 1, 2, 2]


def test_polymorphisms():
    (maj,) = antcsp.find_polymorphism("k2", "nu:3")
    assert maj["table"] == [0, 0, 0, 1, 0, 1, 1, 1]
    assert antcsp.find_polymorphism("k3", "wnu:3") is None
    assert antcsp.is_core("k3")
    assert not antcsp.is_core(read("c4.json"))
    assert antcsp.core_retract(read("c4.json"))["universe"] in (2, [0, 1])


def test_consistency():
    assert antcsp.establish_consistency(read("triangle.json"), "k2", 2) is None
    assert antcsp.establish_consistency(read("c4.json"), "k2", 2) is not None
    assert antcsp.ant_separator(read("triangle.json"), "k3", 3, 2, "fundamental") is True


def test_dimacs_roundtrip():
    s = antcsp.dimacs_import(read("sat.cnf"))
    assert antcsp.dimacs_import(antcsp.dimacs_export(s)) == s
    out = antcsp.reduce_to_3sat("p cnf 4 1\n1 -2 3 4 0\n")
    assert out["structure"]["universe"] == 5
    with pytest.raises(antcsp.InvalidArgument):
        antcsp.reduce_to_3sat(read("sat.cnf"))


def test_errors_and_budget():
    with pytest.raises(antcsp.ParseError):
        antcsp.solve(read("bad_syntax.json"), "k3")
    with pytest.raises(antcsp.InvalidArgument):
        antcsp.builtin("k9")
    antcsp.set_budget(2)
    try:
        with pytest.raises(antcsp.BudgetExceeded):
            antcsp.solve(read("k4.json"), "k3")
    finally:
        antcsp.set_budget(0)
