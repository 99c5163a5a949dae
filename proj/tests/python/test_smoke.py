import math

import numpy as np
import pytest

import npch


def test_version():
    assert npch.__version__ == "0.3.0"


def test_spd_distance_anchor():
    q = np.diag([math.e**2, math.e**-2])
    assert npch.spd_distance(np.eye(2), q) == pytest.approx(2 * math.sqrt(2), abs=1e-12)


def test_sym_eig_reconstructs():
    s = np.array([[2.0, 1.0], [1.0, 2.0]])
    vals, rot = npch.sym_eig(s)
    assert sorted(vals) == pytest.approx([1.0, 3.0])
    assert rot @ np.diag(vals) @ rot.T == pytest.approx(s)


def test_npc_and_cat():
    assert npch.npc_check("h2", samples=300, seed=3)["residual"] >= -1e-12
    assert npch.cat_check("tree", kappa=1.0, samples=300)["residual"] >= -1e-9
    with pytest.raises(npch.UnsupportedSpace):
        npch.cat_check("euclidean")


def test_translation_and_decay():
    assert npch.translation_length(np.diag([3.0, 1 / 3])) == pytest.approx(math.sqrt(2) * math.log(9))
    n = np.array([[1.0, 1.0], [0.0, 1.0]])
    assert npch.classify(n) == "parabolic"
    fit = npch.decay_fit(n)
    assert fit["delta"] <= 1e-6 and fit["a"] > 0 and fit["r_squared"] >= 0.99


def test_calculus():
    r = npch.calculus_check(0, 1.0)
    assert r["lhs"] == pytest.approx(1 / (8 * math.log(2)), abs=1e-9)
    assert r["ok"]


def test_run_command():
    report, passed = npch.run("isometry", "analyze", "--space", "spd", "--matrix", "[[3,0],[0,0.3333333333]]")
    assert passed
    assert report["classification"] == "hyperbolic"


def test_usage_error():
    with pytest.raises(npch.UsageError):
        npch.run("space-check", "--nope", "1")


def test_acceptance_criterion():
    r = npch.acceptance(2)
    assert r["pass"], r
