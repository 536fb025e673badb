import numpy as np
import pytest

import oracles
from qantenna import (
    AngularGrid,
    amplitude2,
    amplitude3,
    antidiagonal_state,
    dark_state,
    dicke_state,
    envelope_antidiagonal,
    envelope_subdiagonal,
    envelope_triples,
    equispaced,
    nn_triples_state,
    subdiagonal_state,
)
from qantenna.factory import dirichlet_ratio


def _amps(s):
    return {k: complex(v) for k, v in s.terms.items()}


def test_antidiagonal_even():
    s = antidiagonal_state(4)
    assert set(s.terms) == {(4, 1), (3, 2)}
    np.testing.assert_allclose(list(s.terms.values()), 1 / np.sqrt(2))


def test_antidiagonal_n20():
    s = antidiagonal_state(20)
    assert len(s.terms) == 10
    np.testing.assert_allclose(list(s.terms.values()), 1 / np.sqrt(10))


def test_antidiagonal_odd_drops_middle():
    assert _amps(antidiagonal_state(3)) == {(3, 1): 1.0}


def test_subdiagonal_nearest_neighbour():
    s = subdiagonal_state(3, {1: 1.0})
    assert set(s.terms) == {(2, 1), (3, 2)}
    np.testing.assert_allclose(list(s.terms.values()), 1 / np.sqrt(2))


def test_subdiagonal_combo_weights():
    s = subdiagonal_state(20, {1: 1.0, 2: -0.7, 3: 0.4})
    assert s.norm() == pytest.approx(1.0, abs=1e-12)
    assert s.terms[(3, 1)] / s.terms[(2, 1)] == pytest.approx(-0.7)
    assert s.terms[(4, 1)] / s.terms[(2, 1)] == pytest.approx(0.4)
    assert len(s.terms) == 19 + 18 + 17


def test_subdiagonal_offset_too_large():
    with pytest.raises(ValueError):
        subdiagonal_state(3, {3: 1.0})


def test_dicke():
    assert _amps(dicke_state(2)) == {(2, 1): 1.0}
    s = dicke_state(20)
    assert len(s.terms) == 190
    np.testing.assert_allclose(list(s.terms.values()), 1 / np.sqrt(190))


@pytest.mark.parametrize("N", range(2, 31))
def test_dicke_norm(N):
    assert sum(abs(c) ** 2 for c in dicke_state(N).terms.values()) == pytest.approx(1.0, abs=1e-12)


def test_dark_sign_alternates_with_offset():
    s = dark_state(20, 3.2)
    for (j, m), c in s.terms.items():
        assert np.sign(c.real) == (-1) ** (j - m)


def test_dark_amplitude_ratio():
    s = dark_state(20, 3.2)
    ratio = abs(s.terms[(12, 9)] / s.terms[(12, 10)])
    assert ratio == pytest.approx(oracles.DARK_RATIO_12_9_OVER_12_10, rel=1e-12)


def test_dark_rejects_bad_sigma():
    with pytest.raises(ValueError):
        dark_state(10, -1.0)


def test_triples():
    assert _amps(nn_triples_state(3)) == {(3, 2, 1): 1.0}
    s = nn_triples_state(20)
    assert len(s.terms) == 18
    np.testing.assert_allclose(list(s.terms.values()), 1 / np.sqrt(18))
    with pytest.raises(ValueError):
        nn_triples_state(2)


def test_dirichlet_limit():
    assert dirichlet_ratio(7, 0.0) == pytest.approx(7.0)
    assert dirichlet_ratio(6, 2 * np.pi) == pytest.approx(-6.0)
    assert dirichlet_ratio(6, np.array([4 * np.pi + 1e-12]))[0] == pytest.approx(6.0)
    s = np.array([0.3, 2 * np.pi - 1e-6])
    np.testing.assert_allclose(dirichlet_ratio(6, s), np.sin(3 * s) / np.sin(s / 2), rtol=1e-6)


@pytest.mark.parametrize("N", [4, 9, 20])
def test_envelope_antidiagonal_peak(N):
    assert envelope_antidiagonal(N, 0.0) == pytest.approx(np.sqrt(N))


@pytest.mark.parametrize("l", [1, 2, 3])
def test_envelope_subdiagonal_contra_line(l):
    N, x = 20, 0.37
    assert envelope_subdiagonal(N, l, x, -x) == pytest.approx(2 * abs(np.cos(l * x)) * np.sqrt(N - l))


def test_envelope_antidiagonal_matches_amplitude():
    N, kd = 20, 2.0
    g = equispaced(N, kd)
    th = AngularGrid.uniform(50).thetas
    t1, t2 = np.meshgrid(th, th, indexing="ij")
    amp = np.abs(amplitude2(g, antidiagonal_state(N), t1, t2))
    env = envelope_antidiagonal(N, kd * (np.cos(t1) - np.cos(t2)))
    # the closed form carries a per-term 1/sqrt(N); compare shapes
    np.testing.assert_allclose(amp / amp.max(), env / env.max(), atol=1e-10)


def test_envelope_subdiagonal_matches_amplitude():
    N, kd, l = 12, 2.0, 2
    g = equispaced(N, kd)
    th = AngularGrid.uniform(40).thetas
    t1, t2 = np.meshgrid(th, th, indexing="ij")
    amp = np.abs(amplitude2(g, subdiagonal_state(N, {l: 1.0}), t1, t2))
    env = envelope_subdiagonal(N, l, kd * np.cos(t1), kd * np.cos(t2))
    np.testing.assert_allclose(amp, env, atol=1e-10)


def test_envelope_triples_matches_amplitude():
    N, kd = 20, 2.0
    g = equispaced(N, kd)
    th = AngularGrid.uniform(20).thetas
    t = np.meshgrid(th, th, th, indexing="ij")
    amp = np.abs(amplitude3(g, nn_triples_state(N), *t))
    env = envelope_triples(N, *(kd * np.cos(a) for a in t))
    np.testing.assert_allclose(amp / amp.max(), env / env.max(), atol=1e-10)
