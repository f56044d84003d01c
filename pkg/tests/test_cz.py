import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from hardylorentz import (HilbertKernel, Interval, Kernel, Signal, apply_cz, atom_family,
                          atom_tail_check, cz_at, default_family, dini_constant, dini_integral,
                          kernel_by_name, make_atom, make_signal, omega_p, taylor_remainder,
                          verify_theorem_2_2)

H = HilbertKernel()
GRID = Signal(0.0, 1 / 128, np.zeros(128))


def haar(n=64, p=1.0):
    grid = Signal(0.0, 1.0 / n, np.zeros(n))
    raw = grid.with_values(np.r_[np.ones(n // 2), -np.ones(n // 2)])
    return make_atom(Interval(0.0, 1.0), raw, p)[0]


# kernel

@pytest.mark.parametrize("alpha", [0, 1, 2, 3])
def test_derivative_matches_finite_differences(alpha):
    x, y, step = 2.0, 0.3, 1e-3
    if alpha == 0:
        assert H.derivative(0, x, y) == pytest.approx(1 / (x - y))
        return
    lower = lambda s: H.derivative(alpha - 1, x, s)
    fd = (lower(y + step) - lower(y - step)) / (2 * step)
    assert H.derivative(alpha, x, y) == pytest.approx(fd, rel=1e-5)
    assert H.coefficient(alpha, x, y) == pytest.approx(H.derivative(alpha, x, y) / math.factorial(alpha))


def test_kernel_lookup():
    assert isinstance(kernel_by_name("Hilbert"), HilbertKernel)
    with pytest.raises(ValueError):
        kernel_by_name("riesz")


# operator

def test_apply_cz_zero():
    assert not np.any(apply_cz(Signal(0.0, 0.1, np.zeros(10))).values)


def test_apply_cz_against_quadrature():
    rng = np.random.default_rng(1)
    f = Signal(0.0, 1 / 16, rng.normal(size=16))
    tf = apply_cz(f)
    for i in (0, 5, 15):
        x = f.centers[i]
        total = 0.0
        for j in range(f.size):
            if j == i:
                continue  # own cell: symmetric truncation cancels exactly
            a, b = f.edges[j], f.edges[j + 1]
            total += f.values[j] * quad(lambda y: 1 / (x - y), a, b)[0]
        assert tf.values[i] == pytest.approx(total, rel=1e-10, abs=1e-12)
    assert np.allclose(cz_at(f, f.centers), tf.values, rtol=1e-10, atol=1e-12)


def test_apply_cz_rejects_small_truncation():
    with pytest.raises(ValueError):
        apply_cz(Signal(0.0, 0.1, np.ones(10)), eps=0.01)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=20))
def test_antisymmetry_on_even_signals(half):
    vals = np.array(half + [1.0] + half[::-1])
    f = Signal(0.0, 1 / vals.size, vals)
    mid = vals.size // 2
    assert abs(apply_cz(f).values[mid]) <= 1e-10 * max(1.0, np.abs(vals).sum())


def test_linearity():
    rng = np.random.default_rng(2)
    f = Signal(0.0, 1 / 32, rng.normal(size=32))
    g = Signal(0.0, 1 / 32, rng.normal(size=32))
    lhs = apply_cz(f * 2.0 + g).values
    assert np.allclose(lhs, 2 * apply_cz(f).values + apply_cz(g).values, atol=1e-12)


def test_far_field_decay_of_atoms():
    for _, atoms, grid in (atom_family(4, i, 256, 1.0) for i in range(5)):
        for atom in atoms:
            iv = atom.interval
            x = np.concatenate((np.linspace(iv.right + 2 * iv.length, iv.right + 40 * iv.length, 30),
                                np.linspace(iv.left - 40 * iv.length, iv.left - 2 * iv.length, 30)))
            dist = np.maximum(x - iv.right, iv.left - x)
            bound = 0.5 * iv.length ** 2 * atom.sup / dist ** 2
            assert np.all(np.abs(cz_at(atom.profile, x)) <= bound * (1 + 1e-9))


# Taylor remainders

def test_taylor_remainder_examples():
    iv = Interval(0.0, 0.5)
    x = np.array([1.5, -2.0, 7.0])
    assert np.all(taylor_remainder(H, iv, 0, x, iv.center) == 0.0)
    y = np.array([0.0, 0.1, 0.45])
    for xx in x:
        closed = (y - iv.center) / ((xx - y) * (xx - iv.center))
        assert np.allclose(taylor_remainder(H, iv, 0, xx, y), closed, rtol=1e-10, atol=0)
        for n in (3, 10):
            direct = Kernel.remainder(H, xx, y, iv.center, n)
            assert np.allclose(taylor_remainder(H, iv, n, xx, y), direct, rtol=1e-6, atol=1e-14)
    with pytest.raises(ValueError):
        taylor_remainder(H, iv, 0, 0.6, 0.1)
    with pytest.raises(ValueError):
        taylor_remainder(H, iv, 0, 3.0, 0.9)


# modulus and Dini constant

def test_omega_monotone_in_delta():
    deltas = np.ldexp(1.0, -np.arange(8, -1, -1))
    vals = [omega_p(H, 1.0, 0, d, grid=GRID) for d in deltas]
    assert np.all(np.diff(vals) >= -1e-15)
    vals = [omega_p(H, 0.5, 1, d, grid=GRID) for d in deltas]
    assert np.all(np.diff(vals) >= -1e-15)
    with pytest.raises(ValueError):
        omega_p(H, 1.0, 0, 1.5, grid=GRID)


def test_omega_family_superset():
    family = default_family(GRID)
    tiny = [family[0]]
    for d in (0.5, 0.125):
        assert omega_p(H, 1.0, 0, d, family, GRID) >= omega_p(H, 1.0, 0, d, tiny, GRID)


def test_dini_integral_closed_forms():
    deltas = np.ldexp(1.0, -np.arange(12, -1, -1))
    value, div = dini_integral(deltas, deltas, 1.0)
    assert value == pytest.approx(1.0, rel=1e-12) and not div
    value, _ = dini_integral(deltas, deltas ** 0.5, 2.0)
    assert value == pytest.approx(1.0, rel=1e-12)
    assert dini_integral(deltas, np.zeros_like(deltas), 2.0) == (0.0, False)
    value, div = dini_integral(deltas, np.ones_like(deltas), 1.0)
    assert div and math.isinf(value)


@given(st.lists(st.floats(0.0, 1.0), min_size=13, max_size=13), st.floats(1.0, 3.0))
def test_dini_monotone_under_domination(extra, r):
    deltas = np.ldexp(1.0, -np.arange(12, -1, -1))
    small = deltas * 0.5
    big = small + deltas * np.asarray(extra)
    a, _ = dini_integral(deltas, small, r)
    b, _ = dini_integral(deltas, big, r)
    assert a <= b * (1 + 1e-12)


def test_dini_constant_hilbert():
    rep = dini_constant(H, 1.0, 2.0, grid=GRID)
    assert rep.exponent == 2.0 and not rep.divergent
    assert 0 < rep.A_pq < 10
    assert rep.to_json()["A_pq"] == rep.A_pq
    with pytest.raises(ValueError):
        dini_constant(H, 1.0, 1.0, grid=GRID)


# atom tails

def test_atom_tail_zero_atom():
    grid = Signal(0.0, 1 / 32, np.zeros(32))
    zero, scale = make_atom(Interval(0.25, 0.5), grid, 1.0)
    assert scale == 0.0
    rep = atom_tail_check(zero, None, 0.5)
    assert rep["lhs"] == 0.0 and rep.passed


def test_atom_tail_haar():
    rep = atom_tail_check(haar(), H, 0.25)
    assert rep.passed and 0 < rep["lhs"] <= rep["omega"]


def test_atom_tail_decreases_with_delta():
    atom = haar(32)
    grid = Signal(-32.0, 1 / 32, np.zeros(2048 + 32))
    lhs = [atom_tail_check(atom, H, d, grid=grid)["lhs"] for d in (0.5, 0.25, 0.125, 0.0625)]
    assert all(a >= b for a, b in zip(lhs, lhs[1:]))


# weak-type estimate

def test_weak_type_zero_and_homogeneity():
    z = Signal(0.0, 1 / 64, np.zeros(64))
    assert verify_theorem_2_2(z, 1.0, 2.0)["C"] == 0.0
    f = make_signal(7, 0, 128, "uniform", moments_for=1.0)
    dini = dini_constant(H, 1.0, 2.0, grid=f)
    base = verify_theorem_2_2(f, 1.0, 2.0, dini=dini)
    double = verify_theorem_2_2(f * 2.0, 1.0, 2.0, dini=dini)
    assert double["weak_norm"] == pytest.approx(2 * base["weak_norm"], rel=1e-12)
    assert double["C"] == pytest.approx(base["C"], rel=1e-10)
    assert base.passed and 0 < base["C"] < 100
    with pytest.raises(ValueError):
        verify_theorem_2_2(f, 1.0, 1.0)
