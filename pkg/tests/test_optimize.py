import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_wavefunction
from meao.errors import ValidationError
from meao.fockspace import (
    RotationSchedule,
    WaveFunction,
    ideal_bond_state,
    rotate_wavefunction,
)
from meao.optimize import (
    AtomicPartition,
    MeaoResult,
    OptimizerOptions,
    f_gradient,
    f_hessian_diag,
    f_meao,
    optimize_meao,
    rotate_2rdm_jacobi,
)
from meao.rdm import two_rdm_mixed

TWO_ATOMS = AtomicPartition(2, (("L", (0,)), ("R", (1,))))
MO_STATE = WaveFunction(2, {"1100": 1.0})


def _f_curve(theta):
    c, s = math.cos(theta), math.sin(theta)
    return 2.0 * c**4 * s**4


def _f_slope(theta):
    c, s = math.cos(theta), math.sin(theta)
    return 8.0 * c**3 * s**3 * (c * c - s * s)


def test_partition_validation():
    with pytest.raises(ValidationError):
        AtomicPartition(2, (("A", (0,)),))  # orbital 1 unassigned
    with pytest.raises(ValidationError):
        AtomicPartition(2, (("A", (0, 1)), ("B", (1,))))  # overlap
    with pytest.raises(ValidationError):
        AtomicPartition(2, (("A", (0,)), ("A", (1,))))  # duplicate label
    part = AtomicPartition.from_mapping(4, {"A": [0, 1], "B": [2, 3]})
    assert part.atom_of(2) == "B"
    assert part.labels_by_orbital() == ["A", "A", "B", "B"]
    assert part.inter_atom_pairs() == [(0, 2), (0, 3), (1, 2), (1, 3)]
    assert part.intra_atom_pairs() == [(0, 1), (2, 3)]


def test_f_meao_ideal_bond_is_one_eighth():
    g = two_rdm_mixed(ideal_bond_state())
    assert f_meao(g, TWO_ATOMS) == pytest.approx(0.125, abs=1e-14)


def test_f_meao_along_rotation_matches_closed_form():
    g0 = two_rdm_mixed(MO_STATE)
    for theta in np.linspace(0.0, math.pi / 2, 9):
        g = rotate_2rdm_jacobi(g0, 0, 1, theta)
        assert f_meao(g, TWO_ATOMS) == pytest.approx(_f_curve(theta), abs=1e-12)


def test_rdm_rotation_consistent_with_state_rotation():
    """Rotating the 2-RDM tensor must equal rotating the state first."""
    wf = random_wavefunction(3, seed=2, n_up=2, n_dn=1)
    g = two_rdm_mixed(wf)
    for k, l, theta in [(0, 1, 0.37), (1, 2, -0.9), (0, 2, 1.2)]:
        via_tensor = rotate_2rdm_jacobi(g, k, l, theta).tensor
        rotated = rotate_wavefunction(
            wf, RotationSchedule(3, ((k, l, theta),))
        )
        via_state = two_rdm_mixed(rotated).tensor
        assert np.allclose(via_tensor, via_state, atol=1e-12)


def test_gradient_matches_closed_form():
    g0 = two_rdm_mixed(MO_STATE)
    for theta in (0.1, math.pi / 8, 0.6, 1.1):
        g = rotate_2rdm_jacobi(g0, 0, 1, theta)
        grad = f_gradient(g, TWO_ATOMS, [(0, 1)])[0]
        assert grad == pytest.approx(_f_slope(theta), abs=1e-12)


def test_gradient_vanishes_at_maximum():
    g = two_rdm_mixed(ideal_bond_state())
    assert f_gradient(g, TWO_ATOMS, [(0, 1)])[0] == pytest.approx(0.0, abs=1e-13)
    assert f_hessian_diag(g, TWO_ATOMS, [(0, 1)])[0] == pytest.approx(
        -2.0, abs=1e-12
    )


def test_gradient_and_hessian_finite_difference():
    wf = random_wavefunction(3, seed=9, n_up=2, n_dn=1)
    g = two_rdm_mixed(wf)
    part = AtomicPartition(3, (("A", (0, 1)), ("B", (2,))))
    h = 1e-5
    for pair in [(0, 1), (1, 2)]:
        plus = f_meao(rotate_2rdm_jacobi(g, *pair, h), part)
        minus = f_meao(rotate_2rdm_jacobi(g, *pair, -h), part)
        center = f_meao(g, part)
        fd_grad = (plus - minus) / (2 * h)
        fd_hess = (plus - 2 * center + minus) / h**2
        assert f_gradient(g, part, [pair])[0] == pytest.approx(
            fd_grad, rel=1e-6, abs=1e-9
        )
        assert f_hessian_diag(g, part, [pair])[0] == pytest.approx(
            fd_hess, rel=1e-4, abs=1e-6
        )


def test_optimizer_reaches_ideal_bond_from_molecular_orbital():
    g = two_rdm_mixed(MO_STATE)
    opts = OptimizerOptions(restarts=4, seed=3, allow_interatom_rotations=True)
    result = optimize_meao(g, TWO_ATOMS, opts)
    assert result.converged
    assert result.f_final == pytest.approx(0.125, abs=1e-10)
    assert len(result.restarts) == 4
    for outcome in result.restarts:
        assert outcome.f_final == pytest.approx(0.125, abs=1e-8)


def test_optimizer_schedule_reproduces_f_final():
    g = two_rdm_mixed(random_wavefunction(3, seed=4, n_up=2, n_dn=1))
    part = AtomicPartition(3, (("A", (0, 1)), ("B", (2,))))
    result = optimize_meao(g, part, OptimizerOptions(restarts=2, seed=0))
    replayed = g
    for k, l, theta in result.schedule.steps:
        replayed = rotate_2rdm_jacobi(replayed, k, l, theta)
    assert f_meao(replayed, part) == pytest.approx(result.f_final, abs=1e-12)
    assert np.allclose(result.gamma.tensor, replayed.tensor, atol=1e-12)


def test_optimizer_stationary_at_maximum():
    g = two_rdm_mixed(ideal_bond_state())
    opts = OptimizerOptions(allow_interatom_rotations=True, restarts=1)
    result = optimize_meao(g, TWO_ATOMS, opts)
    assert result.converged
    assert result.accepted_steps == 0
    assert result.f_final == pytest.approx(0.125, abs=1e-14)


def test_optimizer_without_rotation_pairs_is_identity():
    g = two_rdm_mixed(MO_STATE)
    result = optimize_meao(g, TWO_ATOMS, OptimizerOptions(restarts=1))
    assert result.converged
    assert result.f_final == result.f_initial
    assert len(result.schedule.steps) == 0


def test_optimizer_history_is_monotone_per_restart():
    g = two_rdm_mixed(random_wavefunction(3, seed=6, n_up=1, n_dn=1))
    part = AtomicPartition(3, (("A", (0, 1, 2)),))
    # single atom: every pair is intra-atom but nothing is inter-atom,
    # so F is identically zero and must stay zero
    assert part.inter_atom_pairs() == []
    result = optimize_meao(g, part, OptimizerOptions(restarts=1))
    assert result.f_final == 0.0

    part2 = AtomicPartition(3, (("A", (0, 1)), ("B", (2,))))
    result = optimize_meao(g, part2, OptimizerOptions(restarts=3, seed=1))
    for outcome in result.restarts:
        diffs = np.diff(outcome.history)
        assert np.all(diffs > -1e-12)


def test_u_matrix_is_orthogonal():
    g = two_rdm_mixed(random_wavefunction(3, seed=8, n_up=2, n_dn=1))
    part = AtomicPartition(3, (("A", (0, 1)), ("B", (2,))))
    result = optimize_meao(g, part, OptimizerOptions(restarts=2, seed=5))
    u = result.u_matrix
    assert np.allclose(u @ u.T, np.eye(3), atol=1e-12)


def test_f_meao_requires_matching_sizes():
    g = two_rdm_mixed(MO_STATE)
    with pytest.raises(ValidationError):
        f_meao(g, AtomicPartition(3, (("A", (0, 1)), ("B", (2,)))))


@settings(max_examples=30, deadline=None)
@given(
    theta=st.floats(-math.pi, math.pi, allow_nan=False),
    seed=st.integers(0, 500),
)
def test_jacobi_rotation_preserves_rdm_structure(theta, seed):
    g = two_rdm_mixed(random_wavefunction(2, seed=seed, n_up=1, n_dn=1))
    rotated = rotate_2rdm_jacobi(g, 0, 1, theta)
    assert rotated.trace() == pytest.approx(g.trace(), abs=1e-10)
    m = rotated.as_matrix()
    assert np.allclose(m, m.conj().T, atol=1e-10)
    assert np.linalg.eigvalsh(m).min() > -1e-10
