import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import jworacle as jw
from conftest import random_wavefunction
from meao.errors import ValidationError
from meao.fockspace import (
    RotationSchedule,
    WaveFunction,
    config_sector,
    format_config,
    ghz_state,
    ideal_bond_state,
    ionic_state,
    jacobi_matrix,
    mode_index,
    parse_config,
    rotate_wavefunction,
    sector_configs,
    sector_dimension,
    w_state,
)


def test_mode_index_interleaving():
    assert mode_index(0, 0) == 0
    assert mode_index(0, 1) == 1
    assert mode_index(3, 0) == 6
    assert mode_index(3, 1) == 7


def test_parse_format_roundtrip():
    for text in ("1100", "0011", "011010", "00000000", "11111111"):
        n = len(text) // 2
        assert format_config(parse_config(text), n) == text


def test_parse_config_most_significant_first():
    # leftmost character is mode 0 (orbital 0, spin up)
    assert parse_config("10") == 0b01
    assert parse_config("01") == 0b10
    assert parse_config("1100") == 0b0011


def test_parse_config_rejects_garbage():
    with pytest.raises(ValidationError):
        parse_config("10x0")


def test_config_sector_counts():
    assert config_sector(parse_config("1100")) == (1, 1)
    assert config_sector(parse_config("1110")) == (2, 1)
    assert config_sector(0) == (0, 0)


def test_sector_configs_sizes():
    for n, nu, nd in [(2, 1, 1), (3, 2, 1), (4, 2, 2)]:
        configs = sector_configs(n, nu, nd)
        assert len(configs) == sector_dimension(n, nu, nd)
        assert len(configs) == math.comb(n, nu) * math.comb(n, nd)
        assert all(config_sector(int(c)) == (nu, nd) for c in configs)
        assert np.all(np.diff(configs.astype(np.int64)) > 0)


def test_wavefunction_requires_unit_norm():
    with pytest.raises(ValidationError):
        WaveFunction(1, {"11": 0.5})
    wf = WaveFunction(1, {"11": 0.5}, normalize=True)
    assert wf.amplitude(parse_config("11")) == pytest.approx(1.0)


def test_wavefunction_rejects_wrong_length_config():
    with pytest.raises(ValidationError):
        WaveFunction(2, {"110": 1.0})


def test_wavefunction_rejects_duplicate_keys():
    with pytest.raises(ValidationError):
        WaveFunction(1, [("11", 0.5), (0b11, 0.5)])


def test_ideal_bond_state_amplitudes():
    wf = ideal_bond_state()
    expected = {"0011": 0.5, "1001": 0.5, "0110": -0.5, "1100": 0.5}
    assert {format_config(c, 2): a.real for c, a in wf.items()} == pytest.approx(
        expected
    )


def test_ionic_state_family():
    # p = 1 collapses onto the doubly occupied left orbital
    wf = ionic_state(1.0)
    assert wf.amplitude(parse_config("0011")) == pytest.approx(1.0)
    wf = ionic_state(0.5)
    covalent = math.sqrt((1 - 0.25) / 3.0)
    assert wf.amplitude(parse_config("0011")) == pytest.approx(0.5)
    assert wf.amplitude(parse_config("1001")) == pytest.approx(covalent)
    assert wf.amplitude(parse_config("0110")) == pytest.approx(-covalent)
    assert wf.amplitude(parse_config("1100")) == pytest.approx(covalent)
    assert sum(abs(a) ** 2 for _, a in wf.items()) == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        ionic_state(1.2)


def test_ghz_and_w_states():
    ghz = ghz_state(3)
    assert ghz.local_dims == (2, 2, 2)
    assert ghz.amplitudes[0] == pytest.approx(1 / math.sqrt(2))
    assert ghz.amplitudes[7] == pytest.approx(1 / math.sqrt(2))
    w = w_state(3)
    # single excitation on party j sits at flat index 2**(n-1-j)
    nonzero = np.nonzero(np.abs(w.amplitudes) > 1e-14)[0]
    assert sorted(nonzero.tolist()) == [1, 2, 4]
    assert np.allclose(w.amplitudes[nonzero], 1 / math.sqrt(3))


def test_jacobi_matrix_convention():
    theta = 0.3
    j = jacobi_matrix(4, 1, 3, theta)
    assert j[1, 1] == pytest.approx(math.cos(theta))
    assert j[3, 3] == pytest.approx(math.cos(theta))
    assert j[1, 3] == pytest.approx(-math.sin(theta))
    assert j[3, 1] == pytest.approx(math.sin(theta))
    assert np.allclose(j @ j.T, np.eye(4), atol=1e-14)


def test_schedule_matrix_is_ordered_product():
    sched = RotationSchedule(3, ((0, 1, 0.4), (1, 2, -0.9)))
    expected = jacobi_matrix(3, 1, 2, -0.9) @ jacobi_matrix(3, 0, 1, 0.4)
    assert np.allclose(sched.matrix, expected, atol=1e-14)
    longer = sched.then(0, 2, 0.2)
    assert len(longer.steps) == 3
    assert np.allclose(
        longer.matrix, jacobi_matrix(3, 0, 2, 0.2) @ expected, atol=1e-14
    )


def test_rotation_bonding_to_ideal_bond():
    """A quarter rotation maps the doubly occupied bonding orbital onto
    the maximally entangled two-orbital state."""
    mo = WaveFunction(2, {"1100": 1.0})
    rotated = rotate_wavefunction(mo, RotationSchedule(2, ((0, 1, math.pi / 4),)))
    ideal = ideal_bond_state()
    overlap = sum(
        rotated.amplitude(c).conjugate() * a for c, a in ideal.items()
    )
    assert abs(overlap) == pytest.approx(1.0, abs=1e-12)


def test_rotation_matches_dense_exponential():
    wf = random_wavefunction(3, seed=7)
    sched = RotationSchedule(3, ((0, 1, 0.3), (1, 2, -0.7), (0, 2, 1.1)))
    rotated = rotate_wavefunction(wf, sched)
    u = jw.rotation_unitary(3, sched.steps)
    expected = u @ jw.state_vector(wf)
    assert np.allclose(jw.state_vector(rotated), expected, atol=1e-12)


def test_rotation_preserves_sector_and_norm():
    wf = random_wavefunction(3, seed=3, n_up=2, n_dn=1)
    rotated = rotate_wavefunction(
        wf, RotationSchedule(3, ((0, 2, 0.8), (1, 2, 0.1)))
    )
    assert all(config_sector(c) == (2, 1) for c, _ in rotated.items())
    assert sum(abs(a) ** 2 for _, a in rotated.items()) == pytest.approx(1.0)


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    thetas=st.lists(
        st.floats(-1.5, 1.5, allow_nan=False), min_size=1, max_size=4
    ),
)
def test_rotation_inverse_restores_state(seed, thetas):
    pairs = [(0, 1), (1, 2), (0, 2)]
    steps = [(*pairs[i % 3], t) for i, t in enumerate(thetas)]
    wf = random_wavefunction(3, seed=seed)
    forward = RotationSchedule(3, tuple(steps))
    backward = RotationSchedule(3, tuple((k, l, -t) for k, l, t in reversed(steps)))
    restored = rotate_wavefunction(rotate_wavefunction(wf, forward), backward)
    before = {c: a for c, a in wf.items()}
    for c, a in restored.items():
        assert a == pytest.approx(before.get(c, 0.0), abs=1e-10)
