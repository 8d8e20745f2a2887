import numpy as np
import pytest

from meao.fockspace import WaveFunction, sector_configs


def random_wavefunction(n_orbitals, seed, n_up=None, n_dn=None, real=False):
    """Haar-ish random state, full Fock space or a fixed particle sector."""
    rng = np.random.default_rng(seed)
    if n_up is None:
        configs = np.arange(1 << (2 * n_orbitals), dtype=np.uint64)
    else:
        configs = sector_configs(n_orbitals, n_up, n_dn)
    amps = rng.normal(size=len(configs))
    if not real:
        amps = amps + 1j * rng.normal(size=len(configs))
    return WaveFunction(
        n_orbitals, list(zip(configs.tolist(), amps.tolist())), normalize=True
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
