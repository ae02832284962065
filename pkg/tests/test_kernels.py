"""Parity between the compiled stepping kernel and the NumPy fallback."""

import numpy as np
import pytest

from skbench import _kernels_py
from skbench.classical import AnnealSchedule
from skbench.model import bits_to_spins, generate_instance

_kernels = pytest.importorskip("skbench._kernels")


def _prepare(inst, starts):
    w32 = inst.w.astype(np.int32)
    spins = bits_to_spins(starts, inst.n)
    fields = np.ascontiguousarray(spins.astype(np.int32) @ w32)
    energies = (spins.astype(np.int64) * fields).sum(axis=1)
    return w32, spins, fields, energies


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_backends_bit_identical(seed):
    gen = np.random.default_rng(seed)
    n = int(gen.integers(3, 12))
    steps = int(gen.integers(1, 3000))
    batch = int(gen.integers(1, 40))
    inst = generate_instance(n, seed)
    starts = gen.integers(0, 1 << n, size=batch, dtype=np.uint64)
    bit_draws = gen.integers(0, n, size=(batch, steps), dtype=np.int64)
    with np.errstate(divide="ignore"):
        log_u = np.log(gen.random((batch, steps)))
    betas = AnnealSchedule(total_steps=steps, beta_final=float(gen.random() * 2)).step_betas()

    w32, spins_a, fields_a, energies_a = _prepare(inst, starts)
    _kernels.mh_steps(w32, spins_a, fields_a, energies_a, bit_draws, log_u, betas)

    _, spins_b, fields_b, energies_b = _prepare(inst, starts)
    _kernels_py.mh_steps(w32, spins_b, fields_b, energies_b, bit_draws, log_u, betas)

    assert np.array_equal(spins_a, spins_b)
    assert np.array_equal(fields_a, fields_b)
    assert np.array_equal(energies_a, energies_b)


def test_energy_bookkeeping_consistent():
    # maintained energies equal recomputed energies of the final spins
    gen = np.random.default_rng(9)
    inst = generate_instance(8, 9)
    starts = gen.integers(0, 256, size=16, dtype=np.uint64)
    bit_draws = gen.integers(0, 8, size=(16, 500), dtype=np.int64)
    log_u = np.log(gen.random((16, 500)))
    betas = AnnealSchedule(total_steps=500).step_betas()
    w32, spins, fields, energies = _prepare(inst, starts)
    _kernels.mh_steps(w32, spins, fields, energies, bit_draws, log_u, betas)
    recomputed = np.einsum("bi,bi->b", spins.astype(np.int64), spins.astype(np.int32) @ w32)
    assert np.array_equal(energies, recomputed)
    refields = spins.astype(np.int32) @ w32
    assert np.array_equal(fields, refields)


def test_shape_mismatch_rejected():
    gen = np.random.default_rng(1)
    inst = generate_instance(4, 1)
    starts = gen.integers(0, 16, size=4, dtype=np.uint64)
    w32, spins, fields, energies = _prepare(inst, starts)
    betas = AnnealSchedule(total_steps=10).step_betas()
    bad_bits = gen.integers(0, 4, size=(4, 5), dtype=np.int64)
    log_u = np.log(gen.random((4, 10)))
    with pytest.raises(ValueError):
        _kernels.mh_steps(w32, spins, fields, energies, bad_bits, log_u, betas)
