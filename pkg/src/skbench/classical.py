"""Classical heuristics and the exact Markov-chain objects used to test them.

Brute force scans configurations in index order; random sampling keeps a
running minimum over uniform draws; Metropolis-Hastings proposes single bit
flips (uniform over the n bits) and accepts downhill moves always, uphill
moves with probability exp(beta * (E(x) - E(y))). The inverse temperature
follows a linear schedule from 0 to beta_final, updated after every step.

The dense transition matrix, Gibbs distribution, and spectral gap are built
for small n only and exist so properties (detailed balance, convergence,
gap inequalities) can be checked against exact linear algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import (
    SkInstance,
    SpinConfig,
    bits_to_spins,
    energy_table,
    spins_to_bits,
)

DEFAULT_MATRIX_CAP = 12

# Steps per generated randomness block. The block layout is part of the
# stream-consumption contract: it is a fixed function of the batch size, so
# a given (batch, steps) workload always consumes the same draws.
_STEP_CHUNK = 16384
_CHUNK_BUDGET = 1 << 22  # draws per block across the whole batch


def _chunk_for_batch(batch: int) -> int:
    return max(256, min(_STEP_CHUNK, _CHUNK_BUDGET // max(1, batch)))


@dataclass(frozen=True)
class AnnealSchedule:
    """Linear inverse-temperature schedule beta_{i+1} = beta_i + beta_final/T."""

    total_steps: int
    beta_final: float = 1.0
    beta_start: float = 0.0

    def __post_init__(self):
        if self.total_steps < 0:
            raise ValueError("total_steps must be nonnegative")
        if self.beta_start != 0.0:
            raise ValueError("schedule starts at beta = 0")
        if self.beta_final < 0:
            raise ValueError("beta_final must be nonnegative")

    def step_betas(self) -> np.ndarray:
        """Per-step betas [beta_1 .. beta_T], built by repeated increment."""
        t = self.total_steps
        if t == 0:
            return np.empty(0, dtype=np.float64)
        db = self.beta_final / t
        betas = np.empty(t, dtype=np.float64)
        betas[0] = self.beta_start
        if t > 1:
            # add.accumulate is sequential, exactly matching the update rule
            betas[1:] = self.beta_start + np.add.accumulate(np.full(t - 1, db))
        return betas

    def final_beta(self) -> float:
        """Value after all T updates; equals beta_final up to accumulated rounding."""
        betas = self.step_betas()
        if betas.size == 0:
            return self.beta_start
        return float(betas[-1] + self.beta_final / self.total_steps)


@dataclass(frozen=True)
class MarkovMatrix:
    """Column-stochastic one-bit-flip walk matrix; entries[y, x] = P(x -> y)."""

    beta: float
    entries: np.ndarray

    def __post_init__(self):
        self.entries.flags.writeable = False


@dataclass(frozen=True)
class GibbsDist:
    beta: float
    probs: np.ndarray

    def __post_init__(self):
        self.probs.flags.writeable = False


def bit_flip_neighbor(s: SpinConfig, j: int, n: int) -> SpinConfig:
    """The configuration differing from s in exactly bit j."""
    if not 0 <= j < n:
        raise ValueError(f"bit index {j} out of range for n={n}")
    return SpinConfig(s.bits ^ (1 << j))


# --- Metropolis-Hastings ------------------------------------------------------


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def mh_batch_run(
    inst: SkInstance,
    betas: np.ndarray,
    rng,
    batch: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Run `batch` independent chains for len(betas) steps.

    Randomness consumption order (fixed contract shared by both kernels):
    start states first, then alternating (bit, log-uniform) blocks of
    _chunk_for_batch(batch) steps. Returns (final bits uint64, final
    energies int64).
    """
    rng = _as_generator(rng)
    n = inst.n
    w32 = inst.w.astype(np.int32)
    starts = rng.integers(0, 1 << n, size=batch, dtype=np.uint64)
    spins = bits_to_spins(starts, n)
    fields = np.ascontiguousarray(spins.astype(np.int32) @ w32)
    energies = (spins.astype(np.int64) * fields).sum(axis=1)
    total = betas.shape[0]
    chunk = _chunk_for_batch(batch)
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        length = hi - lo
        bit_draws = rng.integers(0, n, size=(batch, length), dtype=np.int64)
        with np.errstate(divide="ignore"):  # u == 0 -> log -inf -> always accept
            log_u = np.log(rng.random((batch, length)))
        kernels.mh_steps(w32, spins, fields, energies, bit_draws, log_u, betas[lo:hi])
    return spins_to_bits(spins), energies


def mh_anneal(inst: SkInstance, sched: AnnealSchedule, rng) -> tuple[SpinConfig, float]:
    """Single annealing run; start state drawn uniformly from all 2^n configs."""
    bits, energies = mh_batch_run(inst, sched.step_betas(), rng, batch=1)
    return SpinConfig(int(bits[0])), float(energies[0])


def mh_fixed_beta_batch(
    inst: SkInstance, beta: float, steps: int, rng, batch: int
) -> tuple[np.ndarray, np.ndarray]:
    """Batch of chains at constant inverse temperature (no schedule)."""
    betas = np.full(steps, float(beta), dtype=np.float64)
    return mh_batch_run(inst, betas, rng, batch=batch)


def mh_chain(
    inst: SkInstance,
    sched: AnnealSchedule,
    rng,
    tunnel_prob: float = 0.0,
    record_trace: bool = False,
):
    """Reference single-chain anneal with optional extras.

    `tunnel_prob` > 0 adds a low-probability unconstrained jump proposal
    (off by default and never used in benchmarks). `record_trace` returns
    per-step rows (step, current_energy, best_energy, beta) for CSV dumps.
    """
    rng = _as_generator(rng)
    n = inst.n
    w32 = inst.w.astype(np.int32)
    betas = sched.step_betas()
    x = int(rng.integers(0, 1 << n))
    spins = bits_to_spins(np.array([x], dtype=np.uint64), n)[0].astype(np.int32)
    fields = w32 @ spins
    e = int(spins @ fields)
    best = e
    trace = [] if record_trace else None
    for i, beta in enumerate(betas):
        if tunnel_prob > 0.0 and rng.random() < tunnel_prob:
            y_bits = int(rng.integers(0, 1 << n))
            y_spins = bits_to_spins(np.array([y_bits], dtype=np.uint64), n)[0].astype(np.int32)
            e_y = int(y_spins @ (w32 @ y_spins))
            delta = e_y - e
            if delta <= 0 or np.exp(beta * (-delta)) > rng.random():
                spins, fields, e = y_spins, w32 @ y_spins, e_y
        else:
            j = int(rng.integers(0, n))
            delta = int(-4 * spins[j] * fields[j])
            u = rng.random()
            if delta <= 0 or np.exp(beta * (-delta)) > u:
                spins[j] = -spins[j]
                fields += 2 * w32[j] * spins[j]
                e += delta
        best = min(best, e)
        if record_trace:
            trace.append((i + 1, float(e), float(best), float(beta)))
    bits = int(spins_to_bits(spins[None, :])[0])
    return SpinConfig(bits), float(e), trace


def write_trajectory_csv(path, trace) -> None:
    """Dump (step, current_energy, best_energy, beta) rows."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "current_energy", "best_energy", "beta"])
        writer.writerows(trace)


# --- Brute force and random sampling -----------------------------------------


def brute_force_steps(inst: SkInstance, energies: np.ndarray, e_gs: float) -> int:
    """1-based index of the first configuration (scan order 0,1,2,...) at e_gs."""
    hits = energies == np.int32(e_gs)
    return int(np.argmax(hits)) + 1


def random_sampling_trajectory(
    inst: SkInstance, max_steps: int, rng, energies: np.ndarray | None = None
) -> np.ndarray:
    """Best-so-far energy after each of max_steps uniform draws (monotone)."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    rng = _as_generator(rng)
    if energies is None:
        energies = energy_table(inst)
    draws = rng.integers(0, 1 << inst.n, size=max_steps)
    return np.minimum.accumulate(energies[draws].astype(np.float64))


# --- Exact chain objects ------------------------------------------------------


def acceptance_probabilities(energies: np.ndarray, n: int, beta: float) -> np.ndarray:
    """min(1, exp(beta * (E(x) - E(x^e_j)))) for every (x, bit j)."""
    size = energies.shape[0]
    x = np.arange(size)
    out = np.empty((size, n), dtype=np.float64)
    for z in range(n):
        de = energies[x].astype(np.float64) - energies[x ^ (1 << z)]
        out[:, z] = np.minimum(1.0, np.exp(beta * de))
    return out


def transition_matrix(
    inst: SkInstance, beta: float, cap: int = DEFAULT_MATRIX_CAP
) -> MarkovMatrix:
    """Dense 2^n x 2^n column-stochastic walk matrix at fixed beta."""
    n = inst.n
    if n > cap:
        raise ValueError(f"dense transition matrix needs n <= {cap}, got {n}")
    energies = energy_table(inst)
    size = 1 << n
    w = np.zeros((size, size), dtype=np.float64)
    accept = acceptance_probabilities(energies, n, beta)
    x = np.arange(size)
    for z in range(n):
        w[x ^ (1 << z), x] = accept[:, z] / n
    w[x, x] = 1.0 - w.sum(axis=0)
    return MarkovMatrix(beta=float(beta), entries=w)


def gibbs_distribution(
    inst: SkInstance, beta: float, cap: int = DEFAULT_MATRIX_CAP
) -> GibbsDist:
    """Normalized Boltzmann weights exp(-beta E(x)) over all configurations."""
    if inst.n > cap:
        raise ValueError(f"dense Gibbs vector needs n <= {cap}, got {inst.n}")
    logw = -beta * energy_table(inst).astype(np.float64)
    logw -= logw.max()  # overflow guard
    p = np.exp(logw)
    p /= p.sum()
    return GibbsDist(beta=float(beta), probs=p)


def spectral_gap(w: MarkovMatrix, stationary: GibbsDist | None = None) -> float:
    """Difference of the two largest eigenvalue magnitudes of the walk matrix.

    With the stationary distribution supplied, the matrix is symmetrized by
    the similarity diag(sqrt(pi)) W diag(1/sqrt(pi)) so a Hermitian solver
    can be used; otherwise a general eigendecomposition is run.
    """
    entries = w.entries
    cols = entries.sum(axis=0)
    if not np.allclose(cols, 1.0, atol=1e-9) or entries.min() < -1e-12:
        raise ValueError("matrix is not column-stochastic")
    if stationary is not None:
        root = np.sqrt(stationary.probs)
        sym = entries * (root[None, :] / root[:, None])
        vals = np.linalg.eigvalsh(sym)
        mags = np.sort(np.abs(vals))[::-1]
    else:
        vals = np.linalg.eigvals(entries)
        mags = np.sort(np.abs(vals))[::-1]
    return float(mags[0] - mags[1])
