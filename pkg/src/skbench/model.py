"""Sherrington-Kirkpatrick instances, energies, and the exact spectrum oracle.

An instance is a symmetric n x n matrix of +-1 couplings with zero diagonal.
Configurations are n-bit indices with bit j = 0 meaning spin +1 and bit j = 1
meaning spin -1, so a configuration doubles as an index into any length-2^n
table. The energy convention sums over ordered pairs i != j, i.e. every
unordered pair is counted twice; with +-1 couplings every energy is an even
integer, which lets the spectrum code work in exact integer arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_ENUMERATION_CAP = 20

_ENUM_CHUNK = 1 << 16


class EnumerationCapError(ValueError):
    """Raised instead of silently truncating a 2^n enumeration."""


class IneligibleInstanceError(ValueError):
    """Raised for instances whose ground energy is not negative."""


@dataclass(frozen=True)
class SkInstance:
    n: int
    w: np.ndarray  # int8, symmetric, zero diagonal, off-diagonal +-1
    seed: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 spins, got n={self.n}")
        w = np.asarray(self.w, dtype=np.int8)
        if w.shape != (self.n, self.n):
            raise ValueError(f"coupling matrix shape {w.shape} does not match n={self.n}")
        if np.any(np.diag(w) != 0):
            raise ValueError("coupling matrix has nonzero diagonal")
        if not np.array_equal(w, w.T):
            raise ValueError("coupling matrix is not symmetric")
        off = w[~np.eye(self.n, dtype=bool)]
        if not np.all(np.abs(off) == 1):
            raise ValueError("off-diagonal couplings must be +-1")
        w.flags.writeable = False
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class SpinConfig:
    """Spin configuration stored as an n-bit index (bit set = spin -1)."""

    bits: int

    def spins(self, n: int) -> np.ndarray:
        return bits_to_spins(np.array([self.bits], dtype=np.uint64), n)[0]

    def flipped_all(self, n: int) -> "SpinConfig":
        return SpinConfig(self.bits ^ ((1 << n) - 1))


@dataclass(frozen=True)
class Spectrum:
    """Exhaustive-enumeration result for one instance.

    ``levels`` lists (energy, degeneracy) pairs sorted by energy; ``energies``
    keeps the full per-configuration table so downstream code can reuse the
    enumeration instead of repeating it.
    """

    e_gs: float
    e_1: float
    ground_set: tuple[SpinConfig, ...]
    levels: tuple[tuple[float, int], ...]
    energies: np.ndarray = field(repr=False)  # int32, length 2^n, read-only

    @property
    def ground_degeneracy(self) -> int:
        return len(self.ground_set)


def generate_instance(n: int, seed: int) -> SkInstance:
    """Draw the n(n-1)/2 independent couplings uniformly from {-1, +1}.

    Deterministic for fixed (n, seed); the generator is PCG64 seeded with
    ``seed`` alone, so a serialized (n, seed) pair reproduces the matrix
    bit for bit.
    """
    if n < 2:
        raise ValueError(f"need at least 2 spins, got n={n}")
    rng = np.random.default_rng(int(seed))
    m = n * (n - 1) // 2
    vals = rng.integers(0, 2, size=m, dtype=np.int8) * 2 - 1
    w = np.zeros((n, n), dtype=np.int8)
    iu = np.triu_indices(n, k=1)
    w[iu] = vals
    w += w.T
    return SkInstance(n=n, w=w, seed=int(seed))


def bits_to_spins(bits: np.ndarray, n: int) -> np.ndarray:
    """Map configuration indices to +-1 spin rows (bit set -> spin -1)."""
    bits = np.asarray(bits, dtype=np.uint64)
    shifts = np.arange(n, dtype=np.uint64)
    on = (bits[:, None] >> shifts[None, :]) & np.uint64(1)
    return (1 - 2 * on.astype(np.int8)).astype(np.int8)


def spins_to_bits(spins: np.ndarray) -> np.ndarray:
    spins = np.atleast_2d(spins)
    n = spins.shape[1]
    weights = (np.uint64(1) << np.arange(n, dtype=np.uint64))
    return ((spins < 0).astype(np.uint64) * weights).sum(axis=1)


def energy(inst: SkInstance, s: SpinConfig | int) -> float:
    """Energy of one configuration: sum over ordered pairs i != j of w_ij s_i s_j."""
    bits = s.bits if isinstance(s, SpinConfig) else int(s)
    if not 0 <= bits < (1 << inst.n):
        raise ValueError(f"configuration {bits} out of range for n={inst.n}")
    sp = bits_to_spins(np.array([bits], dtype=np.uint64), inst.n).astype(np.int32)
    h = sp @ inst.w.astype(np.int32)
    return float((sp * h).sum())


def energy_table(inst: SkInstance, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Energies of all 2^n configurations as an int32 array indexed by bits."""
    n = inst.n
    if n > cap:
        raise EnumerationCapError(
            f"full enumeration of 2^{n} configurations exceeds cap n<={cap}"
        )
    w32 = inst.w.astype(np.int32)
    size = 1 << n
    out = np.empty(size, dtype=np.int32)
    for lo in range(0, size, _ENUM_CHUNK):
        hi = min(lo + _ENUM_CHUNK, size)
        sp = bits_to_spins(np.arange(lo, hi, dtype=np.uint64), n).astype(np.int32)
        out[lo:hi] = np.einsum("ci,ci->c", sp @ w32, sp)
    out.flags.writeable = False
    return out


def exact_spectrum(inst: SkInstance, cap: int = DEFAULT_ENUMERATION_CAP) -> Spectrum:
    """Enumerate all 2^n configurations; exact ground/first-excited data."""
    energies = energy_table(inst, cap=cap)
    values, counts = np.unique(energies, return_counts=True)
    if len(values) < 2:
        raise ValueError("instance has a single energy level")
    e_gs = int(values[0])
    e_1 = int(values[1])
    ground_bits = np.flatnonzero(energies == e_gs)
    return Spectrum(
        e_gs=float(e_gs),
        e_1=float(e_1),
        ground_set=tuple(SpinConfig(int(b)) for b in ground_bits),
        levels=tuple((float(v), int(c)) for v, c in zip(values, counts)),
        energies=energies,
    )


def ratio_gap(inst: SkInstance, spectrum: Spectrum | None = None) -> float:
    """Ratio e_1 / e_gs; requires a negative ground energy."""
    spec = spectrum if spectrum is not None else exact_spectrum(inst)
    if spec.e_gs >= 0:
        raise IneligibleInstanceError(
            f"ground energy {spec.e_gs} >= 0; instance ineligible for AEAR benchmarking"
        )
    return spec.e_1 / spec.e_gs


# --- Serialization -----------------------------------------------------------
#
# JSON object {n, seed, couplings} with couplings the upper triangle in
# row-major order. All entries are integers, so round trips are bit-exact.


def instance_to_json(inst: SkInstance) -> str:
    iu = np.triu_indices(inst.n, k=1)
    couplings = [int(v) for v in inst.w[iu]]
    return json.dumps({"n": inst.n, "seed": inst.seed, "couplings": couplings})


def instance_from_json(text: str) -> SkInstance:
    obj = json.loads(text)
    n = int(obj["n"])
    couplings = obj["couplings"]
    if len(couplings) != n * (n - 1) // 2:
        raise ValueError(
            f"expected {n * (n - 1) // 2} couplings for n={n}, got {len(couplings)}"
        )
    w = np.zeros((n, n), dtype=np.int8)
    iu = np.triu_indices(n, k=1)
    w[iu] = np.asarray(couplings, dtype=np.int8)
    w += w.T
    return SkInstance(n=n, w=w, seed=int(obj["seed"]))


def save_instance(inst: SkInstance, path: str | Path) -> None:
    Path(path).write_text(instance_to_json(inst) + "\n")


def load_instance(path: str | Path) -> SkInstance:
    return instance_from_json(Path(path).read_text())
