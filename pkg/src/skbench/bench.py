"""Sweep orchestration: steps-to-quality per (method, size, instance).

Work is organized as independent cells keyed by (method, n, instance).
Every cell derives its own random stream from the master seed, so results
are bit-reproducible regardless of execution order or worker count. Cells
are persisted as per-(method, n) CSV shards plus a manifest, letting an
interrupted sweep resume without recomputing finished blocks.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__ as _version
from .classical import (
    AnnealSchedule,
    brute_force_steps,
    mh_batch_run,
)
from .model import (
    IneligibleInstanceError,
    SkInstance,
    Spectrum,
    exact_spectrum,
    generate_instance,
)
from .quantum import (
    DEFAULT_WALK_CAP,
    energy_expectation,
    gas_run,
    lhpst_anneal,
)

logger = logging.getLogger(__name__)

METHODS = ("BF", "RS", "MH", "GAS", "LHPST")

# Stream tags so each method's randomness is independent per instance.
_METHOD_TAG = {"RS": 1, "MH": 2, "LHPST": 3, "GAS": 4}

_RS_CHUNK = 4096


class ConfigError(ValueError):
    pass


class CapExceededError(RuntimeError):
    """A steps-to-quality search hit the step cap without succeeding."""


@dataclass(frozen=True)
class BenchConfig:
    sizes: tuple[int, ...] = (8, 9, 10, 11, 12, 13)
    instances_per_size: int = 100
    samples_per_instance: int = 100
    alpha: float = 0.9
    epsilon: float = 0.016
    beta_final: float = 1.0
    master_seed: int = 2024
    methods: tuple[str, ...] = METHODS

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0,1), got {self.alpha}")
        if not 0 < self.epsilon < 1:
            raise ConfigError(f"epsilon must lie in (0,1), got {self.epsilon}")
        if self.instances_per_size < 1 or self.samples_per_instance < 1:
            raise ConfigError("instance and sample counts must be positive")
        if not self.sizes:
            raise ConfigError("sizes must be nonempty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; valid: {list(METHODS)}")
        if "LHPST" in self.methods and max(self.sizes) > DEFAULT_WALK_CAP:
            raise ConfigError(
                f"LHPST statevector cap is n <= {DEFAULT_WALK_CAP}, got {max(self.sizes)}"
            )
        if min(self.sizes) < 2:
            raise ConfigError("sizes must be >= 2")
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        object.__setattr__(self, "methods", tuple(self.methods))

    def step_cap(self, n: int) -> int:
        return 1 << (n + 4)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()
        ).hexdigest()[:16]


@dataclass(frozen=True)
class BenchRecord:
    method: str
    n: int
    instance_index: int
    steps: int | None
    e_gs: float
    e_avg: float | None
    status: str  # "ok" or "unresolved"
    wallclock: float = 0.0


@dataclass(frozen=True)
class BoxStats:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...]


def box_stats(samples) -> BoxStats:
    """Tukey five-number summary with 1.5*IQR whiskers."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("box_stats needs at least one sample")
    q1, med, q3 = np.percentile(arr, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = arr[(arr >= lo_fence) & (arr <= hi_fence)]
    outliers = arr[(arr < lo_fence) | (arr > hi_fence)]
    return BoxStats(
        minimum=float(arr.min()),
        q1=float(q1),
        median=float(med),
        q3=float(q3),
        maximum=float(arr.max()),
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        outliers=tuple(float(v) for v in np.sort(outliers)),
    )


# --- Instance derivation ------------------------------------------------------


def instance_seed(master_seed: int, n: int, index: int, attempt: int = 0) -> int:
    ss = np.random.SeedSequence((master_seed, n, index, attempt))
    return int(ss.generate_state(1, np.uint64)[0])


def derive_instance(
    master_seed: int, n: int, index: int, max_attempts: int = 64
) -> tuple[SkInstance, Spectrum]:
    """Instance for one benchmark slot, regenerating until e_gs < 0."""
    for attempt in range(max_attempts):
        inst = generate_instance(n, instance_seed(master_seed, n, index, attempt))
        spectrum = exact_spectrum(inst)
        if spectrum.e_gs < 0:
            if attempt:
                logger.info(
                    "regenerated instance (n=%d, index=%d) %d time(s): e_gs >= 0",
                    n, index, attempt,
                )
            return inst, spectrum
    raise IneligibleInstanceError(
        f"no instance with e_gs < 0 after {max_attempts} attempts (n={n}, index={index})"
    )


# --- Steps-to-quality measurements --------------------------------------------


def _search_min_steps(evaluate, t_max: int) -> tuple[int, float]:
    """Doubling then bisection for the smallest T whose evaluation passes.

    evaluate(T) -> (ok, e_avg). Assumes the pass condition is monotone in T
    in expectation; the returned T is the smallest one actually measured as
    passing between the last failing and first passing probe.
    """
    cache: dict[int, tuple[bool, float]] = {}

    def ev(t: int) -> tuple[bool, float]:
        if t not in cache:
            cache[t] = evaluate(t)
        return cache[t]

    t = 1
    lo = 0  # largest T known to fail
    ok, _ = ev(t)
    while not ok:
        if t >= t_max:
            raise CapExceededError(f"no passing T up to cap {t_max}")
        lo = t
        t = min(2 * t, t_max)
        ok, _ = ev(t)
    hi = t
    while hi - lo > 1:
        mid = (lo + hi) // 2
        ok, _ = ev(mid)
        if ok:
            hi = mid
        else:
            lo = mid
    return hi, cache[hi][1]


def rs_steps_to_aear(
    inst: SkInstance,
    spectrum: Spectrum,
    config: BenchConfig,
    rng,
) -> tuple[int, float]:
    """First step at which the mean best-so-far energy over the trajectory
    batch reaches alpha * e_gs."""
    target = config.alpha * spectrum.e_gs
    samples = config.samples_per_instance
    t_max = config.step_cap(inst.n)
    best = np.full(samples, np.inf)
    done = 0
    while done < t_max:
        length = min(_RS_CHUNK, t_max - done)
        draws = rng.integers(0, 1 << inst.n, size=(samples, length))
        block = spectrum.energies[draws].astype(np.float64)
        block = np.minimum.accumulate(np.minimum(block, best[:, None]), axis=1)
        means = block.mean(axis=0)
        hits = np.flatnonzero(means <= target)
        if hits.size:
            return done + int(hits[0]) + 1, float(means[hits[0]])
        best = block[:, -1]
        done += length
    raise CapExceededError(f"random sampling cap {t_max} hit (n={inst.n})")


def mh_steps_to_aear(
    inst: SkInstance,
    spectrum: Spectrum,
    config: BenchConfig,
    entropy_root: int | None = None,
) -> tuple[int, float]:
    target = config.alpha * spectrum.e_gs
    base = entropy_root if entropy_root is not None else inst.seed

    def evaluate(t: int) -> tuple[bool, float]:
        sched = AnnealSchedule(total_steps=t, beta_final=config.beta_final)
        rng = np.random.default_rng(np.random.SeedSequence((base, _METHOD_TAG["MH"], t)))
        _, energies = mh_batch_run(
            inst, sched.step_betas(), rng, batch=config.samples_per_instance
        )
        e_avg = float(energies.mean())
        return e_avg <= target, e_avg

    return _search_min_steps(evaluate, config.step_cap(inst.n))


def lhpst_steps_to_aear(
    inst: SkInstance, spectrum: Spectrum, config: BenchConfig
) -> tuple[int, float]:
    target = config.alpha * spectrum.e_gs

    def evaluate(t: int) -> tuple[bool, float]:
        sched = AnnealSchedule(total_steps=t, beta_final=config.beta_final)
        psi = lhpst_anneal(inst, sched)
        e_avg = energy_expectation(inst, psi, energies=spectrum.energies)
        return e_avg <= target, e_avg

    return _search_min_steps(evaluate, config.step_cap(inst.n))


def steps_to_aear(
    method: str,
    inst: SkInstance,
    spectrum: Spectrum,
    config: BenchConfig,
    rng=None,
) -> tuple[int, float]:
    """Steps to reach E_avg <= alpha * e_gs for the schedule-free (RS) or
    schedule-driven (MH, LHPST) methods. `rng` overrides the cell-derived
    stream entropy (int) or, for RS, supplies a generator directly."""
    if spectrum.e_gs >= 0:
        raise IneligibleInstanceError("AEAR requires e_gs < 0")
    if method == "RS":
        if rng is None or isinstance(rng, int):
            entropy = inst.seed if rng is None else rng
            rng = np.random.default_rng(
                np.random.SeedSequence((entropy, _METHOD_TAG["RS"]))
            )
        return rs_steps_to_aear(inst, spectrum, config, rng)
    if method == "MH":
        return mh_steps_to_aear(inst, spectrum, config, entropy_root=rng)
    if method == "LHPST":
        return lhpst_steps_to_aear(inst, spectrum, config)
    raise ValueError(f"steps_to_aear does not handle method {method!r}")


def steps_to_success_gas(
    inst: SkInstance, spectrum: Spectrum, config: BenchConfig, rng=None
) -> int:
    if rng is None or isinstance(rng, int):
        entropy = inst.seed if rng is None else rng
        rng = np.random.default_rng(np.random.SeedSequence((entropy, _METHOD_TAG["GAS"])))
    return gas_run(inst, spectrum, rng, epsilon=config.epsilon)


# --- Suite driver --------------------------------------------------------------


def _run_cell(args) -> tuple:
    method, n, index, config = args
    start = time.perf_counter()
    inst, spectrum = derive_instance(config.master_seed, n, index)
    status = "ok"
    steps: int | None
    e_avg: float | None
    try:
        if method == "BF":
            steps = brute_force_steps(inst, spectrum.energies, spectrum.e_gs)
            e_avg = spectrum.e_gs
        elif method == "GAS":
            steps = steps_to_success_gas(inst, spectrum, config)
            e_avg = spectrum.e_gs
        else:
            steps, e_avg = steps_to_aear(method, inst, spectrum, config)
    except CapExceededError:
        status = "unresolved"
        steps = None
        e_avg = None
        logger.warning("cell %s n=%d i=%d unresolved (step cap)", method, n, index)
    wall = time.perf_counter() - start
    return (method, n, index, steps, spectrum.e_gs, e_avg, status, wall)


def _cell_records(method: str, n: int, config: BenchConfig, jobs: int) -> list[BenchRecord]:
    args = [(method, n, i, config) for i in range(config.instances_per_size)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, args, chunksize=4))
    else:
        rows = [_run_cell(a) for a in args]
    return [
        BenchRecord(
            method=m, n=nn, instance_index=i, steps=s, e_gs=eg, e_avg=ea,
            status=st, wallclock=w,
        )
        for (m, nn, i, s, eg, ea, st, w) in rows
    ]


CSV_HEADER = "method,n,instance,T,e_gs,e_avg,status"


def record_to_csv_row(rec: BenchRecord) -> str:
    steps = "" if rec.steps is None else str(rec.steps)
    e_avg = "" if rec.e_avg is None else repr(float(rec.e_avg))
    return f"{rec.method},{rec.n},{rec.instance_index},{steps},{repr(float(rec.e_gs))},{e_avg},{rec.status}"


def records_to_csv(records: list[BenchRecord]) -> str:
    lines = [CSV_HEADER]
    lines.extend(record_to_csv_row(r) for r in records)
    return "\n".join(lines) + "\n"


def records_from_csv(text: str) -> list[BenchRecord]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("unexpected records CSV header")
    out = []
    for ln in lines[1:]:
        method, n, idx, steps, e_gs, e_avg, status = ln.split(",")
        out.append(
            BenchRecord(
                method=method,
                n=int(n),
                instance_index=int(idx),
                steps=int(steps) if steps else None,
                e_gs=float(e_gs),
                e_avg=float(e_avg) if e_avg else None,
                status=status,
            )
        )
    return out


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


class RunManifest:
    """Tracks completed (method, n) blocks so reruns are no-ops."""

    def __init__(self, path: Path, config: BenchConfig):
        self.path = path
        self.config_hash = config.digest()
        self.cells: dict[str, str] = {}
        if path.exists():
            data = json.loads(path.read_text())
            if data.get("config_hash") == self.config_hash:
                self.cells = data.get("cells", {})
            else:
                logger.warning("manifest config hash mismatch; starting fresh")

    @staticmethod
    def key(method: str, n: int) -> str:
        return f"{method}:{n}"

    def done(self, method: str, n: int) -> bool:
        return self.cells.get(self.key(method, n)) == "done"

    def mark(self, method: str, n: int) -> None:
        self.cells[self.key(method, n)] = "done"
        self.save()

    def save(self) -> None:
        _atomic_write(
            self.path,
            json.dumps(
                {
                    "config_hash": self.config_hash,
                    "version": _version,
                    "cells": self.cells,
                },
                indent=2,
                sort_keys=True,
            ),
        )


def run_suite(
    config: BenchConfig,
    out_dir: str | Path | None = None,
    jobs: int = 1,
    force: bool = False,
) -> list[BenchRecord]:
    """Run every (method, n, instance) cell; resume from shards if out_dir given."""
    records: list[BenchRecord] = []
    shard_dir = manifest = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        shard_dir = out_dir / "cells"
        shard_dir.mkdir(parents=True, exist_ok=True)
        manifest = RunManifest(out_dir / "manifest.json", config)
    for method in config.methods:
        for n in config.sizes:
            shard = shard_dir / f"{method}_{n:02d}.csv" if shard_dir else None
            if (
                manifest is not None
                and not force
                and manifest.done(method, n)
                and shard is not None
                and shard.exists()
            ):
                block = records_from_csv(CSV_HEADER + "\n" + shard.read_text())
                logger.info("resume: skipping completed block %s n=%d", method, n)
            else:
                logger.info("running block %s n=%d", method, n)
                block = _cell_records(method, n, config, jobs)
                if shard is not None:
                    _atomic_write(
                        shard, "\n".join(record_to_csv_row(r) for r in block) + "\n"
                    )
                    manifest.mark(method, n)
            records.extend(block)
    if out_dir is not None:
        _atomic_write(out_dir / "records.csv", records_to_csv(records))
        _atomic_write(out_dir / "summary.json", json.dumps(summarize(config, records), indent=2, sort_keys=True))
    return records


def summarize(config: BenchConfig, records: list[BenchRecord]) -> dict:
    by_cell: dict[tuple[str, int], list[BenchRecord]] = {}
    for rec in records:
        by_cell.setdefault((rec.method, rec.n), []).append(rec)
    cells = {}
    for (method, n), recs in sorted(by_cell.items()):
        resolved = [r.steps for r in recs if r.status == "ok"]
        entry = {
            "count": len(recs),
            "unresolved": sum(1 for r in recs if r.status != "ok"),
        }
        if resolved:
            stats = box_stats(resolved)
            entry.update(
                mean_steps=float(np.mean(resolved)),
                median_steps=stats.median,
                q1=stats.q1,
                q3=stats.q3,
                min=stats.minimum,
                max=stats.maximum,
            )
        cells[f"{method}:{n}"] = entry
    return {"config": config.to_dict(), "cells": cells}


def mean_steps_by_size(
    records: list[BenchRecord], method: str
) -> tuple[np.ndarray, np.ndarray]:
    """(sizes, mean resolved steps) for one method, sorted by size."""
    by_n: dict[int, list[int]] = {}
    for rec in records:
        if rec.method == method and rec.status == "ok":
            by_n.setdefault(rec.n, []).append(rec.steps)
    sizes = np.array(sorted(by_n), dtype=np.int64)
    means = np.array([np.mean(by_n[n]) for n in sizes], dtype=np.float64)
    return sizes, means
