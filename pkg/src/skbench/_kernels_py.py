"""NumPy fallback for the annealing step kernel.

Chains are advanced in lockstep (vectorized across the batch, sequential in
steps). Each chain consumes only its own row of the pre-drawn randomness, so
results are bit-identical to the compiled kernel, which loops chain-major.
"""

from __future__ import annotations

import numpy as np


def mh_steps(w, spins, fields, energies, bit_draws, log_u, betas):
    """Advance a batch of Metropolis chains by len(betas) steps, in place.

    w:        (n, n) int32 couplings
    spins:    (B, n) int8, +-1
    fields:   (B, n) int32 local fields, fields[b, k] = sum_i w[k, i] spins[b, i]
    energies: (B,)   int64 current energies (ordered-pair convention)
    bit_draws:(B, L) int64 proposal bit per step
    log_u:    (B, L) float64 log of the uniform acceptance draw per step
    betas:    (L,)   float64 inverse temperature per step
    """
    B = spins.shape[0]
    rows = np.arange(B)
    for t in range(betas.shape[0]):
        j = bit_draws[:, t]
        delta = -4 * spins[rows, j].astype(np.int64) * fields[rows, j]
        accept = (delta <= 0) | (betas[t] * (-delta).astype(np.float64) > log_u[:, t])
        idx = np.flatnonzero(accept)
        if idx.size == 0:
            continue
        jj = j[idx]
        s_new = -spins[idx, jj]
        spins[idx, jj] = s_new
        fields[idx, :] += 2 * w[jj, :] * s_new[:, None].astype(np.int32)
        energies[idx] += delta[idx]
