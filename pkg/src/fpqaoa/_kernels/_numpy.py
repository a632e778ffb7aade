"""Pure-numpy kernels.

Every function here has a twin with the same signature in ``_numba``. Cost
tables are accumulated in the same term order in both, so they agree bitwise;
the state-vector kernels agree to rounding.
"""

import numpy as np

NAME = "numpy"

# instances per chunk in evaluate_batch; bounds peak memory at large n
_CHUNK_AMPLITUDES = 1 << 22


def _spins(n):
    idx = np.arange(1 << n, dtype=np.int64)
    # bit 0 -> +1, bit 1 -> -1; qubit k is bit k of the index
    return [1.0 - 2.0 * ((idx >> k) & 1) for k in range(n)]


def cost_table(s):
    n = s.shape[0]
    z = _spins(n)
    acc = np.zeros(1 << n)
    for i in range(n):
        for j in range(i + 1, n):
            acc += s[i, j] * z[i] * z[j]
    for i in range(n):
        acc += s[i, i] * z[i]
    return acc


def cost_tables(stack):
    count, n, _ = stack.shape
    out = np.empty((count, 1 << n))
    z = _spins(n)
    for m in range(count):
        acc = out[m]
        acc[:] = 0.0
        s = stack[m]
        for i in range(n):
            for j in range(i + 1, n):
                acc += s[i, j] * z[i] * z[j]
        for i in range(n):
            acc += s[i, i] * z[i]
    return out


def apply_phase(psi, costs, gamma):
    psi *= np.exp(-1j * gamma * costs)
    return psi


def apply_mixer(psi, beta, n):
    """Rotate every qubit by exp(-i beta X). Leading batch axes are allowed."""
    c = np.cos(beta)
    ms = -1j * np.sin(beta)
    lead = psi.shape[:-1]
    for k in range(n):
        step = 1 << k
        view = psi.reshape(lead + (-1, 2, step))
        lo = view[..., 0, :].copy()
        hi = view[..., 1, :]
        view[..., 0, :] = c * lo + ms * hi
        view[..., 1, :] = c * hi + ms * lo
    return psi


def evolve(psi, costs, gammas, betas, n):
    worst = 0.0
    for g, b in zip(gammas, betas):
        apply_phase(psi, costs, g)
        apply_mixer(psi, b, n)
        norm = np.sum(psi.real**2 + psi.imag**2, axis=-1)
        worst = max(worst, float(np.max(np.abs(norm - 1.0))))
    return worst


def evaluate_batch(costs, masks, gammas, betas, n):
    count, dim = costs.shape
    p = np.empty(count)
    energy = np.empty(count)
    dev = np.empty(count)
    chunk = max(1, _CHUNK_AMPLITUDES // dim)
    amp0 = 2.0 ** (-n / 2)
    for start in range(0, count, chunk):
        sl = slice(start, min(count, start + chunk))
        c = costs[sl]
        psi = np.full(c.shape, amp0, dtype=np.complex128)
        worst = np.zeros(c.shape[0])
        for g, b in zip(gammas, betas):
            psi *= np.exp(-1j * g * c)
            apply_mixer(psi, b, n)
            norm = np.sum(psi.real**2 + psi.imag**2, axis=-1)
            worst = np.maximum(worst, np.abs(norm - 1.0))
        prob = psi.real**2 + psi.imag**2
        p[sl] = np.sum(np.where(masks[sl], prob, 0.0), axis=-1)
        energy[sl] = np.sum(prob * c, axis=-1)
        dev[sl] = worst
    return p, energy, dev
