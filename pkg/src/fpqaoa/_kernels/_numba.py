"""numba-compiled kernels; same signatures as ``_numpy``."""

import math

import numpy as np
from numba import njit, prange

NAME = "numba"


@njit(cache=True)
def _cost_row(s, out):
    n = s.shape[0]
    z = np.empty(n)
    for b in range(out.shape[0]):
        for k in range(n):
            z[k] = 1.0 - 2.0 * ((b >> k) & 1)
        acc = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                acc += s[i, j] * z[i] * z[j]
        for i in range(n):
            acc += s[i, i] * z[i]
        out[b] = acc


@njit(cache=True)
def _cost_table(s):
    out = np.empty(1 << s.shape[0])
    _cost_row(s, out)
    return out


def cost_table(s):
    return _cost_table(np.ascontiguousarray(s, dtype=np.float64))


@njit(cache=True, parallel=True)
def _cost_tables(stack):
    count, n = stack.shape[0], stack.shape[1]
    out = np.empty((count, 1 << n))
    for m in prange(count):
        _cost_row(stack[m], out[m])
    return out


def cost_tables(stack):
    return _cost_tables(np.ascontiguousarray(stack, dtype=np.float64))


@njit(cache=True)
def _phase(psi, costs, gamma):
    for b in range(psi.shape[0]):
        t = gamma * costs[b]
        c = math.cos(t)
        s = math.sin(t)
        re = psi[b].real
        im = psi[b].imag
        psi[b] = complex(c * re + s * im, c * im - s * re)


@njit(cache=True)
def _mixer(psi, beta, n):
    # (lo, hi) -> (c lo - i s hi, c hi - i s lo)
    c = math.cos(beta)
    s = math.sin(beta)
    dim = psi.shape[0]
    for k in range(n):
        step = 1 << k
        for base in range(0, dim, 2 * step):
            for j in range(base, base + step):
                lo = psi[j]
                hi = psi[j + step]
                psi[j] = complex(c * lo.real + s * hi.imag, c * lo.imag - s * hi.real)
                psi[j + step] = complex(c * hi.real + s * lo.imag, c * hi.imag - s * lo.real)


@njit(cache=True)
def _norm_dev(psi):
    acc = 0.0
    for b in range(psi.shape[0]):
        acc += psi[b].real * psi[b].real + psi[b].imag * psi[b].imag
    return abs(acc - 1.0)


@njit(cache=True)
def _evolve(psi, costs, gammas, betas, n):
    worst = 0.0
    for layer in range(gammas.shape[0]):
        _phase(psi, costs, gammas[layer])
        _mixer(psi, betas[layer], n)
        worst = max(worst, _norm_dev(psi))
    return worst


def apply_phase(psi, costs, gamma):
    _phase(psi, costs, float(gamma))
    return psi


def apply_mixer(psi, beta, n):
    if psi.ndim == 1:
        _mixer(psi, float(beta), n)
    else:
        for row in psi.reshape(-1, psi.shape[-1]):
            _mixer(row, float(beta), n)
    return psi


def evolve(psi, costs, gammas, betas, n):
    return _evolve(psi, costs, np.asarray(gammas, dtype=np.float64),
                   np.asarray(betas, dtype=np.float64), n)


@njit(cache=True, parallel=True)
def _evaluate_batch(costs, masks, gammas, betas, n):
    count, dim = costs.shape
    p = np.empty(count)
    energy = np.empty(count)
    dev = np.empty(count)
    amp0 = 2.0 ** (-n / 2)
    for m in prange(count):
        psi = np.full(dim, complex(amp0, 0.0))
        c = costs[m]
        dev[m] = _evolve(psi, c, gammas, betas, n)
        pa = 0.0
        e = 0.0
        for b in range(dim):
            pr = psi[b].real * psi[b].real + psi[b].imag * psi[b].imag
            e += pr * c[b]
            if masks[m, b]:
                pa += pr
        p[m] = pa
        energy[m] = e
    return p, energy, dev


def evaluate_batch(costs, masks, gammas, betas, n):
    return _evaluate_batch(np.ascontiguousarray(costs, dtype=np.float64),
                           np.ascontiguousarray(masks, dtype=np.bool_),
                           np.asarray(gammas, dtype=np.float64),
                           np.asarray(betas, dtype=np.float64), n)
