"""Fourier encoding of QAOA angle schedules."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class FourierParams:
    """Coefficients ``u`` (cost-angle side) and ``v`` (mixer-angle side)."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.u, dtype=np.float64)).copy()
        v = np.atleast_1d(np.asarray(self.v, dtype=np.float64)).copy()
        if u.ndim != 1 or u.shape != v.shape or u.size < 1:
            raise ValueError(f"u and v must be 1-D of equal length >= 1, got {u.shape} and {v.shape}")
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def q(self):
        return self.u.size

    @classmethod
    def sincos(cls, u, v):
        return cls([u], [v])

    @classmethod
    def zeros(cls, q=1):
        return cls(np.zeros(q), np.zeros(q))

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=np.float64)
        q = x.size // 2
        return cls(x[:q], x[q:])

    def vector(self):
        return np.concatenate([self.u, self.v])

    def __mul__(self, a):
        return FourierParams(self.u * a, self.v * a)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, FourierParams):
            return NotImplemented
        return np.array_equal(self.u, other.u) and np.array_equal(self.v, other.v)

    def to_dict(self):
        return {"q": self.q, "u": self.u.tolist(), "v": self.v.tolist()}

    @classmethod
    def from_dict(cls, d):
        params = cls(d["u"], d["v"])
        if "q" in d and int(d["q"]) != params.q:
            raise ValueError(f"q={d['q']} does not match {params.q} coefficients")
        return params


@dataclass(frozen=True, eq=False)
class AngleSchedule:
    gamma: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=np.float64).copy()
        b = np.asarray(self.beta, dtype=np.float64).copy()
        if g.ndim != 1 or g.shape != b.shape or g.size < 1:
            raise ValueError("gamma and beta must be 1-D of equal length >= 1")
        g.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "beta", b)

    @property
    def p(self):
        return self.gamma.size

    def to_dict(self):
        return {"p": self.p, "gamma": self.gamma.tolist(), "beta": self.beta.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["gamma"], d["beta"])


def decode(params, p):
    """Angles of a depth-``p`` circuit.

    ``gamma_i = sum_k u_k sin((k - 1/2)(i - 1/2) pi / p)`` and the same with
    ``v_k`` and cosine for ``beta_i``; ``i = 1..p``, ``k = 1..q``.
    """
    if p < 1:
        raise ValueError("depth p must be >= 1")
    i = np.arange(1, p + 1) - 0.5
    k = np.arange(1, params.q + 1) - 0.5
    arg = k[:, None] * i[None, :] * np.pi / p
    sin = np.sin(arg)
    cos = np.cos(arg)
    gamma = params.u[0] * sin[0]
    beta = params.v[0] * cos[0]
    for m in range(1, params.q):
        gamma = gamma + params.u[m] * sin[m]
        beta = beta + params.v[m] * cos[m]
    return AngleSchedule(gamma, beta)


def decode_sincos(u, v, n):
    """Two-parameter ramp with ``p = n`` layers."""
    if n < 1:
        raise ValueError("n must be >= 1")
    arg = (np.arange(1, n + 1) - 0.5) * np.pi / (2 * n)
    return AngleSchedule(u * np.sin(arg), v * np.cos(arg))
