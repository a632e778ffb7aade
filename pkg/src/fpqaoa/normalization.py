"""Coefficient rescaling: Frobenius, max-abs, and the weighted norm."""

from dataclasses import replace

import numpy as np

from .qubo import Ensemble, NormKind, QuboError


class DegenerateInstanceError(QuboError):
    """Raised when an all-zero instance would have to be rescaled."""


def term_counts(instance):
    """``(|E1|, |E2|)``: numbers of linear and quadratic terms.

    Sparse instances (Mixed and Custom) count their nonzero terms. Dense
    ensembles count every slot, ``n`` and ``n(n-1)/2``.
    """
    n = instance.n
    if instance.ensemble is Ensemble.NORMAL:
        return n, n * (n - 1) // 2
    diag = np.diag(instance.s)
    off = instance.s[np.triu_indices(n, 1)]
    return int(np.count_nonzero(diag)), int(np.count_nonzero(off))


def norm_value(instance, kind):
    kind = NormKind(kind)
    if kind is NormKind.NONE:
        return 1.0
    if instance.is_zero:
        raise DegenerateInstanceError(f"cannot take the {kind.value} norm of an all-zero instance")
    s = instance.s
    if kind is NormKind.FROBENIUS:
        return float(np.sqrt(np.sum(s * s)))
    if kind is NormKind.MAXABS:
        return float(np.max(np.abs(s)))
    # weighted norm; an empty term class contributes nothing
    e1, e2 = term_counts(instance)
    diag = np.diag(s)
    off = s[np.triu_indices(instance.n, 1)]
    total = 0.0
    if e2:
        total += float(np.sum(off * off)) / e2
    if e1:
        total += float(np.sum(diag * diag)) / e1
    return float(np.sqrt(total))


def rescale(instance, kind):
    """Divide every coefficient by ``norm_value(instance, kind)``."""
    kind = NormKind(kind)
    value = norm_value(instance, kind)
    if kind is NormKind.NONE:
        return instance
    return replace(instance, s=instance.s / value, norm=kind)


def rescale_or_keep(instance, kind):
    """Like :func:`rescale`, but an all-zero instance passes through unchanged.

    The all-zero instance has a degenerate spectrum, which every metric treats
    as trivially solved, so there is nothing to normalize.
    """
    if instance.is_zero:
        return instance
    return rescale(instance, kind)
