"""Exact Monte-Carlo capacities via Cholesky log-determinants.

Two channel forms are supported: the true entrywise channel ``Q o G`` and the
matrix-product surrogate ``T G`` with diagonal ``T``. Capacities are in nats
per channel use per BS.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import lapack

from tosecap._seeding import derive_rng
from tosecap.channel import sample_G
from tosecap.errors import InvalidParameterError, NumericalFailure


class Method(str, Enum):
    EXACT_HADAMARD = "exact_hadamard"
    EXACT_MATRIXPROD = "exact_matrixprod"
    TOSE = "tose"


@dataclass(frozen=True)
class CapacityResult:
    mean: float
    stddev: float
    trials: int
    method: Method
    values: np.ndarray = field(repr=False, compare=False, default=None)

    @classmethod
    def from_values(cls, values, method):
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            raise InvalidParameterError("no trial values to summarize")
        # np.mean/np.std use pairwise summation
        std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
        return cls(float(np.mean(values)), std, int(values.size), Method(method), values)

    def in_bits(self) -> "CapacityResult":
        ln2 = np.log(2.0)
        return CapacityResult(self.mean / ln2, self.stddev / ln2, self.trials, self.method,
                              None if self.values is None else self.values / ln2)


def gram_matrix(a, form="full"):
    """``I + A A*`` (``form='full'``, J x J) or ``I + A* A`` (``'gram'``, K x K).

    ``'auto'`` picks the smaller of the two; both have the same determinant.
    """
    a = np.asarray(a)
    if form == "auto":
        form = "gram" if a.shape[1] < a.shape[0] else "full"
    if form == "full":
        s = a @ a.conj().T
    elif form == "gram":
        s = a.conj().T @ a
    else:
        raise InvalidParameterError(f"unknown form {form!r}")
    s[np.diag_indices_from(s)] += 1.0
    return s


def cholesky_logdet(s):
    """``2 * sum(log r_jj)`` for the lower Cholesky factor of Hermitian ``s``.

    The factorization runs in place on a copy through LAPACK ``?potrf``.
    """
    s = np.asarray(s)
    potrf = lapack.zpotrf if np.iscomplexobj(s) else lapack.dpotrf
    c, info = potrf(s, lower=1, clean=0)
    if info > 0:
        raise NumericalFailure(
            f"matrix is not positive definite: leading minor {info} failed", pivot=int(info))
    if info < 0:
        raise NumericalFailure(f"potrf rejected argument {-info}")
    return 2.0 * float(np.sum(np.log(np.diagonal(c).real)))


def log_det_identity_plus(a, form="full"):
    """``log det(I + A A*)`` by Cholesky factorization."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise InvalidParameterError(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidParameterError("matrix has non-finite entries")
    return cholesky_logdet(gram_matrix(a, form))


def hadamard_trial(q, g, form="full"):
    """Per-realization capacity of the entrywise channel ``Q o G``."""
    return log_det_identity_plus(q * g, form) / q.shape[0]


def matrixprod_trial(t, g, form="full"):
    """Per-realization capacity of ``T G`` with ``T = diag(t)``."""
    return log_det_identity_plus(np.asarray(t)[:, None] * g, form) / len(t)


def _check_trials(trials):
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")


def exact_capacity_hadamard(q, trials, seed, form="full") -> CapacityResult:
    q = np.asarray(q, dtype=float)
    _check_trials(trials)
    j, k = q.shape
    values = [hadamard_trial(q, sample_G(j, k, derive_rng(seed, i)), form)
              for i in range(trials)]
    return CapacityResult.from_values(values, Method.EXACT_HADAMARD)


def exact_capacity_matrixprod(t_diag, j_m, k_m, trials, seed, form="full") -> CapacityResult:
    t = np.asarray(t_diag, dtype=float)
    _check_trials(trials)
    if t.shape != (j_m,):
        raise InvalidParameterError(f"t_diag has shape {t.shape}, expected ({j_m},)")
    values = [matrixprod_trial(t, sample_G(j_m, k_m, derive_rng(seed, i)), form)
              for i in range(trials)]
    return CapacityResult.from_values(values, Method.EXACT_MATRIXPROD)
