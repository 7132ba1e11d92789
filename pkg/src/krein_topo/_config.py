"""Numerical tolerances and the thread-pool helper shared by all modules."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class Tolerances:
    """Absolute tolerances used throughout the package.

    The defaults assume matrices of norm of order one and dimensions of at
    most about a hundred, which leaves at least six digits of headroom in
    double precision.
    """

    real: float = 1e-10
    """Largest admissible imaginary part of a matrix declared real."""
    unitary: float = 1e-10
    """Bound on ``||M* M - 1||`` and ``||M^2 - eta||`` for symmetries."""
    sym: float = 1e-8
    """Bound on the defining relation of a symmetry of an operator."""
    circle: float = 1e-8
    """Bound on ``| |lambda| - 1 |`` for a unit circle eigenvalue."""
    cluster_gap: float = 1e-6
    """Eigenvalues closer than this are grouped into one cluster."""
    cluster_gap_max: float = 1e-3
    """Largest cluster gap reached by adaptive widening."""
    form: float = 1e-9
    """Smallest admissible modulus of an eigenvalue of a Krein form."""
    proj: float = 1e-8
    """Idempotency and commutation bound of Riesz projections."""
    inv: float = 1e-8
    """Invariance residual of spectral frames."""
    sv_min: float = 1e-8
    """Smallest admissible singular value of hopping matrices."""
    cond_max: float = 1e10
    """Largest admissible condition number of the Riesz normalisation."""


DEFAULT_TOL = Tolerances()


def thread_count() -> int:
    """Number of worker threads, capped by ``KREIN_TOPO_THREADS``.

    Without the environment variable a single thread is used, which keeps
    library calls free of hidden concurrency.
    """
    raw = os.environ.get("KREIN_TOPO_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, min(value, os.cpu_count() or 1))


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Map ``fn`` over ``items`` preserving order.

    Work is spread over :func:`thread_count` threads.  The result order is
    the input order, so the output is identical for any thread count.
    """
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
