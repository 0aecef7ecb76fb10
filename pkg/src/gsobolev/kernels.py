"""Distance matrices, exponential kernels, and definiteness diagnostics.

For orders ``1 <= p <= 2`` the distance and its ``p``-th power are negative
definite, so ``exp(-t * d)`` and ``exp(-t * d**p)`` are positive definite for
every bandwidth ``t > 0`` and infinitely divisible (every entrywise ``n``-th
root is again positive definite).  The checks here test exactly that, both
with random centered quadratic forms and spectrally.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidBandwidth,
    InvalidExponent,
    NonConvergence,
    NonPositiveEntry,
    RootMismatch,
)
from .graph import EdgePrep
from .measures import SparseEdgeVector
from .metrics import (
    VARIANT_SOBOLEV_IPM,
    VARIANT_SOBOLEV_TRANSPORT,
    beta_weights,
    _check_order,
)

KERNEL_EXP = "exp_neg_t_d"
KERNEL_EXP_POW = "exp_neg_t_d_pow_p"
KERNEL_FORMS = (KERNEL_EXP, KERNEL_EXP_POW)

# Definiteness slack: quadratic forms and eigenvalues this far on the wrong
# side of zero count as violations.
ND_QUAD_RTOL = 1e-8
EIG_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SymmetricMatrix:
    """Symmetric matrix stored as its row-major upper triangle."""

    dim: int
    upper: np.ndarray

    def __post_init__(self) -> None:
        need = self.dim * (self.dim + 1) // 2
        arr = np.asarray(self.upper, dtype=np.float64).reshape(-1)
        if arr.size != need:
            raise ValueError(f"upper triangle needs {need} entries, got {arr.size}")
        arr.flags.writeable = False
        object.__setattr__(self, "upper", arr)

    def _idx(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        return i * self.dim - i * (i - 1) // 2 + (j - i)

    def value(self, i: int, j: int) -> float:
        if not (0 <= i < self.dim and 0 <= j < self.dim):
            raise IndexError((i, j))
        return float(self.upper[self._idx(i, j)])

    def full(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=np.float64)
        iu = np.triu_indices(self.dim)
        out[iu] = self.upper
        out[(iu[1], iu[0])] = self.upper
        return out

    def diagonal(self) -> np.ndarray:
        return np.array([self.value(i, i) for i in range(self.dim)])

    def max_entry(self) -> float:
        return float(np.max(self.upper)) if self.upper.size else 0.0

    @classmethod
    def from_full(cls, arr: np.ndarray) -> "SymmetricMatrix":
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("need a square array")
        return cls(a.shape[0], a[np.triu_indices(a.shape[0])])


def distance_matrix(
    prep: EdgePrep,
    vectors: list[SparseEdgeVector],
    p: float,
    threads: int = 1,
    variant: str = VARIANT_SOBOLEV_IPM,
) -> SymmetricMatrix:
    """All-pairs distances between cumulative vectors under one root.

    Evaluates the upper triangle row by row on a dense scatter of the
    vectors over the union of touched edges; rows are independent, so with
    ``threads > 1`` they are split across a thread pool.  Each entry is a
    pure function of its pair, which keeps the output identical for any
    thread count.
    """
    n = len(vectors)
    p = _check_order(p, allow_inf=variant == VARIANT_SOBOLEV_IPM)
    for vec in vectors:
        if vec.root != prep.root:
            raise RootMismatch(
                f"vector for root {vec.root}, preprocessing for root {prep.root}"
            )
    if n == 0:
        return SymmetricMatrix(0, np.zeros(0))
    union = np.unique(np.concatenate([vec.edge_ids for vec in vectors]))
    G = np.zeros((n, union.size), dtype=np.float64)
    for i, vec in enumerate(vectors):
        G[i, np.searchsorted(union, vec.edge_ids)] = vec.values
    if math.isinf(p):
        wvec = 1.0 / (1.0 + prep.lambda_gamma[union])
    elif variant == VARIANT_SOBOLEV_IPM:
        wvec = beta_weights(prep, p)[union]
    elif variant == VARIANT_SOBOLEV_TRANSPORT:
        wvec = prep.edge_lengths[union]
    else:
        raise ValueError(f"unknown variant {variant!r}")

    out = np.zeros((n, n), dtype=np.float64)

    def fill_rows(rows: range) -> None:
        for i in rows:
            if i + 1 >= n:
                continue
            diff = np.abs(G[i + 1 :] - G[i])
            if math.isinf(p):
                vals = np.max(diff * wvec, axis=1) if union.size else np.zeros(n - i - 1)
            elif p == 1.0:
                vals = (diff * wvec).sum(axis=1)
            else:
                vals = ((diff**p) * wvec).sum(axis=1) ** (1.0 / p)
            out[i, i + 1 :] = vals

    if threads <= 1 or n < 4:
        fill_rows(range(n))
    else:
        chunks = [range(k, n, threads) for k in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill_rows, chunks))
    return SymmetricMatrix.from_full(out + out.T)


@dataclass(frozen=True)
class GramSpec:
    """Kernel recipe: order ``p``, bandwidth ``t``, functional form, and an
    optional index subset of the measures to include."""

    p: float
    t: float
    form: str = KERNEL_EXP
    measures: tuple[int, ...] | None = None
    allow_outside_range: bool = False

    def __post_init__(self) -> None:
        _check_order(self.p)
        if not (self.t > 0.0 and math.isfinite(self.t)):
            raise InvalidBandwidth(f"bandwidth t must be positive, got {self.t!r}")
        if self.form not in KERNEL_FORMS:
            raise ValueError(f"unknown kernel form {self.form!r}")
        if not self.allow_outside_range and not 1.0 <= self.p <= 2.0:
            raise InvalidExponent(
                f"positive definiteness is only guaranteed for 1 <= p <= 2, got "
                f"{self.p}; pass allow_outside_range to proceed"
            )
        if self.measures is not None:
            object.__setattr__(
                self, "measures", tuple(int(i) for i in self.measures)
            )


def gram_matrix(d: SymmetricMatrix, spec: GramSpec) -> SymmetricMatrix:
    """Entrywise exponential kernel of a distance matrix.

    ``exp(-t * d)`` or ``exp(-t * d**p)`` per ``spec.form``.  The diagonal of
    a distance matrix is zero, so the kernel diagonal is exactly one.
    """
    if spec.measures is not None:
        idx = list(spec.measures)
        if any(not 0 <= i < d.dim for i in idx):
            raise IndexError(f"measure index outside [0, {d.dim})")
        d = SymmetricMatrix.from_full(d.full()[np.ix_(idx, idx)])
    x = d.upper
    if spec.form == KERNEL_EXP_POW and spec.p != 1.0:
        x = x**spec.p
    return SymmetricMatrix(d.dim, np.exp(-spec.t * x))


@dataclass(frozen=True)
class DefinitenessReport:
    """Outcome of negative-definiteness checks on a distance matrix."""

    trials: int
    violations: int
    worst: float
    spectral_min: float
    spectral_passed: bool
    outside_guaranteed_range: bool

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.spectral_passed


def check_negative_definite(
    d: SymmetricMatrix, p: float, trials: int = 200, seed: int = 0
) -> DefinitenessReport:
    """Test that ``d`` behaves as a negative definite matrix.

    Randomized part: for centered coefficient vectors ``c`` (zero sum), the
    quadratic form ``c' d c`` must stay below ``1e-8 * ||c||^2 * max(d)``.
    Spectral part: the doubly centered matrix ``-J d J`` must be positive
    semidefinite within an eigenvalue tolerance of ``-1e-8``.  Orders outside
    ``[1, 2]`` are still checked but flagged, since the guarantee only covers
    that range.
    """
    _check_order(p, allow_inf=True)
    D = d.full()
    n = d.dim
    if n == 0:
        return DefinitenessReport(0, 0, 0.0, 0.0, True, not 1.0 <= p <= 2.0)
    rng = np.random.default_rng(seed)
    scale = d.max_entry()
    violations = 0
    worst = -math.inf
    for _ in range(trials):
        c = rng.standard_normal(n)
        c -= c.mean()
        q = float(c @ D @ c)
        worst = max(worst, q)
        if q > ND_QUAD_RTOL * float(c @ c) * scale:
            violations += 1
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    M = -J @ D @ J
    M = (M + M.T) / 2.0
    try:
        spectral_min = float(np.linalg.eigvalsh(M).min())
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    return DefinitenessReport(
        trials=trials,
        violations=violations,
        worst=worst,
        spectral_min=spectral_min,
        spectral_passed=spectral_min >= -EIG_TOL,
        outside_guaranteed_range=not 1.0 <= p <= 2.0,
    )


def min_eigenvalue(m: SymmetricMatrix) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    if m.dim == 0:
        return 0.0
    try:
        return float(np.linalg.eigvalsh(m.full()).min())
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc


def divisibility_check(gram: SymmetricMatrix, n: int) -> bool:
    """Whether the entrywise ``n``-th root of a kernel matrix stays positive
    semidefinite (the hallmark of an infinitely divisible kernel).

    Requires strictly positive entries; exponential kernels satisfy that.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if gram.upper.size and gram.upper.min() <= 0.0:
        raise NonPositiveEntry(
            f"entrywise root needs positive entries, min is {gram.upper.min()!r}"
        )
    root = SymmetricMatrix(gram.dim, gram.upper ** (1.0 / n))
    floor = -EIG_TOL * max(gram.dim, 1) * max(root.max_entry(), 1.0)
    return min_eigenvalue(root) >= floor


def write_matrix_csv(m: SymmetricMatrix, path: str) -> None:
    """Serialize: first line the dimension, then the full square matrix with
    17 significant digits."""
    full = m.full()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{m.dim}\n")
        for row in full:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def read_matrix_csv(path: str) -> SymmetricMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    dim = int(lines[0])
    if len(lines) != dim + 1:
        raise ValueError(f"{path}: expected {dim} rows, found {len(lines) - 1}")
    rows = [np.array([float(x) for x in ln.split(",")]) for ln in lines[1:]]
    full = np.vstack(rows) if rows else np.zeros((0, 0))
    if full.shape != (dim, dim):
        raise ValueError(f"{path}: expected a {dim}x{dim} matrix")
    return SymmetricMatrix.from_full((full + full.T) / 2.0)
