"""Construction, application, and auditing of oblivious subspace-embedding
operators.

Three operator families are supported, identified by their ``kind`` tag:

* ``"gaussian"``     -- dense i.i.d. normal entries scaled by ``1/sqrt(s)``
  so that ``E |S v|^2 = |v|^2``;
* ``"srtt"``         -- subsampled randomized trigonometric transform
  ``sqrt(m/s) * D F E``: a Rademacher sign diagonal ``E``, the orthonormal
  type-II discrete cosine transform ``F`` (any length, O(m log m) via
  ``scipy.fft``), and ``s`` rows sampled uniformly without replacement
  (``D``); at ``s == m`` the operator is exactly orthogonal;
* ``"sparse-sign"``  -- per input coordinate, ``zeta = min(8, s)`` distinct
  output rows receive ``+-1/sqrt(zeta)``.

All randomness is drawn at construction time from ``numpy``'s PCG64
generator seeded with the operator's 64-bit ``seed``, so equal
``(kind, s, m, seed)`` tuples reproduce bitwise-identical operators.
Operators are immutable after construction and safe to share across threads.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.sparse as sp

from .densekernels import as_matrix
from .errors import PreconditionError, ShapeError

KINDS = ("gaussian", "srtt", "sparse-sign")

SPARSE_SIGN_NNZ_PER_COLUMN = 8

# Column block size used when an SRTT operator is applied to sparse input
# (the trigonometric transform is inherently dense, so columns are densified
# in bounded batches).
_SRTT_BLOCK = 64


@dataclass(frozen=True)
class EmbeddingSpec:
    """Problem statement for picking a sketch dimension: embed any fixed
    ``k``-dimensional subspace of R^m with distortion ``epsilon`` and
    failure probability ``delta``."""

    epsilon: float
    delta: float
    k: int
    m: int
    kind: str = "gaussian"

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if not 1 <= self.k <= self.m:
            raise ValueError(f"need 1 <= k <= m, got k={self.k}, m={self.m}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown sketch kind {self.kind!r}")


@dataclass(frozen=True)
class EmbeddingCertificate:
    """Measured distortion of an operator over one audited subspace.

    ``epsilon_emp`` is the tightest ``eps`` such that
    ``(1 - eps) |v|^2 <= |S v|^2 <= (1 + eps) |v|^2`` holds for *every*
    vector ``v`` in the subspace; it is computed from the extreme singular
    values of the sketched orthonormal basis, so bounds evaluated at
    ``epsilon_emp`` hold deterministically on that subspace.
    """

    epsilon_emp: float
    subspace_dim: int
    sigma_min_sketched: float
    sigma_max_sketched: float


@dataclass(frozen=True)
class CosineAudit:
    """Worst pairwise column angle of a sketch-orthonormal matrix, with the
    distortion-based bound it is checked against."""

    max_abs_cosine: float
    epsilon_emp: float
    within_bound: bool


def sketch_dim(spec, c=1.0):
    """Sketch dimension for ``spec``, clamped to ``[k, m]``.

    Gaussian operators use ``ceil(eps^-2 * ln(1/delta) * ln(max(k, 2)))``;
    srtt and sparse-sign use ``max(2k, ceil(c * eps^-2 * k))``.  The
    constant ``c`` is exposed because the practical rule for trigonometric
    sketches diverges as delta -> 0; the default c=1 reflects common usage.
    """
    if spec.kind == "gaussian":
        target = math.ceil(
            spec.epsilon**-2 * math.log(1.0 / spec.delta) * math.log(max(spec.k, 2))
        )
    else:
        target = max(2 * spec.k, math.ceil(c * spec.epsilon**-2 * spec.k))
    return min(spec.m, max(spec.k, target))


def _distinct_rows(rng, n_cols, n_rows, zeta):
    """(n_cols, zeta) row indices, distinct within each column's draw.

    Rejection resampling is fast when ``n_rows >> zeta``; otherwise random
    keys are sorted (memory n_cols * n_rows, only reached for small
    sketches where that is negligible).
    """
    if n_rows < 4 * zeta:
        keys = rng.random((n_cols, n_rows))
        return np.argsort(keys, axis=1)[:, :zeta]
    R = rng.integers(0, n_rows, size=(n_cols, zeta))
    while True:
        Rs = np.sort(R, axis=1)
        bad = (np.diff(Rs, axis=1) == 0).any(axis=1)
        if not bad.any():
            return R
        R[bad] = rng.integers(0, n_rows, size=(int(bad.sum()), zeta))


def dct2_matrix(m):
    """Dense orthonormal type-II DCT matrix; the O(m^2) reference
    transform that the fast path is tested against."""
    i = np.arange(m)
    F = np.sqrt(2.0 / m) * np.cos(np.pi * np.outer(i, 2 * i + 1) / (2.0 * m))
    F[0] *= np.sqrt(0.5)
    return F


class SketchOperator:
    """A realized random linear map ``S: R^m -> R^s``.

    Build through :func:`build_sketch`.  The operator keeps only its
    kind-specific factors (dense table, sign/sample vectors, or sparse
    matrix); :meth:`apply` computes ``S @ X`` with the fast path for the
    kind, and :meth:`apply_reference` through an explicit dense route.
    """

    def __init__(self, kind, s, m, seed):
        if kind not in KINDS:
            raise ValueError(f"unknown sketch kind {kind!r}")
        if not 1 <= s <= m:
            raise ShapeError(f"need 1 <= s <= m, got s={s}, m={m}")
        self.kind = kind
        self.s = int(s)
        self.m = int(m)
        self.seed = int(seed)
        rng = np.random.default_rng(self.seed)
        if kind == "gaussian":
            self._dense = rng.standard_normal((self.s, self.m)) / math.sqrt(self.s)
        elif kind == "srtt":
            self._signs = rng.integers(0, 2, size=self.m) * 2.0 - 1.0
            self._rows = np.sort(rng.choice(self.m, size=self.s, replace=False))
            self._scale = math.sqrt(self.m / self.s)
        else:
            zeta = min(SPARSE_SIGN_NNZ_PER_COLUMN, self.s)
            rows = _distinct_rows(rng, self.m, self.s, zeta).ravel()
            cols = np.repeat(np.arange(self.m), zeta)
            signs = rng.integers(0, 2, size=self.m * zeta) * 2.0 - 1.0
            data = signs / math.sqrt(zeta)
            self._sparse = sp.csr_matrix(
                (data, (rows, cols)), shape=(self.s, self.m)
            )
            self.zeta = zeta

    def __repr__(self):
        return f"SketchOperator(kind={self.kind!r}, s={self.s}, m={self.m}, seed={self.seed})"

    def _check_rows(self, X):
        if X.shape[0] != self.m:
            raise ShapeError(
                f"operator expects {self.m} rows, input has {X.shape[0]}"
            )

    def apply(self, X):
        """Compute ``S @ X``; returns a dense (s, n) array (or (s,) for a
        vector input).  Sparse input is never densified for the gaussian
        and sparse-sign kinds."""
        vector = not sp.issparse(X) and np.ndim(X) == 1
        if vector:
            X = np.asarray(X, dtype=np.float64)[:, None]
        else:
            X = as_matrix(X)
        self._check_rows(X)
        if self.kind == "gaussian":
            if sp.issparse(X):
                out = np.ascontiguousarray((X.T @ self._dense.T).T)
            else:
                out = self._dense @ X
        elif self.kind == "sparse-sign":
            out = self._sparse @ X
            if sp.issparse(out):
                out = out.toarray()
        else:
            out = self._apply_srtt(X)
        return out[:, 0] if vector else out

    def _apply_srtt(self, X):
        if sp.issparse(X):
            n = X.shape[1]
            out = np.empty((self.s, n))
            Xc = X.tocsc()
            for j0 in range(0, n, _SRTT_BLOCK):
                j1 = min(j0 + _SRTT_BLOCK, n)
                out[:, j0:j1] = self._apply_srtt(Xc[:, j0:j1].toarray())
            return out
        Y = X * self._signs[:, None]
        Z = scipy.fft.dct(Y, type=2, axis=0, norm="ortho")
        return self._scale * Z[self._rows]

    def apply_reference(self, X):
        """Slow dense route for testing: materialized operator times X
        (for srtt, the O(m^2) explicit cosine matrix)."""
        vector = not sp.issparse(X) and np.ndim(X) == 1
        X = np.asarray(X, dtype=np.float64)[:, None] if vector else as_matrix(X)
        self._check_rows(X)
        if sp.issparse(X):
            X = X.toarray()
        out = self.materialize() @ X
        return out[:, 0] if vector else out

    def materialize(self):
        """Dense (s, m) matrix of the operator; intended for small m."""
        if self.kind == "gaussian":
            return self._dense.copy()
        if self.kind == "sparse-sign":
            return self._sparse.toarray()
        F = dct2_matrix(self.m)
        return self._scale * (F * self._signs[None, :])[self._rows]


def build_sketch(kind, s, m, seed):
    """Construct a :class:`SketchOperator`; deterministic in ``seed``."""
    return SketchOperator(kind, s, m, seed)


def empirical_epsilon(op, U):
    """Measure the distortion of ``op`` over ``Range(U)``.

    ``U`` must have orthonormal columns (to 1e-10).  The certificate's
    ``epsilon_emp = max(sigma_max(SU)^2 - 1, 1 - sigma_min(SU)^2)`` makes
    the embedding inequality hold deterministically for every vector in
    the audited subspace.
    """
    U = np.asarray(U, dtype=np.float64)
    if U.ndim == 1:
        U = U[:, None]
    k = U.shape[1]
    if k == 0:
        raise ShapeError("cannot audit an empty basis")
    gram_defect = np.linalg.norm(U.T @ U - np.eye(k), 2)
    if gram_defect > 1e-10:
        raise PreconditionError(
            f"basis is not orthonormal: ||U^T U - I||_2 = {gram_defect:.3e}"
        )
    SU = op.apply(U)
    sv = np.linalg.svd(SU, compute_uv=False)
    smax = float(sv[0])
    # a sketch with fewer rows than the subspace dimension has a nullspace
    # inside the subspace: its smallest gain is exactly zero
    smin = float(sv[-1]) if SU.shape[0] >= k else 0.0
    eps = max(smax**2 - 1.0, 1.0 - smin**2, 0.0)
    return EmbeddingCertificate(
        epsilon_emp=eps,
        subspace_dim=k,
        sigma_min_sketched=smin,
        sigma_max_sketched=smax,
    )


def pairwise_cosine_audit(op, P, slack=1e-7):
    """Largest pairwise column cosine of a sketch-orthonormal ``P``.

    Requires nonzero columns and ``(SP)^T (SP) = I`` within 1e-8.  The
    returned flag checks the cosine against ``epsilon_emp`` measured over
    ``Range(P)``, which contains every normalized column pair sum and
    difference, so the bound is deterministic up to the stated slack.
    """
    P = np.asarray(P, dtype=np.float64)
    norms = np.linalg.norm(P, axis=0)
    if (norms == 0).any():
        raise PreconditionError("pairwise_cosine_audit: zero column in input")
    n = P.shape[1]
    SP = op.apply(P)
    defect = np.linalg.norm(SP.T @ SP - np.eye(n), 2)
    if defect > 1e-8:
        raise PreconditionError(
            f"columns are not sketch-orthonormal: ||(SP)^T SP - I||_2 = {defect:.3e}"
        )
    N = P / norms
    C = np.abs(N.T @ N)
    np.fill_diagonal(C, 0.0)
    max_cos = float(C.max()) if n > 1 else 0.0
    basis, _ = np.linalg.qr(P)
    cert = empirical_epsilon(op, basis)
    return CosineAudit(
        max_abs_cosine=max_cos,
        epsilon_emp=cert.epsilon_emp,
        within_bound=max_cos <= cert.epsilon_emp + slack,
    )
