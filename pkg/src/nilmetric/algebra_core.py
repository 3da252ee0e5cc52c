"""Structure-constant tensors, the basis-change action, coboundaries and
derivation algebras of nilpotent Lie brackets.

Conventions used throughout the package:

- A skew tensor mu stores the coefficients of mu(X_i, X_j) for i < j only;
  antisymmetry is structural.  Indices are 1-based in all I/O and documents,
  0-based internally.
- The inner product on tensors is the ordered double sum over (i, j), so
  each stored i < j coefficient counts twice: ``inner(mu, mu) =
  2 * sum(coeffs**2)``.  This is the unique convention under which the
  scalar curvature identity scal = -1/4 * |mu|^2 holds exactly.
- ``coboundary(mu, A)`` is delta_mu(A) = A mu(., .) - mu(A., .) - mu(., A.),
  so delta_mu(I) = -mu.
- General metrics are handled by Cholesky transport: with G = L L^T and
  h = L^T, computations run on act(h, mu) in the identity frame and the
  results are conjugated back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import warnings

import numpy as np

from .defaults import TOL_JACOBI, TOL_NULL, COND_WARN
from .errors import (
    DimensionMismatch,
    InvalidBracket,
    NotNilpotent,
    NotPositiveDefinite,
    NotTwoStep,
    SingularMap,
)


@lru_cache(maxsize=None)
def ordered_pairs(n: int) -> tuple:
    """Lexicographic list of index pairs (i, j) with i < j, 0-based."""
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


def sym_basis(n: int) -> list:
    """Frobenius-orthonormal basis of symmetric n x n matrices."""
    basis = []
    for i in range(n):
        E = np.zeros((n, n))
        E[i, i] = 1.0
        basis.append(E)
    for i, j in ordered_pairs(n):
        E = np.zeros((n, n))
        E[i, j] = E[j, i] = 1.0 / np.sqrt(2.0)
        basis.append(E)
    return basis


def skew_basis(n: int) -> list:
    """Frobenius-orthonormal basis of antisymmetric n x n matrices."""
    basis = []
    for i, j in ordered_pairs(n):
        E = np.zeros((n, n))
        E[i, j] = 1.0 / np.sqrt(2.0)
        E[j, i] = -E[i, j]
        basis.append(E)
    return basis


def svd_nullspace(M: np.ndarray, rtol: float = TOL_NULL) -> np.ndarray:
    """Orthonormal basis (columns) of the nullspace of M.

    Singular values below rtol * sigma_max are treated as zero.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] == 0 or not np.any(M):
        return np.eye(M.shape[1])
    _, s, vt = np.linalg.svd(M)
    cutoff = rtol * s[0] if s.size else 0.0
    rank = int(np.sum(s > cutoff))
    return vt[rank:].T


class SkewTensor:
    """Element of V = Lambda^2(n*) (x) n as structure constants.

    coeffs has shape (n(n-1)/2, n); row p holds the value of mu(X_i, X_j)
    for the p-th pair (i, j) in lexicographic order.
    """

    def __init__(self, dim: int, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=float)
        expected = (dim * (dim - 1) // 2, dim)
        if coeffs.shape != expected:
            raise DimensionMismatch(
                f"coeffs shape {coeffs.shape}, expected {expected} for dim {dim}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("tensor coefficients must be finite")
        self.dim = dim
        self.coeffs = coeffs
        self._full = None

    @classmethod
    def zero(cls, dim: int) -> "SkewTensor":
        return cls(dim, np.zeros((dim * (dim - 1) // 2, dim)))

    @classmethod
    def from_entries(cls, dim: int, entries) -> "SkewTensor":
        """Build from 1-based records (i, j, k, coeff) with i < j."""
        coeffs = np.zeros((dim * (dim - 1) // 2, dim))
        index = {p: r for r, p in enumerate(ordered_pairs(dim))}
        for i, j, k, value in entries:
            if not (1 <= i < j <= dim and 1 <= k <= dim):
                raise DimensionMismatch(
                    f"entry ({i},{j},{k}) out of range for dim {dim}"
                )
            coeffs[index[(i - 1, j - 1)], k - 1] += float(value)
        return cls(dim, coeffs)

    @classmethod
    def from_full(cls, arr: np.ndarray) -> "SkewTensor":
        """Build from a full (n, n, n) array; checks antisymmetry."""
        arr = np.asarray(arr, dtype=float)
        n = arr.shape[0]
        if arr.shape != (n, n, n):
            raise DimensionMismatch(f"expected cubic array, got {arr.shape}")
        if np.abs(arr + arr.transpose(1, 0, 2)).max() > 1e-12 * (1 + np.abs(arr).max()):
            raise ValueError("array is not antisymmetric in its first two slots")
        coeffs = np.array([arr[i, j] for i, j in ordered_pairs(n)])
        if n < 2:
            coeffs = coeffs.reshape(0, n)
        return cls(n, coeffs)

    def full(self) -> np.ndarray:
        """Full antisymmetric (n, n, n) array; cached."""
        if self._full is None:
            n = self.dim
            T = np.zeros((n, n, n))
            for r, (i, j) in enumerate(ordered_pairs(n)):
                T[i, j] = self.coeffs[r]
                T[j, i] = -self.coeffs[r]
            self._full = T
        return self._full

    def entries(self) -> list:
        """Nonzero coefficients as 1-based (i, j, k, value) records."""
        out = []
        for r, (i, j) in enumerate(ordered_pairs(self.dim)):
            for k in range(self.dim):
                if self.coeffs[r, k] != 0.0:
                    out.append((i + 1, j + 1, k + 1, float(self.coeffs[r, k])))
        return out

    def norm2(self) -> float:
        """Squared norm under the ordered-sum convention."""
        return 2.0 * float(np.sum(self.coeffs**2))

    def norm(self) -> float:
        return float(np.sqrt(self.norm2()))

    def scaled(self, t: float) -> "SkewTensor":
        return SkewTensor(self.dim, t * self.coeffs)

    def plus(self, other: "SkewTensor", weight: float = 1.0) -> "SkewTensor":
        if other.dim != self.dim:
            raise DimensionMismatch("tensor dims differ")
        return SkewTensor(self.dim, self.coeffs + weight * other.coeffs)

    def __repr__(self):
        return f"SkewTensor(dim={self.dim}, nnz={int(np.count_nonzero(self.coeffs))})"


def inner(a: SkewTensor, b: SkewTensor) -> float:
    """Ordered-sum inner product on V; each i < j pair counts twice."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims {a.dim} and {b.dim}")
    return 2.0 * float(np.sum(a.coeffs * b.coeffs))


def jacobi_residual(mu: SkewTensor) -> float:
    """Norm over triples i < j < k of the cyclic Jacobi sum; 0 iff Lie."""
    T = mu.full()
    n = mu.dim
    C = np.einsum("ijl,lkm->ijkm", T, T)
    J = C + C.transpose(1, 2, 0, 3) + C.transpose(2, 0, 1, 3)
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                total += float(np.sum(J[i, j, k] ** 2))
    return float(np.sqrt(total))


def lower_central_dims(mu: SkewTensor) -> list:
    """Dimensions of the lower central series n >= [n,n] >= [n,[n,n]] >= ...

    Computed mechanically by iterated image spans; does not assume Jacobi.
    """
    T = mu.full()
    n = mu.dim
    # ranks are cut off on a scale anchored to the whole tensor, not to the
    # current iterate, so rounding noise in a vanishing term stays rank 0
    scale = float(np.sqrt(np.sum(T * T)))
    dims = [n]
    basis = np.eye(n)
    while True:
        image = np.einsum("ijk,jl->ilk", T, basis).reshape(-1, n)
        if not np.any(image):
            dims.append(0)
            break
        s = np.linalg.svd(image, compute_uv=False)
        rank = int(np.sum(s > TOL_NULL * scale))
        dims.append(rank)
        if rank == 0:
            break
        if rank >= dims[-2]:
            break
        _, _, vt = np.linalg.svd(image)
        basis = vt[:rank].T
    return dims


def nilpotency_check(mu: SkewTensor) -> int:
    """Nilpotency index s (the s+1st term of the series vanishes).

    Raises NotNilpotent if the series stabilizes at positive dimension.
    """
    dims = lower_central_dims(mu)
    if dims[-1] != 0:
        raise NotNilpotent(f"lower central series stabilizes at dims {dims}")
    return len(dims) - 1


class Bracket:
    """A validated nilpotent Lie bracket: Jacobi plus nilpotency."""

    def __init__(self, tensor: SkewTensor, tol: float = TOL_JACOBI):
        res = jacobi_residual(tensor)
        bound = tol * (1.0 + tensor.norm2())
        if res > bound:
            raise InvalidBracket(
                f"jacobi residual {res:.3e} exceeds {bound:.3e}"
            )
        self.tensor = tensor
        self.lcs_dims = lower_central_dims(tensor)
        if self.lcs_dims[-1] != 0:
            raise NotNilpotent(
                f"lower central series stabilizes at dims {self.lcs_dims}"
            )
        self.nilpotency_index = len(self.lcs_dims) - 1

    @property
    def dim(self) -> int:
        return self.tensor.dim

    def __repr__(self):
        return f"Bracket(dim={self.dim}, index={self.nilpotency_index})"


class Metric:
    """Left-invariant inner product <X, Y> = X^T G Y, G symmetric positive
    definite.  Caches the Cholesky transport h = L^T with G = L L^T."""

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        n = matrix.shape[0]
        if matrix.shape != (n, n):
            raise DimensionMismatch(f"metric shape {matrix.shape}")
        if np.abs(matrix - matrix.T).max() > 1e-10 * (1 + np.abs(matrix).max()):
            raise NotPositiveDefinite("metric matrix is not symmetric")
        try:
            L = np.linalg.cholesky(0.5 * (matrix + matrix.T))
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite("Cholesky factorization failed") from exc
        self.matrix = 0.5 * (matrix + matrix.T)
        self.transport = L.T  # h with G = h^T h
        self.transport_inv = np.linalg.inv(self.transport)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, n: int) -> "Metric":
        return cls(np.eye(n))

    def is_identity(self) -> bool:
        return bool(np.abs(self.matrix - np.eye(self.dim)).max() < 1e-14)

    def __repr__(self):
        return f"Metric(dim={self.dim})"


def act(g: np.ndarray, mu: SkewTensor) -> SkewTensor:
    """Basis-change action (g.mu)(X, Y) = g mu(g^-1 X, g^-1 Y).

    Satisfies act(I, mu) = mu and act(g, act(h, mu)) = act(gh, mu).
    """
    g = np.asarray(g, dtype=float)
    n = mu.dim
    if g.shape != (n, n):
        raise DimensionMismatch(f"map shape {g.shape} vs dim {n}")
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise SingularMap("basis change is singular") from exc
    if not np.all(np.isfinite(ginv)):
        raise SingularMap("basis change is singular at working precision")
    # 1-norm condition estimate; cheap and within a factor n of the true value
    cond_est = float(np.linalg.norm(g, 1) * np.linalg.norm(ginv, 1))
    if cond_est > COND_WARN:
        warnings.warn(
            f"basis change condition number about {cond_est:.2e} exceeds "
            f"{COND_WARN:.0e}",
            RuntimeWarning,
            stacklevel=2,
        )
    # (g.mu)[a,b,m] = ginv[i,a] ginv[j,b] mu[i,j,k] g[m,k], as three
    # contractions to avoid per-call einsum path planning
    T = np.tensordot(mu.full(), g, axes=(2, 1))       # ijk,mk -> ijm
    T = np.tensordot(ginv, T, axes=(0, 0))            # ia,ijm -> ajm
    T = np.tensordot(ginv, T, axes=(0, 1))            # jb,ajm -> bam
    return SkewTensor.from_full(np.ascontiguousarray(T.transpose(1, 0, 2)))


def coboundary(mu: SkewTensor, A: np.ndarray) -> SkewTensor:
    """delta_mu(A) = A mu(., .) - mu(A., .) - mu(., A.); delta_mu(I) = -mu."""
    A = np.asarray(A, dtype=float)
    n = mu.dim
    if A.shape != (n, n):
        raise DimensionMismatch(f"map shape {A.shape} vs dim {n}")
    T = mu.full()
    out = (
        np.einsum("kl,ijl->ijk", A, T)
        - np.einsum("li,ljk->ijk", A, T)
        - np.einsum("lj,ilk->ijk", A, T)
    )
    return SkewTensor.from_full(out)


def coboundary_matrix(mu: SkewTensor) -> np.ndarray:
    """Matrix of A -> delta_mu(A) from vec(A) to stored pair coordinates.

    Shape (n(n-1)/2 * n, n^2); row block p*n..p*n+n holds the pair p value.
    """
    T = mu.full()
    n = mu.dim
    I = np.eye(n)
    K = (
        np.einsum("mp,ijq->ijmpq", I, T)
        - np.einsum("qi,pjm->ijmpq", I, T)
        - np.einsum("qj,ipm->ijmpq", I, T)
    )
    rows = [K[i, j].reshape(n, n * n) for i, j in ordered_pairs(n)]
    return np.vstack(rows)


def derivation_basis(mu) -> list:
    """Frobenius-orthonormal basis of Der(mu) = ker(A -> delta_mu(A))."""
    tensor = mu.tensor if isinstance(mu, Bracket) else mu
    M = coboundary_matrix(tensor)
    ns = svd_nullspace(M)
    return [ns[:, i].reshape(mu.dim, mu.dim) for i in range(ns.shape[1])]


def symmetric_derivation_basis(mu) -> list:
    """Orthonormal basis of the symmetric part of Der(mu)."""
    n = mu.dim
    tensor = mu.tensor if isinstance(mu, Bracket) else mu
    M = coboundary_matrix(tensor)
    SB = np.column_stack([B.ravel() for B in sym_basis(n)])
    ns = svd_nullspace(M @ SB)
    out = []
    for col in ns.T:
        A = (SB @ col).reshape(n, n)
        out.append(0.5 * (A + A.T))
    return out


def _transported(mu: SkewTensor, G: Metric):
    """Tensor in the G-orthonormal frame, with the transport h."""
    h = G.transport
    if G.is_identity():
        return mu, h, G.transport_inv
    return act(h, mu), h, G.transport_inv


def _center_split(T0: np.ndarray):
    """Orthonormal bases (Q1, Q2) with Q2 spanning the center, identity frame."""
    n = T0.shape[0]
    M = T0.transpose(0, 2, 1).reshape(n * n, n)
    Q2 = svd_nullspace(M)
    Q1 = svd_nullspace(Q2.T) if Q2.shape[1] else np.eye(n)
    return Q1, Q2


def _require_two_step(T0: np.ndarray):
    scale = np.abs(T0).max()
    if scale == 0.0:
        raise NotTwoStep("abelian bracket has a degenerate center split")
    nested = np.einsum("ijl,lkm->ijkm", T0, T0)
    if np.abs(nested).max() > 1e-10 * scale * scale:
        raise NotTwoStep("bracket is not 2-step nilpotent")


def j_operator(mu: Bracket, G: Metric, Z: np.ndarray) -> np.ndarray:
    """Skew map j(Z) with <j(Z) X, Y> = <mu(X, Y), Z>, for 2-step brackets.

    Returns the full n x n matrix, which vanishes on the center block; its
    restriction to the orthogonal complement of the center is the operator.
    Computed in the G-orthonormal frame and conjugated back.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.shape != (mu.dim,):
        raise DimensionMismatch(f"center vector shape {Z.shape}")
    mu0, h, hinv = _transported(mu.tensor, G)
    T0 = mu0.full()
    _require_two_step(T0)
    j0 = np.einsum("bak,k->ab", T0, h @ Z)
    return hinv @ j0 @ h


def htype_classify(mu: Bracket, G: Metric, samples: int = 8) -> str:
    """Classify a 2-step bracket metric pair as HType, ModifiedHType or Neither.

    Tests j(Z)^2 on a center basis plus random unit center vectors:
    ModifiedHType needs j(Z)^2 to be a negative scalar for every tested Z,
    HType additionally needs that scalar to equal -<Z, Z>.
    """
    mu0, _, _ = _transported(mu.tensor, G)
    T0 = mu0.full()
    _require_two_step(T0)
    Q1, Q2 = _center_split(T0)
    if Q2.shape[1] == 0:
        raise NotTwoStep("bracket has trivial center")
    rng = np.random.default_rng(0)
    vectors = [Q2[:, i] for i in range(Q2.shape[1])]
    for _ in range(samples):
        v = Q2 @ rng.standard_normal(Q2.shape[1])
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            vectors.append(v / norm)
    modified = True
    exact = True
    m = Q1.shape[1]
    for Z0 in vectors:
        j0 = np.einsum("bak,k->ab", T0, Z0)
        A = Q1.T @ j0 @ Q1
        A2 = A @ A
        c = float(np.trace(A2)) / m
        scale = max(1.0, float(np.abs(A2).max()))
        if c >= -1e-12 or np.abs(A2 - c * np.eye(m)).max() > 1e-8 * scale:
            modified = False
            break
        if abs(c + float(Z0 @ Z0)) > 1e-8 * max(1.0, abs(c)):
            exact = False
    if not modified:
        return "Neither"
    return "HType" if exact else "ModifiedHType"
