"""Algebraic certification of minimal (soliton-compatible) metrics, the
non-hermitian-Ricci obstruction for symplectic structures, and spectral
fingerprints for telling structures apart.

The certificate tests, at a given metric, whether the invariant Ricci
operator splits as c I + D with D a derivation of the bracket.  The test
is algebraic: c is forced by traces, D is the remainder, and the residual
is the norm of the coboundary of D.  A failed test at one metric proves
nothing about other compatible metrics, so the negative verdict is
NotCertified, never "NotMinimal".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra_core import Bracket, Metric, SkewTensor, _transported, coboundary
from .curvature import curvature_report, invariant_ricci, ricci_operator
from .defaults import TOL_COMPAT, TOL_DISTINGUISH, certification_tolerance
from .errors import (
    DimensionMismatch,
    IncompatibleMetric,
    NotApplicable,
    NotClosed,
    WrongTag,
)
from .structures import (
    Structure,
    compatibility_residual,
    integrability_residual,
    no_structure,
)

MINIMAL = "Minimal"
NOT_CERTIFIED = "NotCertified"
OBSTRUCTED = "Obstructed"
ABELIAN = "Abelian"

DISTINCT = "Distinct"
INDISTINGUISHABLE = "Indistinguishable"


@dataclass(frozen=True)
class Certificate:
    c: float
    D: np.ndarray
    residual: float
    verdict: str
    tolerance: float

    @property
    def minimal(self) -> bool:
        return self.verdict == MINIMAL


def _certificate_core(tensor: SkewTensor, G: Metric, gamma: Structure,
                      allow_scale: bool = False, check_cone: bool = True):
    """(c, D0, residual, ric_gamma0, mu0) in the G-orthonormal frame."""
    n = tensor.dim
    mu0, h, hinv = _transported(tensor, G)
    ric_gamma = invariant_ricci(tensor, G, gamma, allow_scale=allow_scale,
                                check_cone=check_cone)
    ric_gamma0 = h @ ric_gamma @ hinv
    ric_gamma0 = 0.5 * (ric_gamma0 + ric_gamma0.T)
    norm2 = mu0.norm2()
    scal = -0.25 * norm2
    if scal == 0.0:
        c = 0.0
    else:
        c = float(np.trace(ric_gamma0 @ ric_gamma0)) / scal
    D0 = ric_gamma0 - c * np.eye(n)
    if norm2 == 0.0:
        residual = 0.0
    else:
        defect = coboundary(mu0, D0)
        residual = defect.norm() / (
            (1.0 + float(np.linalg.norm(D0))) * np.sqrt(norm2)
        )
    return c, D0, float(residual), ric_gamma0, mu0


def certify_minimal(mu, G: Metric = None, gamma: Structure = None,
                    tol: float = None, allow_scale: bool = False,
                    check_cone: bool = True) -> Certificate:
    """Test whether the invariant Ricci operator equals c I + (derivation).

    Returns a Certificate whose verdict is Minimal iff the relative
    coboundary residual of D = Ric^gamma - c I is within tolerance.  The
    tolerance defaults to the package certification default, overridable
    per call or through the NILMETRIC_TOL environment variable.
    """
    tensor = mu.tensor if isinstance(mu, Bracket) else mu
    n = tensor.dim
    if G is None:
        G = Metric.identity(n)
    if gamma is None:
        gamma = no_structure(n)
    if tol is None:
        tol = certification_tolerance()
    if gamma.tag != "symplectic" and compatibility_residual(gamma, G) > TOL_COMPAT:
        raise IncompatibleMetric("metric is not compatible with the structure")
    c, D0, residual, _, _ = _certificate_core(tensor, G, gamma, allow_scale,
                                              check_cone)
    hinv = G.transport_inv
    h = G.transport
    D = hinv @ D0 @ h
    verdict = MINIMAL if residual <= tol else NOT_CERTIFIED
    return Certificate(c=c, D=D, residual=residual, verdict=verdict,
                       tolerance=float(tol))


def two_step_shortcut(mu, G: Metric = None, gamma: Structure = None,
                      tol: float = None) -> Certificate:
    """Closed-form certificate for 2-step brackets whose invariant Ricci
    operator is scalar on the center and on its orthogonal complement.

    With Ric^gamma = diag(p I, q I) in that splitting, c = 2p - q and
    D = diag((q-p) I, 2(q-p) I) is automatically a derivation.  Raises
    NotApplicable when the bracket is not 2-step or the blocks are not
    scalar; the result agrees with certify_minimal whenever it applies.
    """
    from .algebra_core import _center_split, _require_two_step
    from .errors import NotTwoStep

    tensor = mu.tensor if isinstance(mu, Bracket) else mu
    n = tensor.dim
    if G is None:
        G = Metric.identity(n)
    if gamma is None:
        gamma = no_structure(n)
    if tol is None:
        tol = certification_tolerance()
    c0, D0, residual, ric_gamma0, mu0 = _certificate_core(tensor, G, gamma)
    T0 = mu0.full()
    try:
        _require_two_step(T0)
    except NotTwoStep as exc:
        raise NotApplicable(str(exc)) from exc
    Q1, Q2 = _center_split(T0)
    if Q2.shape[1] == 0 or Q1.shape[1] == 0:
        raise NotApplicable("center split is degenerate")
    scale = max(1.0, float(np.abs(ric_gamma0).max()))
    P11 = Q1.T @ ric_gamma0 @ Q1
    P22 = Q2.T @ ric_gamma0 @ Q2
    P12 = Q1.T @ ric_gamma0 @ Q2
    p = float(np.trace(P11)) / Q1.shape[1]
    q = float(np.trace(P22)) / Q2.shape[1]
    off = max(
        np.abs(P11 - p * np.eye(Q1.shape[1])).max(),
        np.abs(P22 - q * np.eye(Q2.shape[1])).max(),
        np.abs(P12).max() if P12.size else 0.0,
    )
    if off > 1e-8 * scale:
        raise NotApplicable(
            f"invariant Ricci blocks are not scalar (deviation {off:.3e})"
        )
    c = 2.0 * p - q
    D0 = (q - p) * (Q1 @ Q1.T) + 2.0 * (q - p) * (Q2 @ Q2.T)
    defect = coboundary(mu0, D0)
    residual = float(
        defect.norm() / ((1.0 + np.linalg.norm(D0)) * mu0.norm())
    )
    hinv = G.transport_inv
    h = G.transport
    verdict = MINIMAL if residual <= tol else NOT_CERTIFIED
    return Certificate(c=c, D=hinv @ D0 @ h, residual=residual,
                       verdict=verdict, tolerance=float(tol))


@dataclass(frozen=True)
class ObstructionReport:
    status: str
    obstruction_norm: float


def hermitian_obstruction(mu, G: Metric = None,
                          gamma: Structure = None) -> ObstructionReport:
    """Size of the part of the Ricci operator anticommuting with the map
    of a closed symplectic structure (its projection onto the structure
    algebra).  It is positive whenever the bracket is nonzero, so no
    compatible metric can have a hermitian (commuting) Ricci operator.

    Returns Abelian for the zero bracket; raises NotClosed when the form
    is not closed for the bracket.
    """
    tensor = mu.tensor if isinstance(mu, Bracket) else mu
    n = tensor.dim
    if G is None:
        G = Metric.identity(n)
    if gamma is None or gamma.tag != "symplectic":
        raise WrongTag("the obstruction is specific to symplectic structures")
    if tensor.norm2() == 0.0:
        return ObstructionReport(status=ABELIAN, obstruction_norm=0.0)
    closed = integrability_residual(gamma, tensor)
    if closed > 1e-8 * (1.0 + tensor.norm()):
        raise NotClosed(f"form is not closed (residual {closed:.3e})")
    ric_gamma = invariant_ricci(tensor, G, gamma)
    h = G.transport
    hinv = G.transport_inv
    proj0 = h @ ric_gamma @ hinv
    return ObstructionReport(
        status=OBSTRUCTED,
        obstruction_norm=float(np.linalg.norm(proj0)),
    )


@dataclass(frozen=True)
class Fingerprint:
    dim: int
    eigen_ric: list
    eigen_ric_gamma: list
    scal: float
    lcs_dims: list


def fingerprint(mu, G: Metric = None, gamma: Structure = None,
                allow_scale: bool = False) -> Fingerprint:
    """Spectral and series data of (mu, G, gamma), invariant under
    structure-preserving orthogonal basis changes."""
    if not isinstance(mu, Bracket):
        mu = Bracket(mu)
    n = mu.dim
    if G is None:
        G = Metric.identity(n)
    if gamma is None:
        gamma = no_structure(n)
    report = curvature_report(mu, G, gamma, allow_scale=allow_scale)
    return Fingerprint(
        dim=n,
        eigen_ric=report.eigen_ric,
        eigen_ric_gamma=report.eigen_ric_gamma,
        scal=report.scal,
        lcs_dims=list(mu.lcs_dims),
    )


def distinguish(f1: Fingerprint, f2: Fingerprint,
                tol: float = TOL_DISTINGUISH) -> str:
    """Distinct if any fingerprint component differs beyond tol.

    Indistinguishable is NOT a proof that the underlying structures are
    equivalent; it only means this test cannot separate them.
    """
    if f1.dim != f2.dim:
        raise DimensionMismatch(f"fingerprint dims {f1.dim} vs {f2.dim}")
    if list(f1.lcs_dims) != list(f2.lcs_dims):
        return DISTINCT
    if abs(f1.scal - f2.scal) > tol:
        return DISTINCT
    for a, b in ((f1.eigen_ric, f2.eigen_ric),
                 (f1.eigen_ric_gamma, f2.eigen_ric_gamma)):
        if len(a) != len(b):
            return DISTINCT
        if np.abs(np.asarray(a) - np.asarray(b)).max() > tol:
            return DISTINCT
    return INDISTINGUISHABLE
