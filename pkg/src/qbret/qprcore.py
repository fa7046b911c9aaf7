"""Quasiprobability-side objects and the retrodiction algorithms.

Morphisms between the Hilbert picture and a representation, the
prior/posterior matrices built from structure coefficients, adjoints with
the rank-one correction for SIC-type frames, the recovery map assembled
purely from quasiprobability data, and the classical Bayes inverse it is
contrasted with.

Conventions: a channel matrix S has unit column sums with the column
indexing the input (S[a_out, a_in]), so distributions compose as S @ v.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NotPSD,
    RepMismatch,
    SingularPosterior,
    SingularState,
    UnsupportedKind,
)
from .frames import (
    KIND_NQ,
    KIND_SP,
    DualFrame,
    Frame,
    StructureCoefficients,
    structure_coeffs,
)
from .hilbert import AdjointChannel, KrausChannel
from .matcore import DEFAULT_TOL, RANK_RTOL, dagger, max_abs, principal_power

# The root pipeline squares the posterior's conditioning (eigenvalues of the
# posterior matrix are products of pairs of posterior weights), so
# regularization weights below ~1e-5 drown in roundoff.  Smaller requested
# values are floored to this and the value actually used is reported.
QPR_EPS_FLOOR = 1e-5


def uniform_vector(n: int) -> np.ndarray:
    """Quasiprobability vector of the maximally mixed state, 1/n per entry."""
    return np.full(n, 1.0 / n)


def state_to_qpr(rho: np.ndarray, frame: Frame) -> np.ndarray:
    """v_a = Tr[rho F_a]."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (frame.d, frame.d):
        raise DimensionMismatch(
            f"state shape {rho.shape} does not match frame dimension {frame.d}")
    return np.einsum("jab,ba->j", frame.ops, rho).real


def povm_to_qpr(effect: np.ndarray, dual: DualFrame) -> np.ndarray:
    """Effect vector vbar_a = Tr[E G_a]."""
    effect = np.asarray(effect, dtype=complex)
    d = dual.ops.shape[1]
    if effect.shape != (d, d):
        raise DimensionMismatch(
            f"effect shape {effect.shape} does not match frame dimension {d}")
    return np.einsum("jab,ba->j", dual.ops, effect).real


def reconstruct_state(v: np.ndarray, dual: DualFrame) -> np.ndarray:
    """alpha = sum_x v_x G_x; left inverse of state_to_qpr on valid vectors."""
    v = np.asarray(v, dtype=float)
    if v.shape != (dual.ops.shape[0],):
        raise RepMismatch(
            f"vector length {v.shape} does not match frame size {dual.ops.shape[0]}")
    return np.einsum("j,jab->ab", v, dual.ops)


def channel_to_qpr(channel, frame: Frame, dual: DualFrame) -> np.ndarray:
    """Quasi-stochastic matrix S[a_out, a_in] = Tr[F_out E[G_in]].

    `channel` is anything exposing apply(matrix) -> matrix (a Kraus channel,
    an adjoint wrapper, a recovery map) or a bare callable.
    """
    apply = channel.apply if hasattr(channel, "apply") else channel
    d = getattr(channel, "d", None)
    if d is not None and d != frame.d:
        raise DimensionMismatch(
            f"channel dimension {d} does not match frame dimension {frame.d}")
    n = frame.n
    s = np.empty((n, n))
    for a in range(n):
        image = apply(dual.ops[a])
        s[:, a] = np.einsum("jab,ba->j", frame.ops, image).real
    return s


def born(v: np.ndarray, vbar: np.ndarray) -> float:
    """Outcome (quasi)probability v . vbar; in [0, 1] for valid pairs."""
    v = np.asarray(v, dtype=float)
    vbar = np.asarray(vbar, dtype=float)
    if v.shape != vbar.shape:
        raise RepMismatch(f"vector lengths differ: {v.shape} vs {vbar.shape}")
    return float(v @ vbar)


def _xi_of(coeffs) -> np.ndarray:
    return coeffs.xi if isinstance(coeffs, StructureCoefficients) else np.asarray(coeffs)


def x_matrix(v: np.ndarray, coeffs) -> np.ndarray:
    """Prior-dependent matrix X[i, j] = sum_{xy} v_x v_y xi[i, x, j, y].

    With the structure coefficients of a frame this equals
    Tr[F_i alpha G_j alpha] for alpha reconstructed from v; with the
    classical delta tensor it collapses to diag(v^2).
    """
    xi = _xi_of(coeffs)
    v = np.asarray(v, dtype=float)
    if xi.shape[0] != v.shape[0]:
        raise RepMismatch(
            f"vector length {v.shape[0]} does not match coefficients ({xi.shape[0]})")
    return np.einsum("x,y,ixjy->ij", v, v, xi, optimize=True)


def k_matrix(s: np.ndarray, d: int | None = None) -> np.ndarray:
    """Rank-one correction K[i, j] = (sum_a S[j, a] - 1) / d, identical rows.

    Vanishes exactly when S is quasi-bistochastic (unital channel).
    """
    s = np.asarray(s, dtype=float)
    n = s.shape[0]
    if d is None:
        d = int(round(np.sqrt(n)))
    row = (s.sum(axis=1) - 1.0) / d
    return np.tile(row, (n, 1))


def adjoint_qpr(s: np.ndarray, kind: str, d: int | None = None, *,
                channel: KrausChannel | None = None,
                frame: Frame | None = None,
                dual: DualFrame | None = None) -> np.ndarray:
    """Representation of the adjoint map.

    NQPR frames transpose; SIC frames transpose plus the K correction.  For
    custom frames no closed form is assumed: the Hilbert adjoint is morphed
    directly, which needs the channel and the frame pair.
    """
    s = np.asarray(s, dtype=float)
    if kind == KIND_NQ:
        return s.T.copy()
    if kind == KIND_SP:
        return s.T + k_matrix(s, d)
    if channel is None or frame is None or dual is None:
        raise UnsupportedKind(
            "custom representations need the Hilbert channel and frame pair "
            "to morph the adjoint")
    return channel_to_qpr(AdjointChannel(channel), frame, dual)


def _posterior_deficient(m_post: np.ndarray) -> bool:
    w = np.linalg.eigvals(m_post).real
    return bool(w.min() < RANK_RTOL * max(w.max(), 1e-300))


def _root_sandwich(m_prior: np.ndarray, s_adj: np.ndarray,
                   m_post: np.ndarray, tol: float) -> np.ndarray:
    # prior^{1/2} adj post^{-1/2}, with the inverse root applied as a linear
    # solve against post^{1/2} to avoid forming large explicit inverses; a
    # posterior matrix that stays rank-deficient takes the support route
    left = principal_power(m_prior, 0.5, tol) @ s_adj
    if _posterior_deficient(m_post):
        return left @ principal_power(m_post, -0.5, tol, singular="support")
    right_root = principal_power(m_post, 0.5, tol)
    return np.linalg.solve(right_root.T, left.T).T


@dataclass(frozen=True)
class PetzQprResult:
    """Retrodiction matrix plus how a rank-deficient posterior was handled.

    For a full-rank posterior only `matrix` is meaningful (eps_used = 0).
    Otherwise `matrix` is the prior-regularized evaluation at `eps_used`,
    `extrapolation_dev` compares it against eps_used/10 (agreement within
    1e-6 is the convergence criterion), and `support_matrix` carries the
    alternative pseudo-inverse-root evaluation on the posterior support
    with its deviation from the regularized route.  The two routes are not
    guaranteed to agree; disagreement is reported, not resolved.
    """

    matrix: np.ndarray
    eps_used: float = 0.0
    extrapolation_dev: float | None = None
    support_matrix: np.ndarray | None = None
    support_dev: float | None = None

    @property
    def converged(self) -> bool:
        return self.extrapolation_dev is None or self.extrapolation_dev <= 1e-6


def petz_qpr(s: np.ndarray, v_prior: np.ndarray, coeffs, kind: str = KIND_NQ,
             eps: float = 1e-8, *, s_adjoint: np.ndarray | None = None,
             tol: float = DEFAULT_TOL) -> PetzQprResult:
    """Recovery matrix M_prior^{1/2} S_adj M_post^{-1/2} from
    quasiprobability data alone.

    `coeffs` is the structure-coefficient tensor of the representation (the
    classical delta tensor reduces this to the classical Bayes inverse for
    nonnegative priors).  The adjoint is derived from `kind` unless
    `s_adjoint` is supplied (required for custom frames).

    A rank-deficient posterior matrix with eps = 0 raises
    SingularPosterior; otherwise the prior is mixed with the uniform vector
    at weight max(eps, QPR_EPS_FLOOR) and both the regularized and the
    support-restricted evaluations are reported.
    """
    s = np.asarray(s, dtype=float)
    v_prior = np.asarray(v_prior, dtype=float)
    xi = _xi_of(coeffs)
    n = v_prior.shape[0]
    if s.shape != (n, n) or xi.shape[0] != n:
        raise RepMismatch("channel matrix, prior and coefficients disagree in size")
    if s_adjoint is None:
        s_adjoint = adjoint_qpr(s, kind)
    m_prior = x_matrix(v_prior, xi)
    m_post = x_matrix(s @ v_prior, xi)
    if not _posterior_deficient(m_post):
        return PetzQprResult(matrix=_root_sandwich(m_prior, s_adjoint, m_post, tol))
    if eps <= 0.0:
        raise SingularPosterior(
            "posterior matrix is rank-deficient and regularization is disabled")

    support = (principal_power(m_prior, 0.5, tol) @ s_adjoint
               @ principal_power(m_post, -0.5, tol, singular="support"))

    eps_used = max(eps, QPR_EPS_FLOOR)
    u = uniform_vector(n)

    def regularized(e: float) -> np.ndarray:
        v = (1 - e) * v_prior + e * u
        return _root_sandwich(x_matrix(v, xi), s_adjoint, x_matrix(s @ v, xi), tol)

    primary = regularized(eps_used)
    probe = regularized(eps_used / 10)
    return PetzQprResult(
        matrix=primary,
        eps_used=eps_used,
        extrapolation_dev=max_abs(primary - probe),
        support_matrix=support,
        support_dev=max_abs(support - primary),
    )


def classical_bayes(s: np.ndarray, v_prior: np.ndarray, eps: float = 1e-8,
                    rank_rtol: float = RANK_RTOL) -> np.ndarray:
    """Classical Bayes inversion D_prior S^T D_post^{-1}.

    Accepts quasi-stochastic matrices and sign-indefinite "posteriors"
    without complaint: evaluating the formally invalid grafting of the
    classical rule onto quasiprobabilities is a supported mode.  Posterior
    entries at zero are escaped by mixing the prior with the uniform
    distribution at weight eps; if that cannot lift them, the inversion is
    genuinely undefined and SingularPosterior is raised.
    """
    s = np.asarray(s, dtype=float)
    v = np.asarray(v_prior, dtype=float)
    n = v.shape[0]
    if s.shape != (n, n):
        raise RepMismatch(f"matrix shape {s.shape} does not match prior length {n}")
    post = s @ v
    thr = rank_rtol * max(np.abs(post).max(), 1e-300)
    if np.abs(post).min() <= thr:
        if eps <= 0.0:
            raise SingularPosterior(
                "posterior has (near-)zero entries and regularization is disabled")
        v = (1 - eps) * v + eps * uniform_vector(n)
        post = s @ v
        if np.abs(post).min() <= rank_rtol * max(np.abs(post).max(), 1e-300):
            raise SingularPosterior(
                "posterior entries remain at zero after regularization")
    return (np.diag(v) @ s.T) / post[None, :]


@dataclass(frozen=True)
class MPowerReport:
    """Two-sided evaluation of the prior-matrix power identity."""

    r: float
    lhs: np.ndarray  # matrix of the state power, entries Tr[F_i a^r G_j a^r]
    rhs: np.ndarray  # matrix power of the state matrix
    max_dev: float


def m_power_check(v: np.ndarray, r: float, frame: Frame, dual: DualFrame,
                  coeffs: StructureCoefficients | None = None,
                  tol: float = DEFAULT_TOL) -> MPowerReport:
    """Check that powering the state commutes with powering its matrix.

    The left side builds alpha^r in Hilbert space from the reconstructed
    state and takes traces directly; the right side raises the
    quasiprobability-side matrix to the r-th power.
    """
    if coeffs is None:
        coeffs = structure_coeffs(frame, dual, tol)
    alpha = reconstruct_state(v, dual)
    alpha = (alpha + dagger(alpha)) / 2
    w, vec = np.linalg.eigh(alpha)
    if w.min() < -tol:
        raise NotPSD(f"reconstructed state has eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    if r < 0 and w.min() < RANK_RTOL * max(w.max(), 1e-300):
        raise SingularState(
            f"state has eigenvalue {w.min():.3e}; negative powers need full rank")
    alpha_r = (vec * np.power(w, r)) @ dagger(vec)
    lhs = np.einsum("iab,bc,jcd,da->ij", frame.ops, alpha_r, dual.ops,
                    alpha_r, optimize=True).real
    rhs = principal_power(x_matrix(v, coeffs), r, tol)
    return MPowerReport(r=r, lhs=lhs, rhs=rhs, max_dev=max_abs(lhs - rhs))
