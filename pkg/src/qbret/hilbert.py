"""Hilbert-space side: states, channels, adjoints and the recovery-map oracle.

States and effects are plain complex numpy arrays; channels carry their
Kraus operators.  This module is the ground truth that the quasiprobability
computations are cross-checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadAncilla,
    DimensionMismatch,
    NotPSD,
    NotUnitary,
    SingularPosterior,
)
from .matcore import (
    DEFAULT_TOL,
    EYE2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    RANK_RTOL,
    dagger,
    hermitian_eig,
    max_abs,
    partial_trace_b,
    psd_sqrt,
)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


def projector(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def assert_density(rho: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity of a density operator."""
    rho = np.asarray(rho, dtype=complex)
    spec = hermitian_eig(rho, tol)
    if abs(np.trace(rho) - 1.0) > tol:
        raise NotPSD(f"trace {np.trace(rho).real:.12f} != 1")
    if spec.values[0] < -tol:
        raise NotPSD(f"negative eigenvalue {spec.values[0]:.3e}")
    return rho


def assert_povm(effects, tol: float = DEFAULT_TOL):
    """Check that the effects are PSD and sum to the identity."""
    effects = [np.asarray(e, dtype=complex) for e in effects]
    d = effects[0].shape[0]
    for e in effects:
        if hermitian_eig(e, tol).values[0] < -tol:
            raise NotPSD("effect with a negative eigenvalue")
    total = sum(effects)
    dev = max_abs(total - np.eye(d))
    if dev > tol:
        raise NotPSD(f"effects sum to identity only within {dev:.3e}")
    return effects


def qubit_state(omega: float, theta: float, phi: float) -> np.ndarray:
    """Qubit density operator sin^2(w)|psi><psi| + cos^2(w)|psi_perp><psi_perp|
    with |psi> = cos(t/2)|0> + e^{i p} sin(t/2)|1> and |psi_perp> its
    orthogonal complement (so the eigenvalues are exactly sin^2 w, cos^2 w).
    """
    psi = np.array([np.cos(theta / 2),
                    np.exp(1j * phi) * np.sin(theta / 2)], dtype=complex)
    psi_perp = np.array([-np.exp(-1j * phi) * np.sin(theta / 2),
                         np.cos(theta / 2)], dtype=complex)
    s2, c2 = np.sin(omega) ** 2, np.cos(omega) ** 2
    return s2 * projector(psi) + c2 * projector(psi_perp)


def random_density(rng: np.random.Generator, d: int, *,
                   min_eig: float = 0.0) -> np.ndarray:
    """Ginibre-induced random density operator; `min_eig` floors the
    spectrum (relative to a uniform redistribution) to force full rank."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ dagger(g)
    rho /= np.trace(rho).real
    if min_eig > 0.0:
        rho = (1 - d * min_eig) * rho + min_eig * np.eye(d)
    return rho


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix with the
    phases of R's diagonal fixed."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r))).conj()


@dataclass(frozen=True)
class KrausChannel:
    """CPTP map given by Kraus operators; completeness is checked on build."""

    kraus: tuple
    d: int

    @classmethod
    def from_kraus(cls, kraus, tol: float = DEFAULT_TOL) -> "KrausChannel":
        ops = tuple(np.asarray(k, dtype=complex) for k in kraus)
        d = ops[0].shape[0]
        for k in ops:
            if k.shape != (d, d):
                raise DimensionMismatch("Kraus operators must share one square shape")
        total = sum(dagger(k) @ k for k in ops)
        dev = max_abs(total - np.eye(d))
        if dev > tol:
            raise NotUnitary(
                f"Kraus completeness violated: ||sum k^dag k - 1||_max = {dev:.3e}")
        return cls(kraus=ops, d=d)

    @classmethod
    def from_unitary(cls, u, tol: float = DEFAULT_TOL) -> "KrausChannel":
        u = np.asarray(u, dtype=complex)
        if max_abs(u @ dagger(u) - np.eye(u.shape[0])) > tol:
            raise NotUnitary("matrix is not unitary within tolerance")
        return cls(kraus=(u,), d=u.shape[0])

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.d, self.d):
            raise DimensionMismatch(f"operator shape {x.shape} != ({self.d}, {self.d})")
        return sum(k @ x @ dagger(k) for k in self.kraus)

    def adjoint(self, x: np.ndarray) -> np.ndarray:
        """Heisenberg-picture adjoint sum_l k^dag x k; unital by construction
        and tied to `apply` by Tr[E[rho] s] = Tr[E^dag[s] rho]."""
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.d, self.d):
            raise DimensionMismatch(f"operator shape {x.shape} != ({self.d}, {self.d})")
        return sum(dagger(k) @ x @ k for k in self.kraus)


@dataclass(frozen=True)
class AdjointChannel:
    """The adjoint map of a channel, packaged so it can be morphed like one."""

    base: KrausChannel

    @property
    def d(self) -> int:
        return self.base.d

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.base.adjoint(x)


@dataclass(frozen=True)
class DilationSpec:
    """Global unitary on system (x) ancilla plus the ancilla state."""

    u: np.ndarray
    beta: np.ndarray

    def to_channel(self, tol: float = DEFAULT_TOL) -> "KrausChannel":
        return channel_from_dilation(self.u, self.beta, tol)


def channel_from_dilation(u: np.ndarray, beta: np.ndarray,
                          tol: float = DEFAULT_TOL) -> KrausChannel:
    """Kraus form of rho -> Tr_B[U (rho (x) beta) U^dag].

    Ancilla eigenvalues below the rank cutoff are dropped, so pure ancillas
    yield a minimal Kraus set.  Composite ordering is ancilla-fastest.
    """
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    if max_abs(u @ dagger(u) - np.eye(n)) > tol:
        raise NotUnitary("dilation unitary fails U U^dag = 1")
    beta = np.asarray(beta, dtype=complex)
    d_b = beta.shape[0]
    if n % d_b != 0:
        raise BadAncilla(f"ancilla dimension {d_b} does not divide {n}")
    d_a = n // d_b
    try:
        assert_density(beta, tol)
    except Exception as exc:
        raise BadAncilla(f"ancilla is not a density operator: {exc}") from exc
    vals, vecs = np.linalg.eigh(beta)
    u4 = u.reshape(d_a, d_b, d_a, d_b)
    kraus = []
    for lam, j in zip(vals, range(d_b)):
        if lam <= RANK_RTOL:
            continue
        b = vecs[:, j]
        for i in range(d_b):
            # (1 (x) <i|) U (1 (x) |b_j>), weighted by sqrt(lambda_j)
            kraus.append(np.sqrt(lam) * np.einsum("asb,b->as", u4[:, i, :, :], b))
    return KrausChannel.from_kraus(kraus, tol)


@dataclass(frozen=True)
class PetzMap:
    """Recovery map sqrt(g) E^dag[P^{-1/2} . P^{-1/2}] sqrt(g) for prior g
    and posterior P = E[g], kept as the composition of its three factors.

    `support_projected` marks the replacement-channel corner where the
    posterior keeps a kernel no matter how the prior is regularized; the
    inverse root is then Moore-Penrose on the posterior support and the
    map is trace-preserving only on states reaching that support.
    """

    base: KrausChannel
    sqrt_prior: np.ndarray
    inv_sqrt_post: np.ndarray
    eps_used: float = 0.0
    support_projected: bool = False

    @property
    def d(self) -> int:
        return self.base.d

    def apply(self, x: np.ndarray) -> np.ndarray:
        inner = self.base.adjoint(self.inv_sqrt_post @ np.asarray(x, dtype=complex)
                                  @ self.inv_sqrt_post)
        return self.sqrt_prior @ inner @ self.sqrt_prior


def petz_hilbert(channel: KrausChannel, prior: np.ndarray,
                 eps: float = 1e-8, tol: float = DEFAULT_TOL) -> PetzMap:
    """Build the recovery map for `channel` with respect to `prior`.

    A rank-deficient posterior is escaped by mixing the prior with the
    maximally mixed state at weight `eps` (reported on the result); with
    eps = 0 it raises SingularPosterior instead.
    """
    prior = assert_density(prior, tol)
    d = channel.d

    def deficient(p):
        w = hermitian_eig(p, tol).values
        return w[0] < RANK_RTOL * max(w[-1], 1e-300)

    post = channel.apply(prior)
    eps_used = 0.0
    if deficient(post):
        if eps <= 0.0:
            raise SingularPosterior(
                "posterior is rank-deficient and regularization is disabled")
        prior = (1 - eps) * prior + eps * np.eye(d) / d
        post = channel.apply(prior)
        eps_used = eps
    # channels that erase whole directions keep a posterior kernel for any
    # prior; fall back to the inverse root on the support there
    support_projected = deficient(post)
    return PetzMap(base=channel,
                   sqrt_prior=psd_sqrt(prior, tol),
                   inv_sqrt_post=psd_sqrt(post, tol, inverse=True,
                                          singular="support"
                                          if support_projected else "error"),
                   eps_used=eps_used,
                   support_projected=support_projected)


# --- built-in gate catalog ---------------------------------------------------

_HALF_SWAP = np.array([
    [np.sqrt(2), 0, 0, 0],
    [0, 1, 1, 0],
    [0, 1, -1, 0],
    [0, 0, 0, np.sqrt(2)],
], dtype=complex) / np.sqrt(2)

_FULL_SWAP = np.array([
    [1, 0, 0, 0],
    [0, 0, 1, 0],
    [0, 1, 0, 0],
    [0, 0, 0, 1],
], dtype=complex)

_SQ3 = np.sqrt(3)
_U_EG = np.array([
    [1j * (_SQ3 + 2j), 0, 3j, 0],
    [0, 1j * (_SQ3 + 2j), 0, 3j],
    [-3j, 0, 2 + 1j * _SQ3, 0],
    [0, -3j, 0, 2 + 1j * _SQ3],
], dtype=complex) / 4

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

BUILTIN_NAMES = ("identity", "pauli_x", "pauli_y", "pauli_z", "hadamard",
                 "half_swap", "full_swap", "u_eg")


def builtin_gates() -> dict:
    """Unitary matrices of the built-in catalog, unitarity verified.

    The two-qubit entries (half_swap, full_swap, u_eg) act on system (x)
    ancilla with the ancilla index fastest.
    """
    gates = {
        "identity": EYE2.copy(),
        "pauli_x": PAULI_X.copy(),
        "pauli_y": PAULI_Y.copy(),
        "pauli_z": PAULI_Z.copy(),
        "hadamard": _HADAMARD.copy(),
        "half_swap": _HALF_SWAP.copy(),
        "full_swap": _FULL_SWAP.copy(),
        "u_eg": _U_EG.copy(),
    }
    for name, u in gates.items():
        dev = max_abs(u @ dagger(u) - np.eye(u.shape[0]))
        if dev > DEFAULT_TOL:
            raise NotUnitary(f"builtin {name} failed unitarity: {dev:.3e}")
    return gates


def builtin_channel(name: str, ancilla: np.ndarray | None = None,
                    tol: float = DEFAULT_TOL) -> KrausChannel:
    """Qubit channel for a catalog entry.

    Single-qubit gates become unitary channels; the two-qubit gates are
    dilations and take an ancilla (default |1><1| for the swaps, |0><0|
    for u_eg, whose action is ancilla-independent).
    """
    gates = builtin_gates()
    if name not in gates:
        raise KeyError(f"unknown builtin channel {name!r}; "
                       f"expected one of {BUILTIN_NAMES}")
    u = gates[name]
    if u.shape[0] == 2:
        return KrausChannel.from_unitary(u, tol)
    if ancilla is None:
        ancilla = projector(KET0) if name == "u_eg" else projector(KET1)
    return channel_from_dilation(u, ancilla, tol)
