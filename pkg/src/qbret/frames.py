"""Frames and dual frames defining quasiprobability representations.

A frame is a set of d^2 Hermitian operators {F_j} summing to the identity
with Tr F_j = 1/d; its dual {G_j} satisfies Tr[F_j G_k] = delta_jk and the
sum-trace reconstruction property.  Built-in constructors cover the
discrete-Wigner qubit frame (and tensor powers of it) and the canonical
SIC-POVM tetrahedron; anything else enters through `load_frame`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ComplexResidue, NotNQPR, ParseError, ValidationFailed
from .matcore import DEFAULT_TOL, EYE2, PAULI_X, PAULI_Y, PAULI_Z, dagger, max_abs

KIND_NQ = "nq"
KIND_SP = "sp"
KIND_CUSTOM = "custom"
KNOWN_KINDS = (KIND_NQ, KIND_SP, KIND_CUSTOM)


@dataclass(eq=False)
class Frame:
    """d^2 Hermitian frame operators, stacked as an (n, d, d) array.

    Tuple labels are kept for display; all matrix indexing uses their
    flattened order 0..d^2-1.
    """

    name: str
    d: int
    labels: tuple
    ops: np.ndarray
    kind: str = KIND_CUSTOM
    c: float | None = None  # dual scaling G = c F for the NQPR kind

    def __post_init__(self):
        self.ops = np.asarray(self.ops, dtype=complex)
        self.labels = tuple(self.labels)

    @property
    def n(self) -> int:
        return self.d * self.d


@dataclass(eq=False)
class DualFrame:
    name: str
    ops: np.ndarray

    def __post_init__(self):
        self.ops = np.asarray(self.ops, dtype=complex)


@dataclass(frozen=True)
class FrameReport:
    """Max violation per frame invariant; `passed` is the overall verdict."""

    checks: dict
    tol: float

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.checks.values())

    def worst(self) -> tuple[str, float]:
        name = max(self.checks, key=self.checks.get)
        return name, self.checks[name]


def build_dw_qubit() -> tuple[Frame, DualFrame]:
    """Discrete-Wigner qubit frame, phase-point labels (r,s) in row-major
    order (0,0),(0,1),(1,0),(1,1); the dual is G = 2F."""
    labels = ((0, 0), (0, 1), (1, 0), (1, 1))
    ops = np.array([
        (EYE2 + (-1) ** r * PAULI_X + (-1) ** s * PAULI_Z
         + (-1) ** (r + s) * PAULI_Y) / 4
        for (r, s) in labels])
    frame = Frame(name="dw-qubit", d=2, labels=labels, ops=ops,
                  kind=KIND_NQ, c=2.0)
    dual = DualFrame(name="dw-qubit", ops=2 * ops)
    return frame, dual


def build_sic_qubit() -> tuple[Frame, DualFrame]:
    """Canonical qubit SIC frame (tetrahedron) with dual G = d(d+1)F - 1."""
    axes = ((1, -1, 1), (1, 1, -1), (-1, 1, 1), (-1, -1, -1))
    ops = np.array([
        (EYE2 + (nx * PAULI_X + ny * PAULI_Y + nz * PAULI_Z) / np.sqrt(3)) / 4
        for (nx, ny, nz) in axes])
    frame = Frame(name="sic-qubit", d=2, labels=(0, 1, 2, 3), ops=ops,
                  kind=KIND_SP)
    dual = DualFrame(name="sic-qubit", ops=6 * ops - EYE2[None, :, :])
    return frame, dual


def tensor_frames(parts: list[tuple[Frame, DualFrame]]) -> tuple[Frame, DualFrame]:
    """Tensor-compose NQPR frame pairs; composite labels run lexicographically
    with the last factor fastest.  Only the NQPR kind composes this way."""
    if not parts:
        raise ValueError("need at least one frame pair")
    for f, _ in parts:
        if f.kind != KIND_NQ:
            raise NotNQPR(f"frame {f.name!r} has kind {f.kind!r}; "
                          "only NQPR frames tensor-compose")
    if len(parts) == 1:
        return parts[0]
    ops_f, ops_g, labels = [None], [None], [()]
    for f, g in parts:
        ops_f = [np.kron(a, b) if a is not None else b
                 for a in ops_f for b in f.ops]
        ops_g = [np.kron(a, b) if a is not None else b
                 for a in ops_g for b in g.ops]
        labels = [prev + (lab,) for prev in labels for lab in f.labels]
    d = int(np.prod([f.d for f, _ in parts]))
    c = float(np.prod([f.c for f, _ in parts]))
    name = "*".join(f.name for f, _ in parts)
    frame = Frame(name=name, d=d, labels=tuple(labels),
                  ops=np.array(ops_f), kind=KIND_NQ, c=c)
    return frame, DualFrame(name=name, ops=np.array(ops_g))


def build_dw_qubits(n_qubits: int) -> tuple[Frame, DualFrame]:
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    pair = build_dw_qubit()
    frame, dual = tensor_frames([pair] * n_qubits)
    if n_qubits > 1:
        frame.name = f"dw-qubits:{n_qubits}"
        dual.name = frame.name
    return frame, dual


def _random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + dagger(a)) / 2


def validate_frame(frame: Frame, dual: DualFrame, tol: float = DEFAULT_TOL,
                   n_random: int = 20, seed: int = 0) -> FrameReport:
    """Check every frame/dual invariant and report the max violation each.

    The sum-trace reconstruction property is probed on the pair (1, 1) and
    on `n_random` seeded random Hermitian pairs.
    """
    f, g = frame.ops, dual.ops
    d, n = frame.d, frame.n
    checks = {}
    if f.shape != (n, d, d) or g.shape != (n, d, d):
        raise ValidationFailed("shape", float("inf"), tol)
    checks["hermiticity"] = max(max_abs(f - np.conj(np.transpose(f, (0, 2, 1)))),
                                max_abs(g - np.conj(np.transpose(g, (0, 2, 1)))))
    checks["normalization"] = max_abs(f.sum(axis=0) - np.eye(d))
    checks["frame_trace"] = max_abs(np.einsum("jaa->j", f) - 1.0 / d)
    checks["dual_trace"] = max_abs(np.einsum("jaa->j", g) - 1.0)
    checks["orthogonality"] = max_abs(np.einsum("jab,kba->jk", f, g) - np.eye(n))
    rng = np.random.default_rng(seed)
    pairs = [(np.eye(d, dtype=complex), np.eye(d, dtype=complex))]
    pairs += [(_random_hermitian(rng, d), _random_hermitian(rng, d))
              for _ in range(n_random)]
    worst = 0.0
    for a, b in pairs:
        lhs = np.einsum("jab,jcd,ba,dc->", f, g, a, b)
        rhs = np.trace(a @ b)
        worst = max(worst, abs(lhs - rhs))
    checks["sum_trace"] = float(worst)
    return FrameReport(checks=checks, tol=tol)


# --- file format -----------------------------------------------------------
#
# Frame file (JSON): {"d": int, "kind": "nq"|"sp"|"custom", "c": float|null,
#   "labels": [...], "F": [matrix, ...], "G": [matrix, ...]} where a matrix
# is a row-major list of rows and every complex number is a [re, im] pair.

def encode_complex_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_complex_matrix(data) -> np.ndarray:
    try:
        return np.array([[complex(z[0], z[1]) for z in row] for row in data])
    except (TypeError, IndexError, ValueError) as exc:
        raise ParseError(f"malformed complex matrix: {exc}") from exc


def frame_to_dict(frame: Frame, dual: DualFrame) -> dict:
    return {
        "d": frame.d,
        "kind": frame.kind,
        "c": frame.c,
        "name": frame.name,
        "labels": [list(l) if isinstance(l, tuple) else l for l in frame.labels],
        "F": [encode_complex_matrix(op) for op in frame.ops],
        "G": [encode_complex_matrix(op) for op in dual.ops],
    }


def load_frame(document, tol: float = DEFAULT_TOL) -> tuple[Frame, DualFrame]:
    """Build a validated frame pair from a frame document (dict or JSON text).

    Fails loudly: ParseError for structural problems, ValidationFailed
    naming the first violated invariant otherwise.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ParseError("frame document must be a JSON object")
    try:
        d = int(document["d"])
        kind = document.get("kind", KIND_CUSTOM)
        f_ops = [decode_complex_matrix(m) for m in document["F"]]
        g_ops = [decode_complex_matrix(m) for m in document["G"]]
    except KeyError as exc:
        raise ParseError(f"missing field {exc}") from exc
    if kind not in KNOWN_KINDS:
        raise ParseError(f"unknown kind {kind!r}; expected one of {KNOWN_KINDS}")
    if len(f_ops) != d * d or len(g_ops) != d * d:
        raise ParseError(
            f"expected {d * d} operators for d={d}, got {len(f_ops)} F / {len(g_ops)} G")
    for op in f_ops + g_ops:
        if op.shape != (d, d):
            raise ParseError(f"operator of shape {op.shape}, expected ({d}, {d})")
    labels = document.get("labels")
    labels = (tuple(tuple(l) if isinstance(l, list) else l for l in labels)
              if labels is not None else tuple(range(d * d)))
    c = document.get("c")
    if c is None and kind == KIND_NQ:
        c = float(d)
    frame = Frame(name=document.get("name", "custom"), d=d, labels=labels,
                  ops=np.array(f_ops), kind=kind,
                  c=float(c) if c is not None else None)
    dual = DualFrame(name=frame.name, ops=np.array(g_ops))
    report = validate_frame(frame, dual, tol)
    if not report.passed:
        # name the first violated invariant in a stable order
        order = ("hermiticity", "normalization", "frame_trace", "dual_trace",
                 "orthogonality", "sum_trace")
        check = next(name for name in order if report.checks[name] > tol)
        raise ValidationFailed(check, report.checks[check], tol)
    return frame, dual


# --- structure coefficients -------------------------------------------------

@dataclass(frozen=True)
class StructureCoefficients:
    """Rank-4 tensor xi[p,q,r,s] = Re Tr[F_p G_q G_r G_s] of a frame pair.

    Individual traces are complex in general, but their imaginary parts obey
    conj(xi[p,q,r,s]) = xi[p,s,r,q] and therefore cancel from every
    symmetric contraction sum_{xy} v_x v_y xi[i,x,j,y]; the real part is
    exactly sufficient and is what gets stored.
    """

    xi: np.ndarray
    frame_name: str

    @property
    def n(self) -> int:
        return self.xi.shape[0]


def structure_coeffs(frame: Frame, dual: DualFrame,
                     tol: float = DEFAULT_TOL) -> StructureCoefficients:
    """Compute (and cache on the frame) the structure-coefficient tensor.

    Raises ComplexResidue if the symmetrized imaginary part, the component
    that would survive contraction with real vectors, exceeds tol.
    """
    cached = getattr(frame, "_xi_cache", None)
    if cached is not None:
        return cached
    xi = np.einsum("pab,qbc,rcd,sda->pqrs", frame.ops, dual.ops, dual.ops,
                   dual.ops, optimize=True)
    sym_imag = max_abs((xi.imag + np.transpose(xi.imag, (0, 3, 2, 1))) / 2)
    if sym_imag > tol:
        raise ComplexResidue(
            f"symmetrized imaginary residue {sym_imag:.3e} > tol")
    coeffs = StructureCoefficients(xi=np.ascontiguousarray(xi.real),
                                   frame_name=frame.name)
    frame._xi_cache = coeffs
    return coeffs


def classical_structure_coeffs(n: int) -> StructureCoefficients:
    """Kronecker-delta tensor delta_pq delta_rs delta_pr of the classical
    (diagonal projector) representation on n outcomes."""
    xi = np.zeros((n, n, n, n))
    idx = np.arange(n)
    for p in idx:
        xi[p, p, p, p] = 1.0
    return StructureCoefficients(xi=xi, frame_name=f"classical:{n}")


def classical_projectors(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal projectors |j><j| used as both frame and dual on the
    classical side; their structure coefficients are the delta tensor."""
    ops = np.zeros((n, n, n), dtype=complex)
    for j in range(n):
        ops[j, j, j] = 1.0
    return ops, ops.copy()
