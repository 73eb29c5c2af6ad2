"""Bipartite pure and mixed states: construction, validation, sampling, I/O.

Random sampling uses ``numpy.random.Generator`` on the PCG64 bit generator.
Seeds are either an int or a tuple of ints; tuples are fed to
``numpy.random.SeedSequence`` so that sample ``i`` of an ensemble seeded
with ``s`` is reproducible from the pair ``(s, i)`` alone.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import linalg
from .errors import DimensionMismatchError, OutOfRangeError, ParseError, ValidationError

STATE_TOL = 1e-10
PURE_NORM_TOL = 1e-12


def make_rng(seed):
    """PCG64 generator for an int seed or a tuple of ints."""
    if isinstance(seed, (tuple, list)):
        seed = [int(s) for s in seed]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def _dims(dims):
    da, db = (int(d) for d in dims)
    if da < 1 or db < 1:
        raise DimensionMismatchError(f"subsystem dimensions must be positive, got {dims}")
    return da, db


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Bipartite mixed state on C^dA (x) C^dB."""

    mat: np.ndarray
    dims: tuple

    def __post_init__(self):
        mat = linalg.as_cmatrix(self.mat)
        da, db = _dims(self.dims)
        if mat.shape != (da * db, da * db):
            raise DimensionMismatchError(
                f"matrix of shape {mat.shape} does not match dims ({da}, {db})"
            )
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dims", (da, db))

    @property
    def dim(self):
        return self.dims[0] * self.dims[1]

    def purity(self):
        return float(np.real(np.trace(self.mat @ self.mat)))


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized bipartite state vector."""

    vec: np.ndarray
    dims: tuple

    def __post_init__(self):
        vec = np.asarray(self.vec, dtype=complex).reshape(-1)
        da, db = _dims(self.dims)
        if vec.shape[0] != da * db:
            raise DimensionMismatchError(f"vector of length {vec.shape[0]} does not match dims ({da}, {db})")
        object.__setattr__(self, "vec", vec)
        object.__setattr__(self, "dims", (da, db))

    def density(self):
        return DensityMatrix(np.outer(self.vec, self.vec.conj()), self.dims)

    def coefficient_matrix(self):
        """The ``dA x dB`` matrix ``psi[a, b]`` of amplitudes."""
        return self.vec.reshape(self.dims)


def as_density(state):
    if isinstance(state, PureState):
        return state.density()
    if isinstance(state, DensityMatrix):
        return state
    raise TypeError(f"expected a PureState or DensityMatrix, got {type(state).__name__}")


@dataclass
class ValidationReport:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    kind: str = "mixed"
    norm_defect: float = 0.0
    problems: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.problems

    def as_dict(self):
        return {
            "kind": self.kind,
            "passed": self.passed,
            "hermiticity_defect": self.hermiticity_defect,
            "trace_defect": self.trace_defect,
            "min_eigenvalue": self.min_eigenvalue,
            "norm_defect": self.norm_defect,
            "problems": list(self.problems),
        }


def validate(state, tol=STATE_TOL):
    """Check a state against the density-matrix (or unit-norm) invariants.

    Never raises for bad numerical content; the returned report lists every
    violated condition.
    """
    if isinstance(state, PureState):
        norm_defect = abs(float(np.linalg.norm(state.vec)) - 1.0)
        problems = []
        if not np.all(np.isfinite(state.vec)):
            problems.append("non-finite amplitudes")
        elif norm_defect > PURE_NORM_TOL:
            problems.append(f"norm defect {norm_defect:.3e} exceeds {PURE_NORM_TOL:.0e}")
        return ValidationReport(0.0, 0.0, 0.0, kind="pure", norm_defect=norm_defect, problems=problems)

    m = state.mat
    if not np.all(np.isfinite(m)):
        return ValidationReport(math.inf, math.inf, -math.inf, problems=["non-finite entries"])
    herm = linalg.hermiticity_defect(m)
    trace_defect = abs(complex(np.trace(m)) - 1.0)
    min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
    problems = []
    if herm > tol:
        problems.append(f"hermiticity defect {herm:.3e} exceeds {tol:.0e}")
    if trace_defect > tol:
        problems.append(f"trace defect {trace_defect:.3e} exceeds {tol:.0e}")
    if min_eig < -tol:
        problems.append(f"minimum eigenvalue {min_eig:.3e} below {-tol:.0e}")
    return ValidationReport(herm, trace_defect, min_eig, problems=problems)


def require_valid(state):
    report = validate(state)
    if not report.passed:
        raise ValidationError("invalid state: " + "; ".join(report.problems), report)
    return state


# --------------------------------------------------------------------------- #
# Named families
# --------------------------------------------------------------------------- #

_BELL_VECTORS = (
    np.array([1, 0, 0, 1]) / math.sqrt(2),   # Phi+
    np.array([1, 0, 0, -1]) / math.sqrt(2),  # Phi-
    np.array([0, 1, 1, 0]) / math.sqrt(2),   # Psi+
    np.array([0, 1, -1, 0]) / math.sqrt(2),  # Psi-
)


def bell(k=0):
    """Bell vector ``k``: 0 = Phi+, 1 = Phi-, 2 = Psi+, 3 = Psi-."""
    if k not in range(4):
        raise OutOfRangeError(f"Bell index must be 0..3, got {k}")
    return PureState(_BELL_VECTORS[k], (2, 2))


def werner(p):
    """``p |Psi-><Psi-| + (1 - p) I/4``; separable iff ``p <= 1/3``."""
    if not 0.0 <= p <= 1.0:
        raise OutOfRangeError(f"Werner parameter must lie in [0, 1], got {p}")
    singlet = bell(3).density().mat
    return DensityMatrix(p * singlet + (1.0 - p) * np.eye(4) / 4.0, (2, 2))


def product_pure(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return PureState(np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b)), (a.size, b.size))


def product_mixed(rho_a, rho_b):
    rho_a = linalg.as_cmatrix(rho_a)
    rho_b = linalg.as_cmatrix(rho_b)
    return DensityMatrix(np.kron(rho_a, rho_b), (rho_a.shape[0], rho_b.shape[0]))


def schmidt_form(coefficients, dims=None):
    """Pure state ``sum_i sqrt(c_i) |i>|i>`` for a probability vector ``c``."""
    c = np.asarray(coefficients, dtype=float)
    n = c.size
    da, db = dims if dims is not None else (n, n)
    if n > min(da, db):
        raise DimensionMismatchError(f"{n} Schmidt coefficients do not fit dims ({da}, {db})")
    vec = np.zeros(da * db, dtype=complex)
    for i, ci in enumerate(c):
        vec[i * db + i] = math.sqrt(ci)
    return PureState(vec / np.linalg.norm(vec), (da, db))


def tiles_upb_state():
    """3x3 bound entangled state built from the five-vector "tiles" UPB."""
    e = np.eye(3)
    s2 = math.sqrt(2.0)
    uniform = (e[0] + e[1] + e[2]) / math.sqrt(3.0)
    upb = [
        np.kron(e[0], (e[0] - e[1]) / s2),
        np.kron(e[2], (e[1] - e[2]) / s2),
        np.kron((e[0] - e[1]) / s2, e[2]),
        np.kron((e[1] - e[2]) / s2, e[0]),
        np.kron(uniform, uniform),
    ]
    proj = sum(np.outer(v, v.conj()) for v in upb)
    return DensityMatrix((np.eye(9) - proj) / 4.0, (3, 3))


# --------------------------------------------------------------------------- #
# Random ensembles
# --------------------------------------------------------------------------- #

def _ginibre(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_pure(dims, seed):
    """Haar-random pure state: normalized complex Gaussian vector."""
    da, db = _dims(dims)
    rng = make_rng(seed)
    v = _ginibre(rng, da * db, 1)[:, 0]
    return PureState(v / np.linalg.norm(v), (da, db))


def random_mixed(dims, seed, rank=None):
    """Induced-measure state ``G G^H / Tr(G G^H)`` with a ``d x rank`` Ginibre ``G``.

    ``rank`` defaults to ``dA * dB`` (Hilbert-Schmidt measure).
    """
    da, db = _dims(dims)
    d = da * db
    k = d if rank is None else int(rank)
    if not 1 <= k <= d:
        raise OutOfRangeError(f"rank must lie in 1..{d}, got {rank}")
    rng = make_rng(seed)
    g = _ginibre(rng, d, k)
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real, (da, db))


def random_unit_vector(rng, d):
    v = _ginibre(rng, d, 1)[:, 0]
    return v / np.linalg.norm(v)


def random_separable(dims, seed, n_terms=None):
    """Explicit convex mixture of random pure product states.

    Returns the state together with ``(weights, a_vectors, b_vectors)`` so
    callers can check it against its known decomposition.
    """
    da, db = _dims(dims)
    rng = make_rng(seed)
    m = int(n_terms) if n_terms is not None else int(rng.integers(1, da * db + 1))
    weights = rng.dirichlet(np.ones(m))
    avecs = [random_unit_vector(rng, da) for _ in range(m)]
    bvecs = [random_unit_vector(rng, db) for _ in range(m)]
    rho = np.zeros((da * db, da * db), dtype=complex)
    for w, a, b in zip(weights, avecs, bvecs):
        v = np.kron(a, b)
        rho += w * np.outer(v, v.conj())
    return DensityMatrix(rho, (da, db)), (weights, avecs, bvecs)


# --------------------------------------------------------------------------- #
# State files
# --------------------------------------------------------------------------- #

def state_to_dict(state, label=None):
    if isinstance(state, PureState):
        kind, flat = "pure", state.vec
    else:
        kind, flat = "mixed", state.mat.reshape(-1)
    doc = {
        "dims": list(state.dims),
        "kind": kind,
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }
    if label is not None:
        doc["label"] = label
    return doc


def save_state(state, path, label=None):
    """Write a state file; floats use shortest round-trip repr, so reloads are exact."""
    Path(path).write_text(json.dumps(state_to_dict(state, label), indent=1) + "\n")


def _parse_number(x):
    if isinstance(x, bool):
        raise ParseError(f"expected a number, got {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            return float.fromhex(x) if "0x" in x.lower() else float(x)
        except ValueError:
            pass
    raise ParseError(f"expected a number, got {x!r}")


def state_from_dict(doc):
    """Parse and validate a state document; raises ParseError or ValidationError."""
    if not isinstance(doc, dict):
        raise ParseError("state file must contain a JSON object")
    try:
        dims = tuple(int(d) for d in doc["dims"])
        kind = doc.get("kind", "mixed")
        entries = doc["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"missing or malformed field: {exc}") from exc
    if len(dims) != 2 or min(dims) < 1:
        raise ParseError(f"dims must be two positive integers, got {doc['dims']!r}")
    if kind not in ("mixed", "pure"):
        raise ParseError(f"kind must be 'mixed' or 'pure', got {kind!r}")
    if not isinstance(entries, list):
        raise ParseError("entries must be a list of [re, im] pairs")
    values = []
    for pair in entries:
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ParseError(f"entry {pair!r} is not an [re, im] pair")
        values.append(complex(_parse_number(pair[0]), _parse_number(pair[1])))
    d = dims[0] * dims[1]
    expected = d if kind == "pure" else d * d
    if len(values) != expected:
        raise ParseError(f"{kind} state with dims {dims} needs {expected} entries, got {len(values)}")
    arr = np.array(values, dtype=complex)
    state = PureState(arr, dims) if kind == "pure" else DensityMatrix(arr.reshape(d, d), dims)
    return require_valid(state)


def load_state(path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from exc
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc})") from exc
    return state_from_dict(doc)
