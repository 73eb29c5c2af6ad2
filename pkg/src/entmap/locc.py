"""Local operations: unitaries, channels, one-round selective measurements.

These are the primitives for checking that entanglement measures are
invariant under local unitaries and non-increasing under local operations,
and for tracing LOCC trajectories on a two-measure map.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, IncompletePOVMError, NotUnitaryError, OutOfRangeError
from .measures import MeasureId, evaluate
from .states import DensityMatrix, as_density, make_rng

log = logging.getLogger(__name__)

COMPLETENESS_TOL = 1e-10
UNITARY_TOL = 1e-10
DROP_PROBABILITY = 1e-12
MONOTONE_TOL = 1e-9
REE_MONOTONE_BAND = 1e-2


def _ginibre(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def haar_isometry(rng, rows, cols):
    """``rows x cols`` isometry from the QR of a Ginibre matrix (phase-fixed R diagonal)."""
    q, r = np.linalg.qr(_ginibre(rng, rows, cols))
    diag = np.diag(r)
    return q * (diag / np.abs(diag))[None, :]


def random_unitary(d, seed):
    return haar_isometry(make_rng(seed), d, d)


random_local_unitary = random_unitary


def unitary_defect(u):
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))


def apply_local_unitary(rho, u_a, u_b):
    rho = as_density(rho)
    da, db = rho.dims
    u_a, u_b = np.asarray(u_a, dtype=complex), np.asarray(u_b, dtype=complex)
    if u_a.shape != (da, da) or u_b.shape != (db, db):
        raise DimensionMismatchError(f"unitaries {u_a.shape}, {u_b.shape} do not match dims {rho.dims}")
    for u in (u_a, u_b):
        if unitary_defect(u) > UNITARY_TOL:
            raise NotUnitaryError(f"unitary defect {unitary_defect(u):.2e} exceeds {UNITARY_TOL:.0e}")
    u = np.kron(u_a, u_b)
    out = u @ rho.mat @ u.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T), rho.dims)


@dataclass
class KrausChannel:
    """CPTP map on one subsystem given by Kraus operators acting on ``side``."""

    operators: list
    side: str = "A"
    label: str = ""

    def __post_init__(self):
        ops = [np.asarray(k, dtype=complex) for k in self.operators]
        if not ops:
            raise OutOfRangeError("a channel needs at least one Kraus operator")
        d = ops[0].shape[1]
        if any(k.shape != (d, d) for k in ops):
            raise DimensionMismatchError("Kraus operators must all be square with equal size")
        if self.side not in ("A", "B"):
            raise ValueError(f"side must be 'A' or 'B', got {self.side!r}")
        self.operators = ops

    @property
    def dim(self):
        return self.operators[0].shape[1]

    def completeness_defect(self):
        s = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(s - np.eye(self.dim))))

    def lifted(self, dims):
        """Kraus operators embedded as ``K (x) I`` or ``I (x) K`` on the full space."""
        da, db = dims
        if (da if self.side == "A" else db) != self.dim:
            raise DimensionMismatchError(f"channel of dimension {self.dim} cannot act on side {self.side} of dims {dims}")
        if self.side == "A":
            return [np.kron(k, np.eye(db)) for k in self.operators]
        return [np.kron(np.eye(da), k) for k in self.operators]


def random_local_channel(d, n_kraus, seed, side="A"):
    """Channel whose Kraus operators are the ``d x d`` blocks of a Haar ``(n_kraus d) x d`` isometry."""
    if n_kraus < 1:
        raise OutOfRangeError(f"n_kraus must be at least 1, got {n_kraus}")
    v = haar_isometry(make_rng(seed), n_kraus * d, d)
    ops = [v[k * d:(k + 1) * d, :] for k in range(n_kraus)]
    return KrausChannel(ops, side, label=f"random(d={d},n={n_kraus})")


def identity_channel(d, side="A"):
    return KrausChannel([np.eye(d)], side, label="identity")


def depolarizing_channel(d, side="A"):
    """Completely depolarizing channel, Kraus operators ``|i><j| / sqrt(d)``."""
    ops = []
    for i in range(d):
        for j in range(d):
            k = np.zeros((d, d), dtype=complex)
            k[i, j] = 1.0 / np.sqrt(d)
            ops.append(k)
    return KrausChannel(ops, side, label="depolarizing")


def apply_local_channel(rho, channel):
    rho = as_density(rho)
    out = np.zeros_like(rho.mat)
    for k in channel.lifted(rho.dims):
        out += k @ rho.mat @ k.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T), rho.dims)


@dataclass
class Outcome:
    probability: float
    state: DensityMatrix
    index: int


@dataclass
class MeasurementResult:
    outcomes: list
    dropped: list = field(default_factory=list)

    @property
    def probabilities(self):
        return [o.probability for o in self.outcomes]

    def average(self):
        mat = sum(o.probability * o.state.mat for o in self.outcomes)
        return DensityMatrix(mat, self.outcomes[0].state.dims)


def selective_measurement(rho, povm, corrections=None):
    """One-round LOCC: Kraus measurement on ``povm.side``, outcome sent to the other party.

    ``corrections`` optionally gives a unitary per outcome, applied on the
    opposite side.  Outcomes with probability below ``DROP_PROBABILITY`` are
    dropped and the remaining probabilities renormalized.
    """
    rho = as_density(rho)
    if not isinstance(povm, KrausChannel):
        povm = KrausChannel(list(povm), "A")
    defect = povm.completeness_defect()
    if defect > COMPLETENESS_TOL:
        raise IncompletePOVMError(f"completeness defect {defect:.2e} exceeds {COMPLETENESS_TOL:.0e}")
    if corrections is not None and len(corrections) != len(povm.operators):
        raise DimensionMismatchError("need one correction unitary per outcome")
    da, db = rho.dims
    outcomes, dropped = [], []
    for idx, k in enumerate(povm.lifted(rho.dims)):
        branch = k @ rho.mat @ k.conj().T
        p = float(np.real(np.trace(branch)))
        if p < DROP_PROBABILITY:
            dropped.append((idx, p))
            continue
        if corrections is not None and corrections[idx] is not None:
            u = np.asarray(corrections[idx], dtype=complex)
            lift = np.kron(np.eye(da), u) if povm.side == "A" else np.kron(u, np.eye(db))
            branch = lift @ branch @ lift.conj().T
        branch = branch / p
        outcomes.append(Outcome(p, DensityMatrix(0.5 * (branch + branch.conj().T), rho.dims), idx))
    total = sum(o.probability for o in outcomes)
    if dropped:
        log.debug("dropped %d negligible outcomes; renormalizing by %.17g", len(dropped), total)
        for o in outcomes:
            o.probability /= total
    return MeasurementResult(outcomes, dropped)


@dataclass
class TrialResult:
    before: float
    after: float
    violation: float
    measure: MeasureId
    kind: str


def monotonicity_trial(rho, op, measure, ree_options=None):
    """Compare a measure before and after a local operation.

    ``op`` is a :class:`KrausChannel` (deterministic channel) or a
    ``("measure", povm, corrections)`` tuple; for the latter the expected
    value over outcomes is used.
    """
    measure = MeasureId.parse(measure)
    before = evaluate(measure, rho, ree_options).value
    if isinstance(op, KrausChannel):
        after = evaluate(measure, apply_local_channel(rho, op), ree_options).value
        kind = "channel"
    else:
        _, povm, corrections = op
        result = selective_measurement(rho, povm, corrections)
        after = sum(o.probability * evaluate(measure, o.state, ree_options).value for o in result.outcomes)
        kind = "measurement"
    return TrialResult(before, after, max(0.0, after - before), measure, kind)


# --------------------------------------------------------------------------- #
# Trajectories on the two-measure map
# --------------------------------------------------------------------------- #

@dataclass
class MapPoint:
    e_a: float
    e_b: float
    measures: tuple
    fingerprint: str


@dataclass
class Trajectory:
    points: list
    steps: list

    def is_monotone(self, tol=MONOTONE_TOL):
        """Both coordinates non-increasing from one point to the next."""
        return all(
            q.e_a <= p.e_a + tol and q.e_b <= p.e_b + tol
            for p, q in zip(self.points, self.points[1:])
        )

    def max_increase(self):
        inc = [max(q.e_a - p.e_a, q.e_b - p.e_b) for p, q in zip(self.points, self.points[1:])]
        return max(inc, default=0.0)


def _point(rho, ids, fingerprint, ree_options):
    return MapPoint(evaluate(ids[0], rho, ree_options).value, evaluate(ids[1], rho, ree_options).value,
                    tuple(m.value for m in ids), fingerprint)


def trajectory(rho0, steps, id_a, id_b, seed, step_kind="channel", n_kraus=2, ree_options=None):
    """Apply ``steps`` random local operations, alternating sides A, B, A, ...

    In ``channel`` mode each step is a random Kraus channel.  In
    ``measurement-average`` mode each step is a random selective measurement;
    the recorded point is the outcome-averaged ``sum_k p_k (E_A, E_B)(rho_k)``
    and the walk continues from the outcome-averaged state.
    """
    if step_kind not in ("channel", "measurement-average"):
        raise ValueError(f"unknown step kind {step_kind!r}")
    ids = (MeasureId.parse(id_a), MeasureId.parse(id_b))
    rho = as_density(rho0)
    points = [_point(rho, ids, "start", ree_options)]
    descriptors = []
    for step in range(int(steps)):
        side = "A" if step % 2 == 0 else "B"
        d = rho.dims[0] if side == "A" else rho.dims[1]
        step_seed = (int(seed), step)
        ch = random_local_channel(d, n_kraus, step_seed, side)
        desc = f"{step_kind}:{side}:n_kraus={n_kraus}:seed={seed}/{step}"
        if step_kind == "channel":
            rho = apply_local_channel(rho, ch)
            points.append(_point(rho, ids, f"step {step + 1}", ree_options))
        else:
            result = selective_measurement(rho, ch)
            ea = sum(o.probability * evaluate(ids[0], o.state, ree_options).value for o in result.outcomes)
            eb = sum(o.probability * evaluate(ids[1], o.state, ree_options).value for o in result.outcomes)
            points.append(MapPoint(ea, eb, tuple(m.value for m in ids), f"step {step + 1} (expected)"))
            rho = result.average()
        descriptors.append(desc)
    return Trajectory(points, descriptors)
