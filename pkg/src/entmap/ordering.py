"""Ordering of states under two entanglement measures.

Two measures order a pair of states the same way when the differences
``E_A(rho_i) - E_A(rho_j)`` and ``E_B(rho_i) - E_B(rho_j)`` have the same
sign.  A pair where the signs differ (beyond a tie tolerance) is
*discordant*: since every monotone must decrease under LOCC, neither state
of a discordant pair can be turned into the other with unit efficiency.
"""

import enum
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionMismatchError, NotApplicableError, OutOfRangeError
from .measures import MeasureId, REEOptions, evaluate, is_applicable
from .states import PureState, make_rng, random_mixed, random_pure, require_valid

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
MAJORIZATION_TOL = 1e-9
ROBUSTNESS_FACTOR = 10.0
DEFAULT_MAX_PAIRS = 500_000


class Verdict(enum.Enum):
    CONCORDANT = "Concordant"
    DISCORDANT = "Discordant"
    TIED = "Tied"


@dataclass(frozen=True)
class OrderingVerdict:
    verdict: Verdict
    deltas: tuple
    tol: tuple


def default_tolerance(measure, ree_tol=REEOptions.tol):
    if MeasureId.parse(measure) is MeasureId.RELATIVE_ENTROPY_OF_ENTANGLEMENT:
        return max(DEFAULT_TOL, 10.0 * ree_tol)
    return DEFAULT_TOL


def _tol_pair(tol, id_a, id_b):
    if tol is None:
        return default_tolerance(id_a), default_tolerance(id_b)
    if np.ndim(tol) == 0:
        tol = float(tol)
        if tol <= 0.0:
            raise OutOfRangeError(f"tie tolerance must be positive, got {tol}")
        return tol, tol
    ta, tb = (float(t) for t in tol)
    if ta <= 0.0 or tb <= 0.0:
        raise OutOfRangeError(f"tie tolerances must be positive, got {tol}")
    return ta, tb


def classify(delta_a, delta_b, tol):
    """Verdict for a pair with measure differences ``delta_a``, ``delta_b``."""
    ta, tb = (tol, tol) if np.ndim(tol) == 0 else tol
    if abs(delta_a) <= ta or abs(delta_b) <= tb:
        verdict = Verdict.TIED
    elif (delta_a > 0) == (delta_b > 0):
        verdict = Verdict.CONCORDANT
    else:
        verdict = Verdict.DISCORDANT
    return OrderingVerdict(verdict, (float(delta_a), float(delta_b)), (float(ta), float(tb)))


def compare(rho_i, rho_j, id_a, id_b, tol=None, ree_options=None):
    id_a, id_b = MeasureId.parse(id_a), MeasureId.parse(id_b)
    for m in (id_a, id_b):
        for s in (rho_i, rho_j):
            if not is_applicable(m, s):
                raise NotApplicableError(f"{m.value} is not applicable to {type(s).__name__} with dims {s.dims}")
    ta, tb = _tol_pair(tol, id_a, id_b)
    ea_i = evaluate(id_a, rho_i, ree_options).value
    ea_j = evaluate(id_a, rho_j, ree_options).value
    eb_i = evaluate(id_b, rho_i, ree_options).value
    eb_j = evaluate(id_b, rho_j, ree_options).value
    return classify(ea_i - ea_j, eb_i - eb_j, (ta, tb))


# --------------------------------------------------------------------------- #
# Ensembles and discordance campaigns
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class Ensemble:
    """Recipe for a reproducible list of random states.

    Sample ``i`` is generated from the seed tuple ``(seed, i)``.  ``rank`` is
    an int, ``None`` (full rank) or an inclusive ``(lo, hi)`` range that is
    cycled through by sample index.  ``identical=True`` makes every sample a
    copy of sample 0.
    """

    dims: tuple = (2, 2)
    kind: str = "mixed"
    rank: object = None
    count: int = 100
    seed: int = 0
    identical: bool = False

    def rank_of(self, index):
        if self.rank is None or np.ndim(self.rank) == 0:
            return self.rank
        lo, hi = (int(r) for r in self.rank)
        return lo + index % (hi - lo + 1)

    def fingerprint(self, index):
        source = 0 if self.identical else int(index)
        fp = {"kind": self.kind, "dims": list(self.dims), "seed": int(self.seed), "index": source}
        if self.kind == "mixed":
            fp["rank"] = self.rank_of(source)
        return fp

    def state(self, index):
        return state_from_fingerprint(self.fingerprint(index))

    def as_dict(self):
        rank = self.rank if self.rank is None or np.ndim(self.rank) == 0 else list(self.rank)
        return {"dims": list(self.dims), "kind": self.kind, "rank": rank, "count": self.count,
                "seed": self.seed, "identical": self.identical}


def state_from_fingerprint(fp):
    dims = tuple(fp["dims"])
    seed = (int(fp["seed"]), int(fp["index"]))
    if fp["kind"] == "pure":
        return random_pure(dims, seed)
    if fp["kind"] == "mixed":
        return random_mixed(dims, seed, rank=fp.get("rank"))
    raise ValueError(f"unknown ensemble kind {fp['kind']!r}")


def _evaluate_chunk(args):
    ensemble, indices, ids, ree_options = args
    out = []
    for i in indices:
        state = ensemble.state(i)
        out.append((i, [evaluate(m, state, ree_options).value for m in ids]))
    return out


def evaluate_ensemble(ensemble, ids, workers=1, ree_options=None):
    """Array of shape ``(count, len(ids))`` of measure values, row ``i`` for sample ``i``.

    Work is split by sample index; the merge is by index, so the result does
    not depend on ``workers``.
    """
    ids = [MeasureId.parse(m) for m in ids]
    count = int(ensemble.count)
    values = np.zeros((count, len(ids)))
    probe = ensemble.state(0)
    for m in ids:
        if not is_applicable(m, probe):
            raise NotApplicableError(f"{m.value} is not applicable to {ensemble.kind} states with dims {tuple(ensemble.dims)}")
    if count == 0:
        return values
    chunks = [list(range(start, count, max(1, workers))) for start in range(max(1, workers))]
    jobs = [(ensemble, c, ids, ree_options) for c in chunks if c]
    if workers <= 1:
        results = [_evaluate_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_chunk, jobs))
    for chunk in results:
        for i, row in chunk:
            values[i] = row
    return values


@dataclass
class DiscordanceRecord:
    first: dict
    second: dict
    values_first: tuple   # (E_A, E_B) of the first state
    values_second: tuple
    verdict: Verdict
    robust: bool
    pair_index: int

    def satisfies_witness(self):
        """The literal reversed-order predicate on the stored values."""
        (a1, b1), (a2, b2) = self.values_first, self.values_second
        return (a1 > a2 and b1 < b2) or (a1 < a2 and b1 > b2)

    def as_dict(self):
        return {
            "pair_index": self.pair_index,
            "first": self.first,
            "second": self.second,
            "values_first": list(self.values_first),
            "values_second": list(self.values_second),
            "verdict": self.verdict.value,
            "robust": self.robust,
        }


@dataclass
class CampaignResult:
    measures: tuple
    tol: tuple
    ensemble: Ensemble
    values: np.ndarray
    records: list
    stats: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "measures": [m.value for m in self.measures],
            "tol": list(self.tol),
            "ensemble": self.ensemble.as_dict(),
            "stats": self.stats,
            "records": [r.as_dict() for r in self.records],
        }


def pair_from_index(k, n):
    """Inverse of the lexicographic enumeration of pairs ``(i, j)``, ``i < j < n``."""
    # rows i have n - 1 - i entries; solve for the row containing k
    i = int(n - 2 - math.floor(math.sqrt(-8 * k + 4 * n * (n - 1) - 7) / 2.0 - 0.5))
    j = int(k + i + 1 - n * (n - 1) // 2 + (n - i) * (n - i - 1) // 2)
    return i, j


def _pair_indices(n, max_pairs, seed):
    total = n * (n - 1) // 2
    if total <= max_pairs:
        i, j = np.triu_indices(n, k=1)
        return i, j, np.arange(total), False
    rng = make_rng((int(seed), 2 ** 32 - 1))
    ks = np.sort(rng.choice(total, size=max_pairs, replace=False))
    pairs = np.array([pair_from_index(int(k), n) for k in ks])
    return pairs[:, 0], pairs[:, 1], ks, True


def classify_pairs(values_a, values_b, tol, max_pairs=DEFAULT_MAX_PAIRS, seed=0):
    """Vectorized verdict codes over all (or a sampled subset of) pairs.

    Returns ``(i, j, pair_index, codes, sampled)`` where codes are
    1 = concordant, -1 = discordant, 0 = tied.
    """
    ta, tb = tol
    n = len(values_a)
    i, j, ks, sampled = _pair_indices(n, max_pairs, seed)
    da = values_a[i] - values_a[j]
    db = values_b[i] - values_b[j]
    tied = (np.abs(da) <= ta) | (np.abs(db) <= tb)
    codes = np.where(tied, 0, np.where(np.sign(da) == np.sign(db), 1, -1))
    return i, j, ks, codes, sampled


def find_discordant(ensemble, id_a, id_b, tol=None, workers=1, max_pairs=DEFAULT_MAX_PAIRS,
                    ree_options=None, values=None):
    """Pairwise ordering campaign over an ensemble.

    Every pair is compared unless there are more than ``max_pairs``, in which
    case a seeded uniform sample of pairs is used.  ``kendall_tau`` is
    ``(concordant - discordant) / (concordant + discordant)``, ties excluded.
    """
    id_a, id_b = MeasureId.parse(id_a), MeasureId.parse(id_b)
    if ensemble.count < 2:
        raise OutOfRangeError(f"a campaign needs at least 2 states, got {ensemble.count}")
    ta, tb = _tol_pair(tol, id_a, id_b)
    if values is None:
        values = evaluate_ensemble(ensemble, (id_a, id_b), workers=workers, ree_options=ree_options)
    ea, eb = values[:, 0], values[:, 1]
    i, j, ks, codes, sampled = classify_pairs(ea, eb, (ta, tb), max_pairs, ensemble.seed)

    robust_codes = classify_pairs(ea, eb, (ROBUSTNESS_FACTOR * ta, ROBUSTNESS_FACTOR * tb), max_pairs, ensemble.seed)[3]
    records = []
    for idx in np.flatnonzero(codes == -1):
        a, b = int(i[idx]), int(j[idx])
        records.append(DiscordanceRecord(
            first=ensemble.fingerprint(a),
            second=ensemble.fingerprint(b),
            values_first=(float(ea[a]), float(eb[a])),
            values_second=(float(ea[b]), float(eb[b])),
            verdict=Verdict.DISCORDANT,
            robust=bool(robust_codes[idx] == -1),
            pair_index=int(ks[idx]),
        ))
    n_conc = int(np.sum(codes == 1))
    n_disc = int(np.sum(codes == -1))
    n_tied = int(np.sum(codes == 0))
    checked = int(codes.size)
    stats = {
        "pairs_checked": checked,
        "concordant": n_conc,
        "discordant": n_disc,
        "tied": n_tied,
        "discordant_fraction": n_disc / checked if checked else 0.0,
        "kendall_tau": (n_conc - n_disc) / (n_conc + n_disc) if n_conc + n_disc else None,
        "robust_discordant": sum(r.robust for r in records),
        "sampled_pairs": sampled,
    }
    log.info("campaign %s vs %s: %d pairs, %d discordant", id_a.value, id_b.value, checked, n_disc)
    return CampaignResult((id_a, id_b), (ta, tb), ensemble, values, records, stats)


# --------------------------------------------------------------------------- #
# Pure-state convertibility
# --------------------------------------------------------------------------- #

class Convertibility(enum.Enum):
    FORWARD = "Forward"
    BACKWARD = "Backward"
    BOTH = "Both"
    INCOMPARABLE = "Incomparable"


def schmidt_coefficients(psi):
    """Squared Schmidt coefficients, descending, summing to one."""
    require_valid(psi)
    coeff = psi.coefficient_matrix()
    w = linalg.hermitian_eigvals(coeff @ coeff.conj().T)
    return np.clip(w, 0.0, None)[::-1]


def majorized_by(x, y, tol=MAJORIZATION_TOL):
    """True when probability vector ``x`` is majorized by ``y``."""
    n = max(len(x), len(y))
    xs = np.sort(np.pad(np.asarray(x, float), (0, n - len(x))))[::-1]
    ys = np.sort(np.pad(np.asarray(y, float), (0, n - len(y))))[::-1]
    return bool(np.all(np.cumsum(xs) <= np.cumsum(ys) + tol))


def convertibility_of_spectra(x, y, tol=MAJORIZATION_TOL):
    """LOCC convertibility between pure states with Schmidt spectra ``x`` and ``y``.

    ``Forward`` means the ``x`` state can be turned into the ``y`` state
    deterministically, which holds iff ``x`` is majorized by ``y``.
    """
    fwd = majorized_by(x, y, tol)
    bwd = majorized_by(y, x, tol)
    if fwd and bwd:
        return Convertibility.BOTH
    if fwd:
        return Convertibility.FORWARD
    if bwd:
        return Convertibility.BACKWARD
    return Convertibility.INCOMPARABLE


def pure_locc_convertible(psi, phi, tol=MAJORIZATION_TOL):
    if not isinstance(psi, PureState) or not isinstance(phi, PureState):
        raise TypeError("pure_locc_convertible expects two PureState arguments")
    if psi.dims != phi.dims:
        raise DimensionMismatchError(f"dims {psi.dims} and {phi.dims} differ")
    return convertibility_of_spectra(schmidt_coefficients(psi), schmidt_coefficients(phi), tol)
