"""Randomized checks of the three requirements on an entanglement measure.

* vanishing on separable states,
* invariance under local unitaries,
* non-increase (deterministically and on average) under local operations.

Each suite returns :class:`PropertyResult` rows holding the largest
violation seen.  Rows for exact measures are *hard*: any violation above
the threshold fails the run.  The relative entropy of entanglement is only
an optimized upper bound, so apart from the separable check its rows are
logged against a looser band and never fail the run.
"""

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import linalg
from .errors import OutOfRangeError
from .locc import (
    KrausChannel,
    apply_local_channel,
    apply_local_unitary,
    random_local_channel,
    random_unitary,
    selective_measurement,
)
from .measures import MeasureId, REEOptions, evaluate
from .states import make_rng, random_mixed, random_separable, tiles_upb_state

log = logging.getLogger(__name__)

SEPARABLE_TOL = 1e-9
REE_SEPARABLE_TOL = 1e-3
INVARIANCE_TOL = 1e-8
REE_INVARIANCE_BAND = 1e-3
MONOTONE_TOL = 1e-9
REE_MONOTONE_BAND = 1e-2


@dataclass
class MeasureSpec:
    """A state functional under test."""

    name: str
    func: object          # state -> float
    exact: bool = True

    @classmethod
    def builtin(cls, measure, ree_options=None):
        m = MeasureId.parse(measure)
        return cls(m.value, lambda s, _m=m: evaluate(_m, s, ree_options).value, m.is_exact)


def default_measures(ree_options=None):
    return [MeasureSpec.builtin(m, ree_options) for m in ("En", "logEn", "C", "Ef")]


def broken_measure():
    """Deliberately invalid measure (minus the negativity) used as a canary."""
    return MeasureSpec("-En", lambda s: -evaluate(MeasureId.NEGATIVITY, s).value, True)


@dataclass
class PropertyResult:
    measure: str
    property: str
    trials: int
    max_violation: float
    threshold: float
    hard: bool

    @property
    def passed(self):
        return self.max_violation <= self.threshold

    def as_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


@dataclass
class SuiteConfig:
    dims: tuple = (2, 2)
    separable_trials: int = 200
    unitary_trials: int = 200
    local_op_trials: int = 1000
    ree_trials: int = 20
    seed: int = 0
    include_ree: bool = True

    def check(self):
        for name in ("separable_trials", "unitary_trials", "local_op_trials"):
            if getattr(self, name) < 1:
                raise OutOfRangeError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.include_ree and self.ree_trials < 0:
            raise OutOfRangeError(f"ree_trials must be non-negative, got {self.ree_trials}")


def _test_state(dims, seed):
    """Random state whose rank cycles through 1..d so pure and mixed inputs both occur."""
    d = dims[0] * dims[1]
    rank = 1 + int(make_rng(seed).integers(d))
    return random_mixed(dims, seed, rank=rank)


def check_separable(measures, trials, dims=(2, 2), seed=0):
    """Every measure must vanish on explicit mixtures of product states."""
    worst = {m.name: 0.0 for m in measures}
    for t in range(trials):
        rho, _ = random_separable(dims, (seed, 1, t))
        for m in measures:
            worst[m.name] = max(worst[m.name], abs(m.func(rho)))
    return [
        PropertyResult(m.name, "separable", trials, worst[m.name], SEPARABLE_TOL if m.exact else REE_SEPARABLE_TOL, True)
        for m in measures
    ]


def check_unitary_invariance(measures, trials, dims=(2, 2), seed=0):
    """Measures must not change under ``U_A (x) U_B``."""
    worst = {m.name: 0.0 for m in measures}
    for t in range(trials):
        rho = _test_state(dims, (seed, 2, t))
        u_a = random_unitary(dims[0], (seed, 2, t, 0))
        u_b = random_unitary(dims[1], (seed, 2, t, 1))
        rotated = apply_local_unitary(rho, u_a, u_b)
        for m in measures:
            worst[m.name] = max(worst[m.name], abs(m.func(rotated) - m.func(rho)))
    return [
        PropertyResult(m.name, "unitary-invariance", trials, worst[m.name], INVARIANCE_TOL if m.exact else REE_INVARIANCE_BAND, m.exact)
        for m in measures
    ]


def _random_op(dims, seed):
    rng = make_rng(seed)
    side = "A" if rng.integers(2) == 0 else "B"
    d = dims[0] if side == "A" else dims[1]
    n_kraus = 1 + int(rng.integers(4))
    return random_local_channel(d, n_kraus, seed, side)


def check_local_operations(measures, trials, dims=(2, 2), seed=0):
    """Deterministic local channels and averaged selective measurements must not raise a measure."""
    chan = {m.name: 0.0 for m in measures}
    meas = {m.name: 0.0 for m in measures}
    for t in range(trials):
        rho = _test_state(dims, (seed, 3, t))
        channel = _random_op(dims, (seed, 3, t, 0))
        out = apply_local_channel(rho, channel)

        povm = _random_op(dims, (seed, 3, t, 1))
        other = dims[1] if povm.side == "A" else dims[0]
        corrections = [random_unitary(other, (seed, 3, t, 2, k)) for k in range(len(povm.operators))]
        result = selective_measurement(rho, povm, corrections)
        for m in measures:
            before = m.func(rho)
            chan[m.name] = max(chan[m.name], m.func(out) - before)
            expected = sum(o.probability * m.func(o.state) for o in result.outcomes)
            meas[m.name] = max(meas[m.name], expected - before)
    rows = []
    for m in measures:
        threshold = MONOTONE_TOL if m.exact else REE_MONOTONE_BAND
        rows.append(PropertyResult(m.name, "channel-monotone", trials, max(0.0, chan[m.name]), threshold, m.exact))
        rows.append(PropertyResult(m.name, "measurement-monotone", trials, max(0.0, meas[m.name]), threshold, m.exact))
    return rows


def bound_entanglement_exhibit():
    """Negativity and realignment norm of the tiles state (PPT yet entangled)."""
    rho = tiles_upb_state()
    return {
        "negativity": evaluate(MeasureId.NEGATIVITY, rho).value,
        "realignment_norm": linalg.singular_value_sum(linalg.realign(rho.mat, rho.dims)),
    }


@dataclass
class AxiomReport:
    config: SuiteConfig
    results: list = field(default_factory=list)
    exhibit: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def hard_violations(self):
        return [r for r in self.results if r.hard and not r.passed]

    @property
    def passed(self):
        return not self.hard_violations

    def as_dict(self):
        return {
            "config": {**asdict(self.config), "dims": list(self.config.dims)},
            "passed": self.passed,
            "hard_violations": len(self.hard_violations),
            "results": [r.as_dict() for r in self.results],
            "bound_entanglement": self.exhibit,
        }


def verify_axioms(config=None, measures=None, ree_options=None):
    config = config or SuiteConfig()
    config.check()
    measures = list(measures) if measures is not None else default_measures()
    report = AxiomReport(config)
    t0 = time.perf_counter()
    report.results += check_separable(measures, config.separable_trials, config.dims, config.seed)
    report.results += check_unitary_invariance(measures, config.unitary_trials, config.dims, config.seed)
    report.results += check_local_operations(measures, config.local_op_trials, config.dims, config.seed)
    report.timings["exact"] = time.perf_counter() - t0
    if config.include_ree and config.ree_trials > 0:
        t0 = time.perf_counter()
        ree = [MeasureSpec.builtin(MeasureId.RELATIVE_ENTROPY_OF_ENTANGLEMENT, ree_options or REEOptions())]
        report.results += check_separable(ree, config.ree_trials, config.dims, config.seed)
        report.results += check_unitary_invariance(ree, config.ree_trials, config.dims, config.seed)
        report.results += check_local_operations(ree, config.ree_trials, config.dims, config.seed)
        report.timings["ree"] = time.perf_counter() - t0
    report.exhibit = bound_entanglement_exhibit()
    for r in report.results:
        if not r.passed:
            level = logging.ERROR if r.hard else logging.WARNING
            log.log(level, "%s %s: max violation %.3e exceeds %.0e", r.measure, r.property, r.max_violation, r.threshold)
    return report
