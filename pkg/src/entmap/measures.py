"""Entanglement measures for bipartite states.

Conventions: logarithms are base 2, negativity is ``(||rho^T_B||_1 - 1) / 2``
(so a Bell state has negativity 1/2), and log-negativity is
``log2 ||rho^T_B||_1``.  Concurrence and entanglement of formation use the
two-qubit closed forms and reject other dimensions.
"""

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import linalg
from .errors import DimensionMismatchError, NotApplicableError, WrongDimensionsError
from .states import DensityMatrix, PureState, as_density, make_rng, require_valid

log = logging.getLogger(__name__)

CLAMP_TOL = 1e-12
NEGATIVITY_CONVENTION = "negativity: (||ρ^T||₁−1)/2, logs base 2"


class MeasureId(enum.Enum):
    NEGATIVITY = "En"
    LOG_NEGATIVITY = "logEn"
    CONCURRENCE = "C"
    ENTANGLEMENT_OF_FORMATION = "Ef"
    RELATIVE_ENTROPY_OF_ENTANGLEMENT = "Er"
    ENTROPY_OF_ENTANGLEMENT = "E"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip()
        for member in cls:
            if key == member.value or key.upper() == member.name:
                return member
        lowered = key.lower().replace("-", "_")
        for alias, member in _ALIASES.items():
            if lowered == alias:
                return member
        raise ValueError(f"unknown measure {name!r}")

    @property
    def is_exact(self):
        return self is not MeasureId.RELATIVE_ENTROPY_OF_ENTANGLEMENT


_ALIASES = {
    "negativity": MeasureId.NEGATIVITY,
    "log_negativity": MeasureId.LOG_NEGATIVITY,
    "concurrence": MeasureId.CONCURRENCE,
    "eof": MeasureId.ENTANGLEMENT_OF_FORMATION,
    "entanglement_of_formation": MeasureId.ENTANGLEMENT_OF_FORMATION,
    "ree": MeasureId.RELATIVE_ENTROPY_OF_ENTANGLEMENT,
    "relative_entropy_of_entanglement": MeasureId.RELATIVE_ENTROPY_OF_ENTANGLEMENT,
    "entropy_of_entanglement": MeasureId.ENTROPY_OF_ENTANGLEMENT,
}


class BoundKind(enum.Enum):
    EXACT = "Exact"
    UPPER_BOUND = "UpperBound"


@dataclass
class MeasureValue:
    id: MeasureId
    value: float
    bound_kind: BoundKind = BoundKind.EXACT
    diagnostics: dict = field(default_factory=dict)

    def __float__(self):
        return self.value


def _clamp(x):
    x = float(x)
    if -CLAMP_TOL <= x <= 0.0:
        return 0.0
    return x


def _two_qubit(rho):
    if rho.dims != (2, 2):
        raise WrongDimensionsError(f"closed form needs dims (2, 2), got {rho.dims}")


# --------------------------------------------------------------------------- #
# Exact measures
# --------------------------------------------------------------------------- #

def partial_transpose_spectrum(rho):
    rho = as_density(rho)
    return linalg.hermitian_eigvals(linalg.partial_transpose(rho.mat, rho.dims, "B"))


def negativity(rho):
    rho = require_valid(as_density(rho))
    w = partial_transpose_spectrum(rho)
    from_norm = (float(np.sum(np.abs(w))) - 1.0) / 2.0
    from_negatives = float(-np.sum(w[w < 0.0]))
    return MeasureValue(
        MeasureId.NEGATIVITY,
        _clamp(from_negatives),
        diagnostics={"trace_norm_form": from_norm, "min_pt_eigenvalue": float(w[0])},
    )


def log_negativity(rho):
    n = negativity(rho)
    return MeasureValue(MeasureId.LOG_NEGATIVITY, _clamp(math.log2(2.0 * n.value + 1.0)), diagnostics=n.diagnostics)


_SIGMA_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


RANK_CUTOFF = 1e-14


def concurrence_lambdas(rho):
    """Descending square roots of the spectrum of ``rho (sy x sy) rho* (sy x sy)``.

    They equal the singular values of ``X^T (sy x sy) X`` for any factor
    ``rho = X X^H``.  ``X`` is built from the eigenpairs of ``rho`` with
    eigenvalues below ``RANK_CUTOFF`` dropped; taking square roots of the
    round-off eigenvalues of ``rho rho~`` instead would turn 1e-16 noise into
    1e-8 errors on rank-deficient states.
    """
    w, v = linalg.hermitian_eig(rho.mat)
    keep = w > RANK_CUTOFF
    x = v[:, keep] * np.sqrt(w[keep])[None, :]
    s = np.linalg.svd(x.T @ _SIGMA_YY @ x, compute_uv=False) if x.shape[1] else np.zeros(0)
    lam = np.zeros(4)
    lam[:s.size] = s
    return np.sort(lam)[::-1]


def concurrence(rho):
    rho = as_density(rho)
    _two_qubit(rho)
    require_valid(rho)
    lam = concurrence_lambdas(rho)
    c = max(0.0, lam[0] - lam[1] - lam[2] - lam[3])
    return MeasureValue(MeasureId.CONCURRENCE, min(_clamp(c), 1.0))


def binary_entropy(x):
    """``h(x)`` in bits with ``h(0) = h(1) = 0``; symmetric in ``x <-> 1 - x``."""
    p = min(x, 1.0 - x)
    if p <= 0.0:
        return 0.0
    q = 1.0 - p
    return -(p * math.log2(p) + q * math.log2(q))


def eof_from_concurrence(c):
    c = min(max(c, 0.0), 1.0)
    return binary_entropy((1.0 + math.sqrt(max(0.0, 1.0 - c * c))) / 2.0)


def entanglement_of_formation(rho):
    rho = as_density(rho)
    _two_qubit(rho)
    c = concurrence(rho).value
    return MeasureValue(MeasureId.ENTANGLEMENT_OF_FORMATION, _clamp(eof_from_concurrence(c)), diagnostics={"concurrence": c})


def von_neumann_entropy(m):
    w = linalg.hermitian_eigvals(m)
    w = w[w > 0.0]
    return float(-np.sum(w * np.log2(w)))


def entropy_of_entanglement(psi):
    if not isinstance(psi, PureState):
        raise NotApplicableError("entropy of entanglement is defined for pure states only")
    require_valid(psi)
    coeff = psi.coefficient_matrix()
    ra = coeff @ coeff.conj().T
    rb = coeff.T @ coeff.conj()
    sa, sb = von_neumann_entropy(ra), von_neumann_entropy(rb)
    return MeasureValue(MeasureId.ENTROPY_OF_ENTANGLEMENT, _clamp(sa), diagnostics={"entropy_other_marginal": sb})


# --------------------------------------------------------------------------- #
# Relative entropy and its separable minimization
# --------------------------------------------------------------------------- #

def _entropy_term(rho_mat):
    """``Tr[rho log2 rho]`` (non-positive)."""
    w = np.linalg.eigvalsh(rho_mat)
    w = w[w > 0.0]
    return float(np.sum(w * np.log2(w)))


def support_mismatch(rho, sigma, eps=linalg.EPS_LOG):
    """Weight of ``rho`` on the floored (near-null) eigenspace of ``sigma``."""
    w, v = np.linalg.eigh(sigma)
    null = v[:, w <= eps]
    if null.shape[1] == 0:
        return 0.0
    return float(np.real(np.trace(null.conj().T @ rho @ null)))


def relative_entropy(rho, sigma):
    """``S(rho || sigma)`` in bits with the ``EPS_LOG`` eigenvalue floor on ``sigma``.

    When ``rho`` has support outside ``sigma`` the floor turns the divergence
    into a large finite value; :func:`support_mismatch` reports that case.
    """
    rho, sigma = as_density(rho), as_density(sigma)
    if rho.dims != sigma.dims:
        raise DimensionMismatchError(f"dims {rho.dims} and {sigma.dims} differ")
    cross = np.real(np.trace(rho.mat @ linalg.matrix_log2(sigma.mat)))
    return _entropy_term(rho.mat) - float(cross)


@dataclass
class SeparableAnsatz:
    """``sigma = sum_k w_k |a_k><a_k| (x) |b_k><b_k|``."""

    weights: np.ndarray
    a_vectors: np.ndarray  # shape (M, dA)
    b_vectors: np.ndarray  # shape (M, dB)

    @property
    def n_terms(self):
        return len(self.weights)

    @property
    def dims(self):
        return (self.a_vectors.shape[1], self.b_vectors.shape[1])

    def density(self):
        prods = np.einsum("ka,kb->kab", self.a_vectors, self.b_vectors).reshape(self.n_terms, -1)
        mat = np.einsum("k,ki,kj->ij", self.weights, prods, prods.conj())
        return DensityMatrix(0.5 * (mat + mat.conj().T), self.dims)


class _AnsatzObjective:
    """Relative entropy ``S(rho || sigma(x))`` and its gradient in the raw parameters.

    Raw layout: ``M`` weight roots, then real and imaginary parts of the
    ``M x dA`` and ``M x dB`` local vectors (normalized on use).
    """

    def __init__(self, rho, n_terms):
        self.rho = rho.mat
        self.da, self.db = rho.dims
        self.m = n_terms
        self.neg_entropy = _entropy_term(self.rho)
        self.evaluations = 0

    @property
    def size(self):
        return self.m * (1 + 2 * self.da + 2 * self.db)

    def unpack(self, x):
        m, da, db = self.m, self.da, self.db
        roots = x[:m]
        off = m
        ua = x[off:off + m * da] + 1j * x[off + m * da:off + 2 * m * da]
        off += 2 * m * da
        ub = x[off:off + m * db] + 1j * x[off + m * db:off + 2 * m * db]
        return roots, ua.reshape(m, da), ub.reshape(m, db)

    def ansatz(self, x):
        roots, ua, ub = self.unpack(x)
        sq = roots ** 2
        a = ua / np.linalg.norm(ua, axis=1, keepdims=True)
        b = ub / np.linalg.norm(ub, axis=1, keepdims=True)
        return SeparableAnsatz(sq / np.sum(sq), a, b)

    def __call__(self, x):
        self.evaluations += 1
        m, da, db = self.m, self.da, self.db
        roots, ua, ub = self.unpack(x)
        sq = roots ** 2
        total = np.sum(sq)
        na = np.linalg.norm(ua, axis=1)
        nb = np.linalg.norm(ub, axis=1)
        if total <= 0.0 or np.any(na == 0.0) or np.any(nb == 0.0):
            return 1e6, np.zeros_like(x)
        w = sq / total
        a = ua / na[:, None]
        b = ub / nb[:, None]
        prods = (a[:, :, None] * b[:, None, :]).reshape(m, -1)
        sigma = (prods.T * w) @ prods.conj()
        sigma = 0.5 * (sigma + sigma.conj().T)

        lam, vec = np.linalg.eigh(sigma)
        lam = np.maximum(lam, linalg.EPS_LOG)
        log_lam = np.log2(lam)
        rho_eig = vec.conj().T @ self.rho @ vec
        value = self.neg_entropy - float(np.real(np.sum(np.diag(rho_eig) * log_lam)))

        # Frechet derivative of log2 at sigma contracted with rho (divided differences).
        diff = lam[:, None] - lam[None, :]
        same = np.abs(diff) <= 1e-14 * np.maximum(lam[:, None], lam[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            dd = np.where(same, 1.0 / lam[:, None], (log_lam[:, None] - log_lam[None, :]) * math.log(2.0) / diff)
        dd /= math.log(2.0)
        grad_sigma = -(vec @ (dd * rho_eig) @ vec.conj().T)

        # G |a_k b_k> for every term; everything below is a contraction of it
        gp_vec = prods @ grad_sigma.T
        gp = np.real(np.sum(prods.conj() * gp_vec, axis=1))
        g_roots = (2.0 * roots / total) * (gp - np.dot(w, gp))

        gp3 = gp_vec.reshape(m, da, db)
        hxa = w[:, None] * np.sum(gp3 * b.conj()[:, None, :], axis=2)
        hxb = w[:, None] * np.sum(gp3 * a.conj()[:, :, None], axis=1)
        ga = 2.0 * (hxa - a * np.real(np.sum(a.conj() * hxa, axis=1))[:, None]) / na[:, None]
        gb = 2.0 * (hxb - b * np.real(np.sum(b.conj() * hxb, axis=1))[:, None]) / nb[:, None]

        grad = np.concatenate([
            g_roots,
            ga.real.ravel(), ga.imag.ravel(),
            gb.real.ravel(), gb.imag.ravel(),
        ])
        return value, grad

    def random_start(self, rng):
        m, da, db = self.m, self.da, self.db
        roots = np.ones(m) + 0.1 * rng.standard_normal(m)
        return np.concatenate([roots, rng.standard_normal(2 * m * da), rng.standard_normal(2 * m * db)])


@dataclass
class REEOptions:
    n_terms: int = None       # defaults to (dA * dB) ** 2
    restarts: int = 5
    max_iters: int = 2000
    tol: float = 1e-7
    seed: int = 0
    stop_below: float = 1e-9


def relative_entropy_of_entanglement(rho, options=None, **overrides):
    """Upper bound on the relative entropy of entanglement.

    Minimizes ``S(rho || sigma)`` over separable ``sigma`` written as a convex
    combination of ``n_terms`` pure product states, using L-BFGS with an
    analytic gradient from several random starts.  Returns the
    :class:`MeasureValue` (bound kind ``UpperBound``) and the best ansatz.
    """
    opts = options or REEOptions()
    if overrides:
        opts = REEOptions(**{**opts.__dict__, **overrides})
    rho = require_valid(as_density(rho))
    d = rho.dim
    m = opts.n_terms or d * d
    objective = _AnsatzObjective(rho, m)
    rng = make_rng(opts.seed)

    best_value, best_x = math.inf, None
    restart_values = []
    iterations = 0
    converged_any = False
    for _ in range(max(1, opts.restarts)):
        x0 = objective.random_start(rng)
        res = minimize(
            objective, x0, jac=True, method="L-BFGS-B",
            options={"maxiter": opts.max_iters, "ftol": opts.tol * 1e-3, "gtol": 1e-10},
        )
        iterations += int(res.nit)
        restart_values.append(float(res.fun))
        converged_any |= bool(res.success)
        if res.fun < best_value:
            best_value, best_x = float(res.fun), res.x
        if best_value <= opts.stop_below:
            break

    ansatz = objective.ansatz(best_x)
    sigma = ansatz.density()
    value = relative_entropy(rho, sigma)
    mismatch = support_mismatch(rho.mat, sigma.mat)
    diagnostics = {
        "iterations": iterations,
        "restarts": len(restart_values),
        "restart_values": restart_values,
        "best_objective": best_value,
        "evaluations": objective.evaluations,
        "n_terms": m,
        "optimizer_failure": not converged_any,
        "support_mismatch": mismatch,
    }
    if not converged_any:
        log.warning("relative entropy optimizer: no restart reported convergence; returning best found")
    value = MeasureValue(MeasureId.RELATIVE_ENTROPY_OF_ENTANGLEMENT, _clamp(value), BoundKind.UPPER_BOUND, diagnostics)
    return value, ansatz


# --------------------------------------------------------------------------- #
# Dispatch
# --------------------------------------------------------------------------- #

def is_applicable(measure, state):
    measure = MeasureId.parse(measure)
    if measure is MeasureId.ENTROPY_OF_ENTANGLEMENT:
        return isinstance(state, PureState)
    if measure in (MeasureId.CONCURRENCE, MeasureId.ENTANGLEMENT_OF_FORMATION):
        return tuple(state.dims) == (2, 2)
    return isinstance(state, (PureState, DensityMatrix))


def evaluate(measure, state, ree_options=None):
    """Evaluate ``measure`` on ``state``; raises NotApplicableError outside its domain."""
    measure = MeasureId.parse(measure)
    if not is_applicable(measure, state):
        raise NotApplicableError(f"{measure.value} is not applicable to a {type(state).__name__} with dims {state.dims}")
    if measure is MeasureId.NEGATIVITY:
        return negativity(state)
    if measure is MeasureId.LOG_NEGATIVITY:
        return log_negativity(state)
    if measure is MeasureId.CONCURRENCE:
        return concurrence(state)
    if measure is MeasureId.ENTANGLEMENT_OF_FORMATION:
        return entanglement_of_formation(state)
    if measure is MeasureId.ENTROPY_OF_ENTANGLEMENT:
        return entropy_of_entanglement(state)
    return relative_entropy_of_entanglement(state, ree_options)[0]
