import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from entmap import measures as M
from entmap.errors import NotApplicableError, ValidationError, WrongDimensionsError
from entmap.locc import apply_local_unitary, random_unitary
from entmap.measures import BoundKind, MeasureId, evaluate
from entmap.states import (
    DensityMatrix,
    bell,
    product_pure,
    random_mixed,
    random_pure,
    random_separable,
    schmidt_form,
    tiles_upb_state,
    werner,
)

# h((1 + sqrt(1 - 0.85^2)) / 2) and h(0.9), evaluated with plain math.log2.
EF_WERNER_09 = 0.7893549609887847
H_09 = 0.4689955935892812

SY = np.array([[0, -1j], [1j, 0]])
YY = np.kron(SY, SY)


def wootters_oracle(rho):
    """Concurrence from the non-Hermitian product rho * spin-flipped rho."""
    ev = np.linalg.eigvals(rho @ YY @ rho.conj() @ YY)
    lam = np.sort(np.sqrt(np.abs(ev.real)))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def rel_entropy_oracle(rho, sigma):
    """S(rho||sigma) with scipy.linalg.logm for sigma (full rank) and a spectral rho log rho."""
    value = np.trace(rho @ _safe_logm(rho)) - np.trace(rho @ scipy.linalg.logm(sigma))
    return float(np.real(value)) / math.log(2)


def _safe_logm(rho):
    w, v = np.linalg.eigh(rho)
    lw = np.where(w > 1e-15, np.log(np.clip(w, 1e-300, None)), 0.0)
    return (v * lw) @ v.conj().T


def _bell_diagonal(q):
    return sum(qi * bell(i).density().mat for i, qi in enumerate(q))


def bell_diagonal_grid_oracle(rho, step):
    """Min of S(rho||sigma) over a grid of separable Bell-diagonal sigma (all weights <= 1/2, > 0)."""
    best = math.inf
    grid = np.arange(step, 0.5 + step / 2, step)
    for q0 in grid:
        for q1 in grid:
            for q2 in grid:
                q3 = 1 - q0 - q1 - q2
                if q3 <= 0 or q3 > 0.5 + 1e-12:
                    continue
                best = min(best, rel_entropy_oracle(rho, _bell_diagonal([q0, q1, q2, q3])))
    return best


class TestNegativity:
    def test_product(self, product_rho):
        assert M.negativity(product_rho).value <= 1e-10

    def test_bell(self, bell_rho):
        assert M.negativity(bell_rho).value == pytest.approx(0.5, abs=1e-12)

    def test_werner(self):
        assert M.negativity(werner(1)).value == pytest.approx(0.5, abs=1e-12)
        assert M.negativity(werner(2 / 3)).value == pytest.approx(0.25, abs=1e-12)

    def test_two_formulas_agree(self, mixed_states):
        for rho in mixed_states + [tiles_upb_state()]:
            n = M.negativity(rho)
            assert abs(n.value - n.diagnostics["trace_norm_form"]) <= 1e-10

    def test_invalid_state(self):
        with pytest.raises(ValidationError):
            M.negativity(DensityMatrix(np.diag([0.6, 0.6, -0.1, -0.1]), (2, 2)))


class TestLogNegativity:
    def test_values(self, product_rho, bell_rho):
        assert M.log_negativity(product_rho).value <= 1e-12
        assert M.log_negativity(bell_rho).value == pytest.approx(1.0, abs=1e-12)
        assert M.log_negativity(werner(2 / 3)).value == pytest.approx(0.5849625007211562, abs=1e-12)


class TestConcurrence:
    def test_product(self, product_rho):
        assert M.concurrence(product_rho).value <= 1e-12

    def test_bell(self, bell_rho):
        assert M.concurrence(bell_rho).value == pytest.approx(1.0, abs=1e-12)

    def test_werner_closed_form(self):
        assert M.concurrence(werner(0.9)).value == pytest.approx(0.85, abs=1e-12)
        for p in np.linspace(0, 1, 11):
            assert abs(M.concurrence(werner(p)).value - max(0.0, (3 * p - 1) / 2)) <= 1e-9

    def test_matches_non_hermitian_route(self):
        # the oracle loses accuracy near rank deficiency, so compare on full-rank states
        for s in range(200):
            rho = random_mixed((2, 2), s)
            assert abs(M.concurrence(rho).value - wootters_oracle(rho.mat)) <= 1e-6

    def test_wrong_dimensions(self):
        with pytest.raises(WrongDimensionsError):
            M.concurrence(tiles_upb_state())

    def test_in_unit_interval(self):
        for s in range(200):
            c = M.concurrence(random_mixed((2, 2), s, rank=1 + s % 4)).value
            assert 0.0 <= c <= 1.0


class TestEntanglementOfFormation:
    def test_zero_concurrence(self, product_rho):
        assert M.entanglement_of_formation(product_rho).value == 0.0

    def test_bell(self, bell_rho):
        assert M.entanglement_of_formation(bell_rho).value == pytest.approx(1.0, abs=1e-12)

    def test_werner_09(self):
        assert M.entanglement_of_formation(werner(0.9)).value == pytest.approx(EF_WERNER_09, abs=1e-12)

    def test_monotone_in_concurrence(self):
        cs = np.linspace(0, 1, 501)
        ef = [M.eof_from_concurrence(c) for c in cs]
        assert np.all(np.diff(ef) > 0)

    def test_wrong_dimensions(self):
        with pytest.raises(WrongDimensionsError):
            M.entanglement_of_formation(random_mixed((2, 3), 0))


class TestBinaryEntropy:
    def test_endpoints(self):
        assert M.binary_entropy(0.0) == 0.0
        assert M.binary_entropy(1.0) == 0.0
        assert M.binary_entropy(0.5) == 1.0

    @given(st.floats(0.0, 1.0))
    def test_symmetric_exactly(self, x):
        y = 1.0 - x
        if 1.0 - y == x:
            assert M.binary_entropy(x) == M.binary_entropy(y)

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_concave(self, x, y, t):
        mid = t * x + (1 - t) * y
        assert M.binary_entropy(mid) >= t * M.binary_entropy(x) + (1 - t) * M.binary_entropy(y) - 1e-12


class TestEntropyOfEntanglement:
    def test_product(self):
        assert M.entropy_of_entanglement(product_pure([1, 1j], [0.3, 1])).value <= 1e-12

    def test_bell(self):
        assert M.entropy_of_entanglement(bell(0)).value == pytest.approx(1.0, abs=1e-12)

    def test_schmidt(self):
        assert M.entropy_of_entanglement(schmidt_form([0.9, 0.1])).value == pytest.approx(H_09, abs=1e-12)

    def test_marginals_agree(self):
        for s in range(50):
            e = M.entropy_of_entanglement(random_pure((2, 3), s))
            assert abs(e.value - e.diagnostics["entropy_other_marginal"]) <= 1e-9

    def test_mixed_not_applicable(self, bell_rho):
        with pytest.raises(NotApplicableError):
            M.entropy_of_entanglement(bell_rho)


class TestRelativeEntropy:
    def test_self(self, mixed_states):
        for rho in mixed_states:
            assert abs(M.relative_entropy(rho, rho)) <= 1e-9

    def test_bell_vs_maximally_mixed(self, bell_rho):
        assert M.relative_entropy(bell_rho, DensityMatrix(np.eye(4) / 4, (2, 2))) == pytest.approx(2.0, abs=1e-12)

    def test_support_violation_is_large_and_flagged(self, bell_rho):
        mm = DensityMatrix(np.eye(4) / 4, (2, 2))
        value = M.relative_entropy(mm, bell_rho)
        assert value > 0.5 * -math.log2(1e-12)
        assert M.support_mismatch(mm.mat, bell_rho.mat) == pytest.approx(0.75)

    def test_matches_logm_oracle(self):
        for s in range(20):
            rho, sigma = random_mixed((2, 2), s), random_mixed((2, 2), s + 100)
            assert M.relative_entropy(rho, sigma) == pytest.approx(rel_entropy_oracle(rho.mat, sigma.mat), abs=1e-9)

    def test_non_negative(self):
        for s in range(50):
            assert M.relative_entropy(random_mixed((2, 2), s, rank=1 + s % 4), random_mixed((2, 2), s + 7)) >= -1e-9


class TestAnsatzGradient:
    @pytest.mark.parametrize("dims,seed", [((2, 2), 0), ((2, 2), 1), ((2, 3), 2)])
    def test_matches_finite_differences(self, dims, seed):
        rho = random_mixed(dims, seed)
        # enough terms for a full-rank sigma, so the eigenvalue floor stays inactive
        obj = M._AnsatzObjective(rho, 2 * dims[0] * dims[1])
        x = obj.random_start(np.random.default_rng(seed))
        _, grad = obj(x)
        h = 1e-6
        fd = np.array([(obj(x + h * e)[0] - obj(x - h * e)[0]) / (2 * h) for e in np.eye(x.size)])
        assert np.max(np.abs(fd - grad)) <= 1e-6 * max(1.0, np.max(np.abs(grad)))

    def test_objective_is_relative_entropy(self):
        rho = random_mixed((2, 2), 3)
        obj = M._AnsatzObjective(rho, 4)
        x = obj.random_start(np.random.default_rng(0))
        assert obj(x)[0] == pytest.approx(M.relative_entropy(rho, obj.ansatz(x).density()), abs=1e-10)


class TestRelativeEntropyOfEntanglement:
    def test_product_state(self, product_rho):
        value, ansatz = M.relative_entropy_of_entanglement(product_rho)
        assert value.bound_kind is BoundKind.UPPER_BOUND
        assert value.value <= 1e-4
        assert ansatz.n_terms == 16

    def test_bell_against_grid_oracle(self, bell_rho):
        oracle = bell_diagonal_grid_oracle(bell_rho.mat, 0.05)
        assert oracle == pytest.approx(1.0, abs=1e-9)
        value, ansatz = M.relative_entropy_of_entanglement(bell_rho)
        assert 0.99 <= value.value <= 1.01
        sigma = ansatz.density()
        assert np.sum(sigma.mat.diagonal().real) == pytest.approx(1.0)

    def test_werner_half_against_grid_oracle(self):
        rho = werner(0.5)
        oracle = bell_diagonal_grid_oracle(rho.mat, 0.025)
        value, _ = M.relative_entropy_of_entanglement(rho)
        assert value.value <= oracle + 1e-9
        assert value.value >= oracle - 5e-3

    def test_singlet_local_unitary_equivalent(self, bell_rho, singlet):
        a = M.relative_entropy_of_entanglement(bell_rho)[0].value
        b = M.relative_entropy_of_entanglement(singlet)[0].value
        assert abs(a - b) <= 1e-3

    def test_deterministic_given_seed(self):
        rho = random_mixed((2, 2), 4, rank=2)
        a = M.relative_entropy_of_entanglement(rho, seed=3)[0].value
        b = M.relative_entropy_of_entanglement(rho, seed=3)[0].value
        assert a == b

    def test_diagnostics(self):
        value, _ = M.relative_entropy_of_entanglement(werner(0.8), restarts=2)
        d = value.diagnostics
        assert d["restarts"] == 2 and d["iterations"] > 0 and not d["optimizer_failure"]

    def test_local_unitary_invariance(self):
        for s in range(5):
            rho = random_mixed((2, 2), s, rank=2)
            rot = apply_local_unitary(rho, random_unitary(2, (s, 0)), random_unitary(2, (s, 1)))
            a = M.relative_entropy_of_entanglement(rho)[0].value
            b = M.relative_entropy_of_entanglement(rot)[0].value
            assert abs(a - b) <= 1e-3


class TestEvaluate:
    def test_negativity_bell(self, bell_rho):
        assert evaluate("En", bell_rho).value == pytest.approx(0.5)

    def test_pure_input_accepted(self):
        assert evaluate(MeasureId.CONCURRENCE, bell(0)).value == pytest.approx(1.0)

    def test_eof_not_applicable_3x3(self):
        with pytest.raises(NotApplicableError):
            evaluate(MeasureId.ENTANGLEMENT_OF_FORMATION, tiles_upb_state())

    def test_ree_product(self, product_rho):
        v = evaluate("Er", product_rho)
        assert v.value <= 1e-4 and v.bound_kind is BoundKind.UPPER_BOUND

    @pytest.mark.parametrize("name", ["negativity", "En", "NEGATIVITY", "log-negativity", "eof", "ree"])
    def test_parse_aliases(self, name):
        assert isinstance(MeasureId.parse(name), MeasureId)

    def test_parse_unknown(self):
        with pytest.raises(ValueError):
            MeasureId.parse("fidelity")


class TestProperties:
    def test_separable_mixtures_vanish(self):
        for s in range(100):
            rho, _ = random_separable((2, 2), s)
            for m in ("En", "logEn", "C", "Ef"):
                assert evaluate(m, rho).value <= 1e-9

    def test_tiles_ppt_but_realignment_entangled(self):
        from entmap import linalg

        rho = tiles_upb_state()
        assert M.negativity(rho).value <= 1e-10
        assert linalg.singular_value_sum(linalg.realign(rho.mat, rho.dims)) > 1

    def test_pure_state_coincidence(self):
        for s in range(300):
            psi = random_pure((2, 2), s)
            ef = M.entanglement_of_formation(psi).value
            assert abs(ef - M.entropy_of_entanglement(psi).value) <= 1e-8
            assert abs(M.negativity(psi).value - M.concurrence(psi).value / 2) <= 1e-9

    def test_negativity_bounded_by_concurrence(self):
        for s in range(10_000):
            rho = random_mixed((2, 2), (11, s), rank=1 + s % 4)
            assert 2 * M.negativity(rho).value <= M.concurrence(rho).value + 1e-9
