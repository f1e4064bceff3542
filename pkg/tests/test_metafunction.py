import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from totalorder.errors import DesignShapeError
from totalorder.estimators import EvaluationSet, first_order_si, jansen_total
from totalorder.metafunction import (
    FunctionId,
    MetafunctionSpec,
    evaluate,
    evaluate_swaps,
    generate_spec,
    pair_table,
    sample_psi,
    triple_table,
    univariate,
)
from totalorder.sampling import sobol_points, swap_columns


def naive_evaluate(spec, m):
    """Term-by-term expansion with plain Python loops."""
    out = []
    for row in m:
        f = [univariate(spec.u[i], float(row[i])) for i in range(spec.k)]
        y = sum(spec.alpha[i] * f[i] for i in range(spec.k))
        y += sum(b * f[i] * f[j] for b, (i, j) in zip(spec.beta, spec.pairs))
        y += sum(c * f[i] * f[j] * f[l] for c, (i, j, l) in zip(spec.gamma, spec.triples))
        out.append(y)
    return np.array(out)


def hand_spec():
    return MetafunctionSpec(
        k=4,
        u=(5, 1, 8, 4),  # linear, cubic, periodic, inverse
        pairs=np.array([[0, 1], [2, 3]]),
        triples=np.array([[0, 2, 3]]),
        alpha=np.array([1.0, -2.0, 0.5, 3.0]),
        beta=np.array([0.25, -1.5]),
        gamma=np.array([2.0]),
    )


class TestUnivariate:
    def test_exponential_at_one(self):
        assert univariate(FunctionId.EXPONENTIAL, 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_periodic_quarter(self):
        assert univariate(FunctionId.PERIODIC, 0.25) == pytest.approx(0.5, abs=1e-15)

    def test_inverse(self):
        assert univariate(FunctionId.INVERSE, 0.9) == pytest.approx(0.11, abs=1e-15)

    def test_named_forms(self):
        x = 0.3
        assert univariate(1, x) == pytest.approx(x**3)
        assert univariate(2, 0.49) == 0.0 and univariate(2, 0.5) == 1.0
        assert univariate(5, x) == x
        assert univariate(6, x) == 0.0
        assert univariate(7, 0.5) == 0.0 and univariate(7, 0.0) == pytest.approx(1.0)
        assert univariate(9, x) == pytest.approx(x**2)
        assert univariate(10, x) == pytest.approx(math.cos(x))

    @pytest.mark.parametrize("f", list(FunctionId))
    def test_finite_on_unit_interval(self, f):
        y = univariate(f, np.linspace(0.0, 1.0, 1001))
        assert np.all(np.isfinite(y))


class TestTables:
    def test_pairs_k4(self):
        assert (pair_table(4) + 1).tolist() == [[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]]

    def test_triples_k4(self):
        t = triple_table(4) + 1
        assert len(t) == 4 and t[0].tolist() == [1, 2, 3]


class TestGenerateSpec:
    def test_interaction_counts(self):
        spec = generate_spec(4, 0.5, 0.1, epsilon_seed=9)
        assert len(spec.pairs) == 3
        assert len(spec.triples) == math.ceil(0.1 * 4) == 1

    @settings(max_examples=40, deadline=None)
    @given(st.integers(3, 40), st.floats(0.3, 0.5), st.floats(0.1, 0.3), st.integers(1, 200))
    def test_structure(self, k, k2, k3, eps):
        spec = generate_spec(k, k2, k3, eps)
        n, m = math.comb(k, 2), math.comb(k, 3)
        assert len(spec.pairs) == len(spec.beta) == math.ceil(k2 * n)
        assert len(spec.triples) == len(spec.gamma) == math.ceil(k3 * m)
        assert len(spec.u) == len(spec.alpha) == k
        assert set(spec.u) <= set(range(1, 11))
        assert len({tuple(p) for p in spec.pairs}) == len(spec.pairs)
        assert len({tuple(t) for t in spec.triples}) == len(spec.triples)
        assert np.all(spec.pairs[:, 0] < spec.pairs[:, 1])
        assert np.all((spec.triples[:, 0] < spec.triples[:, 1]) & (spec.triples[:, 1] < spec.triples[:, 2]))

    def test_deterministic(self):
        assert generate_spec(30, 0.4, 0.2, 17) == generate_spec(30, 0.4, 0.2, 17)
        assert generate_spec(30, 0.4, 0.2, 17) != generate_spec(30, 0.4, 0.2, 18)

    def test_json_roundtrip(self):
        spec = generate_spec(12, 0.35, 0.15, 4)
        back = MetafunctionSpec.from_json(spec.to_json())
        assert back == spec
        m = np.random.default_rng(0).random((10, 12))
        assert np.array_equal(evaluate(back, m), evaluate(spec, m))

    def test_psi_mixture_moments(self):
        draws = sample_psi(np.random.default_rng(0), 400_000)
        # variance of the mixture: 0.3 * 5^2 + 0.7 * 0.5^2
        assert draws.mean() == pytest.approx(0.0, abs=0.02)
        assert draws.var() == pytest.approx(0.3 * 25 + 0.7 * 0.25, rel=0.02)

    def test_rejects_small_k(self):
        with pytest.raises(ValueError):
            generate_spec(2, 0.4, 0.2, 1)


class TestEvaluate:
    def test_hand_expansion(self):
        spec = hand_spec()
        x = np.array([[0.2, 0.6, 0.1, 0.35]])
        f1, f2 = 0.2, 0.6**3
        f3, f4 = math.sin(2 * math.pi * 0.1) / 2, (1 / (10 - 1 / 1.1)) / (0.35 + 0.1)
        expected = (1.0 * f1 - 2.0 * f2 + 0.5 * f3 + 3.0 * f4
                    + 0.25 * f1 * f2 - 1.5 * f3 * f4 + 2.0 * f1 * f3 * f4)
        assert evaluate(spec, x)[0] == pytest.approx(expected, abs=1e-12)

    def test_null_function(self):
        spec = generate_spec(6, 0.4, 0.2, 3)
        zero = MetafunctionSpec(6, spec.u, spec.pairs, spec.triples, spec.alpha * 0, spec.beta * 0, spec.gamma * 0)
        assert np.all(evaluate(zero, np.random.default_rng(1).random((20, 6))) == 0.0)

    def test_single_linear_term(self):
        spec = MetafunctionSpec(3, (5, 1, 1), np.empty((0, 2), int), np.empty((0, 3), int),
                                np.array([1.0, 0.0, 0.0]), np.empty(0), np.empty(0))
        x = np.random.default_rng(2).random((50, 3))
        assert np.array_equal(evaluate(spec, x), x[:, 0])

    @settings(max_examples=25, deadline=None)
    @given(st.integers(3, 12), st.integers(1, 200), st.integers(0, 1000))
    def test_matches_naive_expansion(self, k, eps, seed):
        spec = generate_spec(k, 0.4, 0.2, eps)
        m = np.random.default_rng(seed).random((8, k))
        assert np.allclose(evaluate(spec, m), naive_evaluate(spec, m), rtol=1e-12, atol=1e-12)

    def test_row_partition_invariance(self):
        spec = generate_spec(40, 0.5, 0.3, 8)
        m = np.random.default_rng(4).random((300, 40))
        whole = evaluate(spec, m)
        parts = np.concatenate([evaluate(spec, m[:97]), evaluate(spec, m[97:])])
        assert np.array_equal(whole, parts)

    def test_shape_mismatch(self):
        with pytest.raises(DesignShapeError):
            evaluate(generate_spec(5, 0.4, 0.2, 1), np.zeros((3, 4)))


class TestEvaluateSwaps:
    @pytest.mark.parametrize("k", [3, 9, 25])
    def test_matches_direct_evaluation(self, k):
        spec = generate_spec(k, 0.45, 0.25, k)
        rng = np.random.default_rng(k)
        A, B = rng.random((64, k)), rng.random((64, k))
        yA, yAB = evaluate_swaps(spec, A, B)
        assert np.array_equal(yA, evaluate(spec, A))
        for i in range(k):
            assert np.allclose(yAB[i], evaluate(spec, swap_columns(A, B, i)), rtol=1e-12, atol=1e-12)

    def test_identical_column_gives_exact_copy(self):
        spec = generate_spec(6, 0.4, 0.2, 2)
        rng = np.random.default_rng(0)
        A, B = rng.random((32, 6)), rng.random((32, 6))
        B[:, 3] = A[:, 3]
        yA, yAB = evaluate_swaps(spec, A, B)
        assert np.array_equal(yAB[3], yA)


class TestParetoBehaviour:
    def test_first_order_sum_and_active_fraction(self):
        """Across 1000 random functions, sum(S_i) sits below 1 and ~10-20% of inputs are active."""
        rng = np.random.default_rng(2024)
        sums, active = [], []
        n = 2**9
        for j in range(1000):
            k = int(rng.integers(4, 100))
            spec = generate_spec(k, rng.uniform(0.3, 0.5), rng.uniform(0.1, 0.3), int(rng.integers(1, 10**6)))
            u = sobol_points(n, 2 * k, scramble_seed=j)
            A, B = u[:, :k], u[:, k:]
            yA, yAB = evaluate_swaps(spec, A, B)
            ev = EvaluationSet(yA=yA, yB=evaluate(spec, B), yAB=yAB)
            sums.append(first_order_si(ev).sum())
            active.append(np.mean(jansen_total(ev).T_hat > 0.05))
        assert np.median(sums) < 1.0
        assert abs(np.median(sums) - 0.8) <= 0.15
        assert abs(np.median(active) - 0.15) <= 0.15
