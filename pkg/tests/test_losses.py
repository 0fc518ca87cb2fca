"""Loss identities, oracles, and gradient checks for every objective."""

import math

import numpy as np
import pytest

from numcheck import assert_grad_matches
from rpmkit import tensor as T
from rpmkit.losses import (
    LossBundle,
    NonFiniteLossError,
    PairHeads,
    analogy_generative,
    analogy_inference,
    analogy_loss,
    analogy_variational,
    meta_contrastive_loss,
    nce_loss,
    soft_similarity,
)
from rpmkit.model import ContextHeads
from rpmkit.tensor import ShapeError, Tensor


def _np_softmax(x):
    e = np.exp(x - np.max(x))
    return e / e.sum()


class TestNce:
    def test_perfect_separation_tends_to_zero(self):
        scores = np.full(8, -50.0)
        scores[2] = 50.0
        assert nce_loss(Tensor(scores), 2).item() < 1e-20

    def test_all_zero_scores_equal_eight_log_two(self):
        loss = nce_loss(Tensor(np.zeros(8)), 0)
        assert abs(loss.item() - 8 * math.log(2)) < 1e-12

    def test_answer_out_of_range(self):
        with pytest.raises(ValueError):
            nce_loss(Tensor(np.zeros(8)), 8)

    def test_nonnegative_on_random_scores(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            s = rng.normal(scale=3.0, size=8)
            assert nce_loss(Tensor(s), int(rng.integers(8))).item() >= 0.0

    def test_gradient_vs_finite_differences(self):
        rng = np.random.default_rng(5)
        s = rng.normal(size=(8,))
        assert_grad_matches(lambda ls: nce_loss(ls[0], 3), [s])

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(7)
        s = rng.normal(size=8)
        y = 4
        sig = 1 / (1 + np.exp(-s))
        direct = -np.log(sig[y]) - sum(np.log(1 - sig[j]) for j in range(8) if j != y)
        assert abs(nce_loss(Tensor(s), y).item() - direct) < 1e-10


class TestAnalogyInference:
    def test_self_similarity_equals_entropy(self):
        rng = np.random.default_rng(11)
        s = rng.normal(size=64)
        p = _np_softmax(s)
        entropy = -np.sum(p * np.log(p))
        assert abs(analogy_inference(Tensor(s), Tensor(s)).item() - entropy) < 1e-10

    def test_matching_one_hots_tend_to_zero(self):
        s = np.full(64, -1000.0)
        s[7] = 1000.0
        assert analogy_inference(Tensor(s), Tensor(s)).item() < 1e-9

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(13)
        a, b = rng.normal(size=64), rng.normal(size=64)
        p, q = _np_softmax(a), _np_softmax(b)
        oracle = -sum(p[k] * math.log(q[k]) for k in range(64))
        assert abs(analogy_inference(Tensor(a), Tensor(b)).item() - oracle) < 1e-9

    def test_gibbs_inequality(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            a, b = rng.normal(scale=2.0, size=16), rng.normal(scale=2.0, size=16)
            cross = analogy_inference(Tensor(a), Tensor(b)).item()
            self_h = analogy_inference(Tensor(a), Tensor(a)).item()
            assert cross >= self_h - 1e-12

    def test_gradient_reaches_both_arguments(self):
        rng = np.random.default_rng(19)
        a, b = rng.normal(size=10), rng.normal(size=10)
        assert_grad_matches(lambda ls: analogy_inference(ls[0], ls[1]), [a, b])


class TestAnalogyVariational:
    def test_identical_distributions_give_zero(self):
        rng = np.random.default_rng(23)
        mu = Tensor(rng.normal(size=16))
        sigma = Tensor(rng.uniform(0.1, 0.9, size=16))
        assert abs(analogy_variational(mu, sigma, mu, sigma).item()) < 1e-12

    def test_unit_mean_shift_gives_half_per_dimension(self):
        dims = 8
        loss = analogy_variational(
            Tensor(np.zeros(dims)), Tensor(np.ones(dims)),
            Tensor(np.ones(dims)), Tensor(np.ones(dims)),
        )
        assert abs(loss.item() - 0.5 * dims) < 1e-12

    def test_nonnegative_and_matches_monte_carlo(self):
        rng = np.random.default_rng(29)
        dims, n = 3, 100_000
        mu_s, mu_q = rng.normal(size=dims), rng.normal(size=dims)
        sg_s, sg_q = rng.uniform(0.3, 0.9, size=dims), rng.uniform(0.3, 0.9, size=dims)
        closed = analogy_variational(
            Tensor(mu_s), Tensor(sg_s), Tensor(mu_q), Tensor(sg_q)
        ).item()
        assert closed >= 0.0
        # reparameterized estimate of E_p[log p - log q]
        z = mu_s + sg_s * rng.standard_normal((n, dims))
        log_p = -0.5 * np.sum(((z - mu_s) / sg_s) ** 2 + np.log(2 * np.pi * sg_s**2), axis=1)
        log_q = -0.5 * np.sum(((z - mu_q) / sg_q) ** 2 + np.log(2 * np.pi * sg_q**2), axis=1)
        samples = log_p - log_q
        stderr = samples.std(ddof=1) / np.sqrt(n)
        assert abs(closed - samples.mean()) <= 3 * stderr

    def test_nonpositive_sigma_rejected(self):
        mu = Tensor(np.zeros(4))
        bad = Tensor(np.array([0.5, 0.0, 0.5, 0.5]))
        with pytest.raises(ValueError, match="positive"):
            analogy_variational(mu, bad, mu, Tensor(np.full(4, 0.5)))

    def test_gradient_vs_finite_differences(self):
        rng = np.random.default_rng(31)
        mu_s, mu_q = rng.normal(size=5), rng.normal(size=5)
        raw_s, raw_q = rng.normal(size=5), rng.normal(size=5)

        def build(leaves):
            return analogy_variational(
                leaves[0], T.sigmoid(leaves[1]), leaves[2], T.sigmoid(leaves[3])
            )

        assert_grad_matches(build, [mu_s, raw_s, mu_q, raw_q])


class TestAnalogyGenerative:
    def test_reconstruction_equal_to_clipped_target_is_minimal(self):
        rng = np.random.default_rng(37)
        eps = 1e-6
        target = np.clip(rng.integers(0, 2, size=(9, 12)).astype(float), eps, 1 - eps)
        r = Tensor(target)
        loss = analogy_generative(r, r, target).item()
        entropy = -np.mean(target * np.log(target) + (1 - target) * np.log(1 - target))
        assert abs(loss - 2 * entropy) < 1e-12
        bumped = analogy_generative(Tensor(np.clip(target + 0.05, eps, 1 - eps)), r, target)
        assert bumped.item() > loss

    def test_half_everywhere_is_two_log_two(self):
        target = np.random.default_rng(41).uniform(size=(9, 7))
        half = Tensor(np.full((9, 7), 0.5))
        assert abs(analogy_generative(half, half, target).item() - 2 * math.log(2)) < 1e-12

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            analogy_generative(
                Tensor(np.full((9, 3), 0.5)), Tensor(np.full((9, 3), 0.5)), np.zeros((9, 4))
            )

    def test_gradient_vs_finite_differences(self):
        rng = np.random.default_rng(43)
        target = rng.uniform(size=(4, 3))
        raw_s, raw_q = rng.normal(size=(4, 3)), rng.normal(size=(4, 3))
        assert_grad_matches(
            lambda ls: analogy_generative(T.sigmoid(ls[0]), T.sigmoid(ls[1]), target),
            [raw_s, raw_q],
        )


class TestAnalogyLoss:
    def test_no_queries_gives_zero(self):
        support = ContextHeads(embedding=Tensor(np.ones(4)))
        assert analogy_loss(support, [], "none").item() == 0.0

    def test_none_mode_zero_on_equal_embeddings(self):
        emb = np.random.default_rng(47).normal(size=8)
        support = ContextHeads(embedding=Tensor(emb))
        queries = [ContextHeads(embedding=Tensor(emb.copy())) for _ in range(3)]
        assert analogy_loss(support, queries, "none").item() == 0.0

    def test_inference_mode_decomposes_into_pairwise_calls(self):
        rng = np.random.default_rng(53)
        s = rng.normal(size=64)
        qs = [rng.normal(size=64) for _ in range(3)]
        support = ContextHeads(embedding=Tensor(np.zeros(2)), task_scores=Tensor(s))
        queries = [ContextHeads(embedding=Tensor(np.zeros(2)), task_scores=Tensor(q)) for q in qs]
        total = analogy_loss(support, queries, "inference").item()
        oracle = sum(analogy_inference(Tensor(s), Tensor(q)).item() for q in qs)
        assert abs(total - oracle) < 1e-10

    def test_unknown_kernel_rejected(self):
        support = ContextHeads(embedding=Tensor(np.ones(4)))
        with pytest.raises(ValueError, match="kernel"):
            analogy_loss(support, [], "fancy")


class TestSoftSimilarity:
    def test_identical_vectors_give_p(self):
        v = np.arange(1.0, 65.0)
        assert soft_similarity(v, v, p=0.1, n=0.4) == 0.1

    def test_antipodal_unit_vectors_clamp_to_minus_one(self):
        a = np.zeros(64)
        a[0] = 1.0
        assert soft_similarity(a, -a, p=0.1, n=0.4) == -1.0

    def test_zero_between_margins(self):
        # orthonormal construction with controlled normalized distance
        theta = 2 * math.asin(0.25 / 2)  # D = 0.25, between p and n
        a = np.zeros(8)
        a[0] = 1.0
        b = np.zeros(8)
        b[0], b[1] = math.cos(theta), math.sin(theta)
        assert soft_similarity(a, b, p=0.1, n=0.4) == 0.0

    def test_range_bounds(self):
        rng = np.random.default_rng(59)
        for _ in range(200):
            a, b = rng.normal(size=16), rng.normal(size=16)
            val = soft_similarity(a, b, p=0.3, n=0.35)
            assert -1.0 <= val <= 0.3

    def test_margin_range_enforced(self):
        v = np.ones(4)
        with pytest.raises(ValueError):
            soft_similarity(v, v, p=0.6, n=0.4)
        with pytest.raises(ValueError):
            soft_similarity(v, v, p=0.1, n=-0.1)

    def test_zero_norm_rejected(self):
        with pytest.raises(ValueError, match="zero-norm"):
            soft_similarity(np.zeros(4), np.ones(4))


def _pair_from_scores(s1, s2, t1, t2):
    mk = lambda s: ContextHeads(embedding=Tensor(np.zeros(2)), task_scores=Tensor(s))
    return PairHeads(mk(s1), mk(s2), mk(t1), mk(t2))


class TestMetaContrastive:
    def test_empty_list_gives_zero(self):
        assert meta_contrastive_loss([]).item() == 0.0

    def test_between_margin_distance_gives_zero(self):
        theta = 2 * math.asin(0.25 / 2)
        a = np.zeros(64)
        a[0] = 100.0
        b = np.zeros(64)
        b[0], b[1] = 100.0 * math.cos(theta), 100.0 * math.sin(theta)
        pair = _pair_from_scores(a, a, b, b)
        assert meta_contrastive_loss([pair], p=0.1, n=0.4).item() == 0.0

    def test_monotone_in_similarity_weight_for_fixed_kernel(self):
        # tiny-norm scores keep the softmax (hence the kernel value) at the
        # uniform plateau while the direction sets the normalized distance
        def scores(direction):
            return 1e-9 * direction

        e0 = np.zeros(64)
        e0[0] = 1.0
        sweep = []
        for dist in (0.0, 0.25, 1.0, 2.0):
            theta = 2 * math.asin(dist / 2)
            d = np.zeros(64)
            d[0], d[1] = math.cos(theta), math.sin(theta)
            pair = _pair_from_scores(scores(e0), scores(e0), scores(d), scores(d))
            sweep.append(meta_contrastive_loss([pair], p=0.1, n=0.4).item())
        weights = [0.1, 0.0, -0.6, -1.0]
        kernel = math.log(64)  # uniform-distribution cross-entropy
        for got, w in zip(sweep, weights):
            assert abs(got - 4 * w * kernel) < 1e-6
        # d decreases along the sweep, so the loss must too
        assert sorted(sweep, reverse=True) == sweep

    def test_decomposes_into_four_cross_terms(self):
        rng = np.random.default_rng(61)
        s1, s2, t1, t2 = (rng.normal(size=64) for _ in range(4))
        pair = _pair_from_scores(s1, s2, t1, t2)
        total = meta_contrastive_loss([pair], p=0.1, n=0.4).item()
        oracle = 0.0
        for es in (s1, s2):
            for et in (t1, t2):
                w = soft_similarity(es, et, 0.1, 0.4)
                oracle += analogy_inference(Tensor(es), Tensor(et)).item() * w
        assert abs(total - oracle) < 1e-9


class TestLossBundle:
    def test_zero_weights_reduce_to_nce(self):
        nce = Tensor(1.25)
        bundle = LossBundle.combine(nce, Tensor(7.0), Tensor(3.0), weights=(0.0, 0.0))
        assert bundle.total.item() == 1.25

    def test_total_matches_recomputation(self):
        rng = np.random.default_rng(67)
        parts = [Tensor(float(v)) for v in rng.normal(size=3)]
        bundle = LossBundle.combine(*parts, weights=(0.5, 2.0))
        recomputed = parts[0].item() + 0.5 * parts[1].item() + 2.0 * parts[2].item()
        assert abs(bundle.total.item() - recomputed) < 1e-15
        s = bundle.scalars()
        assert set(s) == {"nce", "analogy", "contrastive", "total"}

    def test_nonfinite_component_aborts(self):
        with pytest.raises(NonFiniteLossError):
            LossBundle.combine(Tensor(float("nan")), Tensor(0.0), Tensor(0.0))
        with pytest.raises(NonFiniteLossError):
            LossBundle.combine(Tensor(0.0), Tensor(float("inf")), Tensor(0.0))

    def test_negative_weights_rejected(self):
        with pytest.raises(ValueError):
            LossBundle.combine(Tensor(0.0), Tensor(0.0), Tensor(0.0), weights=(-1.0, 0.0))


class TestDescentSmoke:
    def test_one_adam_step_reduces_each_loss(self):
        # frozen random batch; a small step along the gradient must reduce
        # the recomputed loss for every kernel
        from rpmkit.model import EncoderConfig, Reasoner, context_target
        from rpmkit.episodes import make_queries
        from rpmkit.rpm import generate_corpus

        problem = generate_corpus("center", 1, seed=71)[0]
        episode = make_queries(problem, 2, np.random.default_rng(5))
        for kernel in ("none", "inference", "variational", "generative"):
            model = Reasoner.init(EncoderConfig(config="center"), np.random.default_rng(73))

            def compute():
                target = context_target(problem, model.cfg) if kernel == "generative" else None
                support = model.heads(problem.context, kernel, np.random.default_rng(0))
                queries = [
                    model.heads(panels, kernel, np.random.default_rng(0))
                    for panels in episode.queries
                ]
                return analogy_loss(support, queries, kernel, target)

            before = compute()
            before.backward()
            model.params.fill_missing_grads()
            model.params.adam_step(lr=1e-3)
            after = compute()
            assert after.item() < before.item(), kernel
