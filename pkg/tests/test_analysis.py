"""Dependence scores, level-set traces, harmonic tests, histograms."""

import numpy as np
import pytest

import effparam.analysis as an
import effparam.dmaps as dm
import effparam.sampling as sp
from effparam.dmaps import PointCloud
from effparam.errors import ConfigurationError, NumericError
from effparam.models import abc_effective, get_model
from effparam.pellet import trace_curve


@pytest.fixture(scope="module")
def toy_embedding():
    """Output-only spectrum over a square cloud of the product model."""
    toy = get_model("toy")
    sampler = sp.SamplerSpec(axes=((0.5, 2.0, "uniform"),
                                   (0.5, 2.0, "uniform")),
                             count=1200, seed=4)
    ds = sp.generate_dataset(toy, toy.default_protocol, sampler)
    cloud = ds.cloud
    d2 = dm.pairwise_dissimilarity(cloud, dm.KernelSpec(family="output-only",
                                                        scale=1.0))
    scale = dm.select_scale(distances=d2, multiplier=0.5)
    spectrum = dm.compute_spectrum(
        cloud, dm.KernelSpec(family="output-only", scale=scale), k=8)
    return toy, ds, spectrum


@pytest.fixture(scope="module")
def toy_trace(toy_embedding):
    toy, _, spectrum = toy_embedding
    fld = an.embedding_field(spectrum, 1, model=toy)
    seed = np.array([1.0, 1.0])
    level = float(fld(seed[None])[0])
    trace = an.level_set_trace(spectrum, 1, level, seed, step=0.05, model=toy)
    return toy, spectrum, trace


class TestDependenceScore:
    def test_cubic_is_perfectly_monotone(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-2.0, 2.0, 1000)
        assert an.dependence_score(x, x ** 3).score == 1.0

    def test_parabola_splits_the_methods(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(-1.0, 1.0, 1000)
        report = an.dependence_report(x, x ** 2)
        assert report["spearman"].score < 0.1
        assert report["binned"].score > 0.9

    def test_shuffled_pairs_score_low(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=1000)
        y = rng.permutation(x)
        assert an.dependence_score(x, y, "spearman").score < 0.1
        assert an.dependence_score(x, y, "binned").score < 0.1

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=500)
        y = x + 0.3 * rng.normal(size=500)
        base = an.dependence_score(x, y).score
        assert an.dependence_score(x ** 3, y).score == base
        assert an.dependence_score(x, np.exp(y)).score == base

    def test_constant_target(self):
        x = np.linspace(0.0, 1.0, 50)
        y = np.full(50, 2.0)
        assert an.dependence_score(x, y, "binned").score == 1.0
        assert an.dependence_score(x, y, "spearman").score == 0.0

    def test_validation(self):
        good = np.arange(20.0)
        with pytest.raises(ConfigurationError):
            an.dependence_score(good, good[:-1])
        with pytest.raises(ConfigurationError):
            an.dependence_score(good[:5], good[:5])
        with pytest.raises(ConfigurationError):
            an.dependence_score(good, good, method="pearson")
        with pytest.raises(NumericError):
            an.dependence_score(good, np.full(20, np.nan))
        with pytest.raises(ConfigurationError):
            an.DependenceScore(score=1.5, method="spearman", count=10)


class TestSloppinessProfile:
    @staticmethod
    def _sweep(model, idx, lo, hi, fixed, n=32):
        vals = np.geomspace(lo, hi, n)
        inputs = np.tile(np.asarray(fixed, dtype=float), (n, 1))
        inputs[:, idx] = vals
        outputs = model.evaluate(inputs, model.default_protocol)
        return sp.Dataset(inputs=inputs, outputs=outputs, ids=np.arange(n),
                          manifest={})

    def test_enzyme_capacity_ratio_is_sloppy(self):
        mmh = get_model("mmh")
        ds = self._sweep(mmh, 2, 1e-2, 1e2, (0.01, 1.0, 1.0))
        assert an.sloppiness_profile(ds, 2) < 0.02

    def test_substrate_scale_matters(self):
        mmh = get_model("mmh")
        ds = self._sweep(mmh, 1, 1e-2, 1e2, (0.01, 1.0, 10.0))
        assert an.sloppiness_profile(ds, 1) > 0.5

    def test_constant_output_scores_zero(self):
        inputs = np.column_stack([np.linspace(0, 1, 12), np.ones(12)])
        ds = sp.Dataset(inputs=inputs, outputs=np.ones((12, 3)),
                        ids=np.arange(12), manifest={})
        assert an.sloppiness_profile(ds, 0) == 0.0

    def test_requires_a_proper_sweep(self):
        rng = np.random.default_rng(4)
        inputs = rng.uniform(size=(12, 2))
        ds = sp.Dataset(inputs=inputs, outputs=np.ones((12, 2)),
                        ids=np.arange(12), manifest={})
        with pytest.raises(ConfigurationError):
            an.sloppiness_profile(ds, 0)
        with pytest.raises(ConfigurationError):
            an.sloppiness_profile(ds, 5)

    def test_column_selection(self):
        inputs = np.column_stack([np.linspace(1, 2, 12), np.ones(12)])
        outputs = np.column_stack([np.linspace(1, 3, 12), np.ones(12)])
        ds = sp.Dataset(inputs=inputs, outputs=outputs, ids=np.arange(12),
                        manifest={})
        assert an.sloppiness_profile(ds, 0, output_index=1) == 0.0
        assert an.sloppiness_profile(ds, 0, output_index=0) == pytest.approx(1.0)


class TestLevelSetTrace:
    def test_follows_the_product_level_set(self, toy_trace):
        _, _, trace = toy_trace
        q = trace.points[:, 0] * trace.points[:, 1]
        assert len(trace) > 20
        assert not trace.truncated
        assert np.abs(q - 1.0).max() < 0.02

    def test_emitted_points_stay_on_level(self, toy_trace):
        _, _, trace = toy_trace
        assert np.all(trace.deviations <= trace.tolerance)

    def test_spacing_and_arclength(self, toy_trace):
        _, _, trace = toy_trace
        gaps = np.linalg.norm(np.diff(trace.points, axis=0), axis=1)
        assert np.all(gaps >= 0.5 * trace.step)
        assert np.all(gaps <= 2.0 * trace.step)
        assert np.all(np.diff(trace.arclength) > 0)
        assert trace.arclength[0] == 0.0

    def test_seed_corrects_onto_level(self, toy_embedding):
        toy, _, spectrum = toy_embedding
        fld = an.embedding_field(spectrum, 1, model=toy)
        level = float(fld(np.array([[1.0, 1.0]]))[0])
        trace = an.level_set_trace(spectrum, 1, level,
                                   np.array([1.03, 1.01]), step=0.05,
                                   model=toy)
        q = trace.points[:, 0] * trace.points[:, 1]
        assert np.abs(q - 1.0).max() < 0.02

    def test_seed_outside_hull_rejected(self, toy_embedding):
        toy, _, spectrum = toy_embedding
        with pytest.raises(ConfigurationError):
            an.level_set_trace(spectrum, 1, 0.0, np.array([5.0, 5.0]),
                               step=0.05, model=toy)

    def test_constant_field_has_no_transverse_direction(self, toy_embedding):
        toy, _, spectrum = toy_embedding
        with pytest.raises(NumericError):
            an.level_set_trace(spectrum, 0, 1.0, np.array([1.0, 1.0]),
                               step=0.05, model=toy)

    def test_uncorrectable_seed_rejected(self, toy_embedding):
        toy, _, spectrum = toy_embedding
        coord = spectrum.coordinate(1)
        far = float(coord.max() + 10 * np.ptp(coord))
        with pytest.raises(ConfigurationError):
            an.level_set_trace(spectrum, 1, far, np.array([1.0, 1.0]),
                               step=0.05, model=toy)

    def test_type_validation(self):
        pts = np.array([[0.0, 0.0], [0.05, 0.0]])
        with pytest.raises(NumericError):
            an.LevelSetTrace(points=pts, deviations=np.array([0.0, 1.0]),
                             arclength=np.array([0.0, 0.05]), level=0.0,
                             step=0.05, tolerance=1e-3)
        with pytest.raises(ConfigurationError):
            an.LevelSetTrace(points=np.array([[0.0, 0.0], [1.0, 0.0]]),
                             deviations=np.zeros(2),
                             arclength=np.array([0.0, 1.0]), level=0.0,
                             step=0.05, tolerance=1e-3)

    def test_effective_rate_constant_along_trace(self):
        # embedding in log-rate space; the level curve of the first
        # coordinate should hold the slow-regime effective rate fixed
        abc = get_model("abc")
        rng = np.random.default_rng(21)
        n = 1500
        logk = rng.uniform(-3.0, 3.0, size=(n, 3))
        outputs = abc.evaluate(10.0 ** logk, abc.default_protocol)
        cloud = PointCloud(inputs=logk, outputs=outputs, ids=np.arange(n))
        d2 = dm.pairwise_dissimilarity(
            cloud, dm.KernelSpec(family="output-only", scale=1.0))
        scale = dm.select_scale(distances=d2, multiplier=0.2)
        spectrum = dm.compute_spectrum(
            cloud, dm.KernelSpec(family="output-only", scale=scale), k=6)

        def outs(pts):
            return abc.evaluate(10.0 ** np.atleast_2d(pts),
                                abc.default_protocol)

        seed = np.array([-1.0, 3.0, 3.0])
        fld = an.embedding_field(spectrum, 1, outputs_fn=outs)
        level = float(fld(seed[None])[0])
        trace = an.level_set_trace(spectrum, 1, level, seed, step=0.25,
                                   outputs_fn=outs)
        keff = np.array([abc_effective(10.0 ** row).k_eff
                         for row in trace.points])
        assert len(trace) >= 15
        assert np.ptp(keff) / keff.mean() < 0.01


class TestMonotonicityAlong:
    def test_arclength_is_monotone(self, toy_trace):
        _, _, trace = toy_trace
        verdict = an.monotonicity_along(trace, trace.arclength)
        assert verdict.monotone
        assert verdict.score == 1.0
        assert not verdict.zero_variation

    def test_input_coordinate_along_hyperbola(self, toy_trace):
        _, _, trace = toy_trace
        verdict = an.monotonicity_along(trace, lambda pts: pts[:, 0])
        assert verdict.monotone
        assert verdict.score > 0.999

    def test_traced_coordinate_reads_as_constant(self, toy_trace):
        toy, spectrum, trace = toy_trace
        fld = an.embedding_field(spectrum, 1, model=toy)
        verdict = an.monotonicity_along(trace, fld,
                                        variation_floor=trace.tolerance)
        assert verdict.zero_variation
        assert not verdict.monotone
        assert verdict.score == 0.0

    def test_constant_array(self, toy_trace):
        _, _, trace = toy_trace
        verdict = an.monotonicity_along(trace, np.ones(len(trace)))
        assert verdict.zero_variation and not verdict.monotone

    def test_transverse_coordinate_on_stiff_cloud(self):
        # trace a level curve of the leading coordinate and demand the
        # first genuinely new coordinate move one way along it
        sing = get_model("singpert")
        rng = np.random.default_rng(31)
        n = 2000
        logeps = rng.uniform(-3.0, 0.0, n)
        y0 = rng.uniform(3.0, 5.0, n)
        inputs = np.column_stack([logeps, y0])
        outputs = sing.evaluate(np.column_stack([10.0 ** logeps, y0]),
                                sing.default_protocol)
        cloud = PointCloud(inputs=inputs, outputs=outputs, ids=np.arange(n))
        d2 = dm.pairwise_dissimilarity(
            cloud, dm.KernelSpec(family="output-only", scale=1.0))
        scale = dm.select_scale(distances=d2, multiplier=0.2)
        spectrum = dm.compute_spectrum(
            cloud, dm.KernelSpec(family="output-only", scale=scale), k=12)
        sel = dm.select_independent_coordinates(spectrum, count=2,
                                                max_candidates=11)
        assert sel.complete

        def outs(pts):
            pts = np.atleast_2d(pts)
            return sing.evaluate(
                np.column_stack([10.0 ** pts[:, 0], pts[:, 1]]),
                sing.default_protocol)

        seed = np.array([np.log10(0.4), 4.0])
        fld1 = an.embedding_field(spectrum, 1, outputs_fn=outs)
        level = float(fld1(seed[None])[0])
        trace = an.level_set_trace(spectrum, 1, level, seed, step=0.08,
                                   outputs_fn=outs)
        fldj = an.embedding_field(spectrum, sel.indices[1], outputs_fn=outs)
        verdict = an.monotonicity_along(trace, fldj)
        assert verdict.monotone
        assert verdict.score > 0.99

    def test_validation(self, toy_trace):
        _, _, trace = toy_trace
        with pytest.raises(ConfigurationError):
            an.monotonicity_along(trace, np.ones(3))
        short = an.LevelSetTrace(points=np.array([[0.0, 0.0], [0.05, 0.0]]),
                                 deviations=np.zeros(2),
                                 arclength=np.array([0.0, 0.05]),
                                 level=0.0, step=0.05, tolerance=1.0)
        with pytest.raises(ConfigurationError):
            an.monotonicity_along(short, np.zeros(2))


class TestHarmonicTest:
    def test_candidate_equal_to_base(self, toy_embedding):
        _, _, spectrum = toy_embedding
        phi1 = spectrum.coordinate(1)
        assert an.harmonic_test(phi1, phi1) < 0.05

    def test_independent_noise_scores_high(self, toy_embedding):
        _, _, spectrum = toy_embedding
        phi1 = spectrum.coordinate(1)
        rng = np.random.default_rng(9)
        assert an.harmonic_test(rng.normal(size=len(phi1)), phi1) > 0.9

    def test_interval_harmonics_detected(self):
        rng = np.random.default_rng(10)
        x = rng.uniform(0.0, 1.0, 800)
        base = np.cos(np.pi * x)
        assert an.harmonic_test(np.cos(2 * np.pi * x), base) < 0.1

    def test_cross_direction_is_not_a_harmonic(self):
        rng = np.random.default_rng(11)
        x = rng.uniform(0.0, 2.0, 800)
        y = rng.uniform(0.0, 1.0, 800)
        base = np.cos(np.pi * x / 2.0)
        assert an.harmonic_test(np.cos(np.pi * x), base) < 0.1
        assert an.harmonic_test(np.cos(np.pi * y), base) > 0.8

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            an.harmonic_test(np.ones(10), np.ones(9))
        with pytest.raises(ConfigurationError):
            an.harmonic_test(np.ones(10), np.ones(10), neighborhood=16)
        with pytest.raises(NumericError):
            an.harmonic_test(np.full(40, np.nan), np.arange(40.0))


class TestOutputHistogram:
    def test_uniform_sample_is_flat(self):
        rng = np.random.default_rng(12)
        hist = an.output_histogram(rng.uniform(0.0, 1.0, 20000), 10)
        assert np.abs(hist.density - 1.0).max() < 0.1

    def test_integrates_to_one(self):
        rng = np.random.default_rng(13)
        hist = an.output_histogram(rng.normal(size=5000), 17)
        mass = np.sum(hist.density * np.diff(hist.edges))
        assert abs(mass - 1.0) < 1e-12

    def test_single_value_occupies_one_bin(self):
        hist = an.output_histogram(np.full(50, 3.2), 4)
        masses = hist.density * np.diff(hist.edges)
        assert np.sum(masses > 0) == 1
        assert masses.max() == pytest.approx(1.0)

    def test_noninvertible_response_has_pdf_jump(self):
        # uniform sampling of the modulus across the noninvertible window
        # piles density discontinuously where the second branch begins
        grid = np.logspace(np.log10(0.95), np.log10(2.6), 121)
        curve = trace_curve(0.2, 20.0, grid)
        rng = np.random.default_rng(7)
        phis = rng.uniform(1.0, 2.5, 40000)
        etas = np.interp(phis, curve.phi, curve.eta)
        density = an.output_histogram(etas, 25).density
        ratios = [max(density[i + 1] / density[i], density[i] / density[i + 1])
                  for i in range(len(density) - 1)
                  if density[i] > 0 and density[i + 1] > 0]
        assert max(ratios) > 3.0

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            an.output_histogram([], 4)
        with pytest.raises(ConfigurationError):
            an.output_histogram([1.0, 2.0], 1)
        with pytest.raises(NumericError):
            an.output_histogram([1.0, np.inf], 4)
