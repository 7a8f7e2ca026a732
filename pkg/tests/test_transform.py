"""Tests for 1D and 2D analysis and synthesis."""

import math

import numpy as np
import pytest

from wavegen.catalog import lookup
from wavegen.errors import TransformError
from wavegen.filterbank import Filter, derive_bank
from wavegen.transform import (
    BoundaryMode,
    Decomposition1D,
    Decomposition2D,
    analyze_1d,
    analyze_2d,
    analyze_2d_multilevel,
    approximate_samples,
    build_analysis_matrix,
    extend,
    reconstruction_error,
    subband_energy,
    synthesize_1d,
    synthesize_2d,
    synthesize_2d_multilevel,
)

ROOT2 = math.sqrt(2.0)


def _round_trip_1d(s: np.ndarray, bank, mode: BoundaryMode = BoundaryMode.PERIODIC) -> np.ndarray:
    return synthesize_1d(analyze_1d(s, bank, mode), bank).samples


class TestExtend:
    """Tests for the mirror prefix."""

    def test_examples(self) -> None:
        """Test small hand-checked extensions."""
        assert extend([1, 2, 3, 4], 2).tolist() == [3, 2, 1, 1, 2, 3, 4]
        assert extend([1, 2, 3, 4], 1).tolist() == [1, 1, 2, 3, 4]
        assert extend(np.arange(8.0), 3).shape == (13,)

    def test_too_short(self) -> None:
        """Test signals shorter than 2n-1 are refused."""
        with pytest.raises(TransformError, match="shorter"):
            extend([1.0, 2.0], 3)


class TestAnalyze1D:
    """Tests for analyze_1d and synthesize_1d."""

    def test_haar_constant(self, haar_bank) -> None:
        """Test the Haar split of a constant signal."""
        d = analyze_1d([1.0, 1.0, 1.0, 1.0], haar_bank)
        np.testing.assert_allclose(d.p, [ROOT2, ROOT2], atol=1e-15)
        np.testing.assert_allclose(d.q, [0.0, 0.0], atol=1e-15)
        assert d.m == 4

    def test_haar_synthesis(self, haar_bank) -> None:
        """Test the Haar rebuild of a constant signal."""
        d = Decomposition1D(
            p=np.array([ROOT2, ROOT2]), q=np.zeros(2), mode=BoundaryMode.PERIODIC, m=4
        )
        result = synthesize_1d(d, haar_bank)
        np.testing.assert_allclose(result.samples, [1.0, 1.0, 1.0, 1.0], atol=1e-15)
        assert not result.approximate.any()
        assert result.m == 4

    def test_constant_signal_has_no_detail(self, db3_bank) -> None:
        """Test q vanishes and p keeps the energy for a constant signal."""
        s = np.full(24, 3.0)
        d = analyze_1d(s, db3_bank)
        assert np.max(np.abs(d.q)) < 1e-13
        assert np.sum(d.p**2) == pytest.approx(np.sum(s**2), rel=1e-12)

    @pytest.mark.parametrize(
        "signal,message",
        [
            (np.zeros(15), "even"),
            (np.zeros(10), "at least 4n"),
            (np.zeros((4, 4)), "one-dimensional"),
            (np.array([0.0] * 11 + [np.nan]), "finite"),
        ],
    )
    def test_rejects_bad_signals(self, db3_bank, signal: np.ndarray, message: str) -> None:
        """Test signal preconditions against a 6-tap bank."""
        with pytest.raises(TransformError, match=message):
            analyze_1d(signal, db3_bank)

    def test_db3_round_trip(self, db3_bank, rng: np.random.Generator) -> None:
        """Test a 16-sample round trip with the 6-tap Daubechies bank."""
        s = rng.normal(size=16)
        assert reconstruction_error(s, _round_trip_1d(s, db3_bank)) < 1e-12

    def test_zero_coefficients(self, db3_bank) -> None:
        """Test zero coefficients give a zero signal."""
        d = Decomposition1D(
            p=np.zeros(8), q=np.zeros(8), mode=BoundaryMode.PERIODIC, m=16
        )
        assert not synthesize_1d(d, db3_bank).samples.any()

    def test_solved_banks_reconstruct(self, solved_bank, rng: np.random.Generator) -> None:
        """Test perfect reconstruction for freshly solved banks of several lengths."""
        for n in range(3, 9):
            bank = solved_bank(n)
            for _ in range(50):
                s = rng.normal(size=64)
                assert reconstruction_error(s, _round_trip_1d(s, bank)) < 1e-10

    def test_every_valid_length(self, db3_bank, rng: np.random.Generator) -> None:
        """Test reconstruction at the shortest and at other even lengths."""
        for m in range(12, 40, 2):
            s = rng.normal(size=m)
            assert reconstruction_error(s, _round_trip_1d(s, db3_bank)) < 1e-10

    def test_parseval(self, solved_bank, rng: np.random.Generator) -> None:
        """Test coefficient energy equals signal energy."""
        bank = solved_bank(4)
        for _ in range(100):
            s = rng.normal(size=32)
            d = analyze_1d(s, bank)
            energy = np.sum(d.p**2) + np.sum(d.q**2)
            assert energy == pytest.approx(np.sum(s**2), rel=1e-8)

    def test_linearity(self, db3_bank, rng: np.random.Generator) -> None:
        """Test analysis of a linear combination."""
        x, y = rng.normal(size=32), rng.normal(size=32)
        combined = analyze_1d(2.5 * x - 0.75 * y, db3_bank)
        dx, dy = analyze_1d(x, db3_bank), analyze_1d(y, db3_bank)
        np.testing.assert_allclose(combined.p, 2.5 * dx.p - 0.75 * dy.p, atol=1e-12)
        np.testing.assert_allclose(combined.q, 2.5 * dx.q - 0.75 * dy.q, atol=1e-12)

    def test_mismatched_decomposition(self) -> None:
        """Test coefficient halves must match m."""
        with pytest.raises(TransformError, match="half of m"):
            Decomposition1D(p=np.zeros(3), q=np.zeros(4), mode=BoundaryMode.PERIODIC, m=8)


class TestMirrorMode:
    """Tests for the mirror-extended boundary."""

    def test_interior_coefficients_match_periodic(self, db3_bank, rng: np.random.Generator) -> None:
        """Test coefficients whose window stays inside the signal agree with PERIODIC."""
        n = db3_bank.n
        s = rng.normal(size=32)
        periodic = analyze_1d(s, db3_bank, BoundaryMode.PERIODIC)
        mirror = analyze_1d(s, db3_bank, BoundaryMode.MIRROR)
        np.testing.assert_allclose(mirror.p[n - 1 :], periodic.p[n - 1 :], rtol=0, atol=1e-14)
        np.testing.assert_allclose(mirror.q[n - 1 :], periodic.q[n - 1 :], rtol=0, atol=1e-14)
        assert not np.allclose(mirror.p[: n - 1], periodic.p[: n - 1])

    def test_left_edge_reads_mirror(self) -> None:
        """Test the first coefficient reads the mirrored left edge."""
        bank = derive_bank(lookup("db2").taps)
        s = np.arange(1.0, 9.0)
        d = analyze_1d(s, bank, BoundaryMode.MIRROR)
        taps = bank.l_d.as_array()[::-1]
        # window of p_1 is [s_2, s_1, s_1, s_2] after extension
        assert d.p[0] == pytest.approx(float(np.dot([2.0, 1.0, 1.0, 2.0], taps)), abs=1e-14)

    def test_flagged_samples(self, db3_bank, rng: np.random.Generator) -> None:
        """Test unflagged samples are exact and flags sit at the right edge."""
        s = rng.normal(size=32)
        result = synthesize_1d(analyze_1d(s, db3_bank, BoundaryMode.MIRROR), db3_bank)
        mask = result.approximate
        assert mask.tolist() == approximate_samples(32, 3, BoundaryMode.MIRROR).tolist()
        assert mask.sum() == 2 * (db3_bank.n - 1)
        assert mask[-1] and not mask[0]
        assert np.max(np.abs(result.samples[~mask] - s[~mask])) < 1e-10

    def test_periodic_never_flags(self) -> None:
        """Test PERIODIC mode marks nothing approximate."""
        assert not approximate_samples(64, 8, BoundaryMode.PERIODIC).any()


class TestAnalysisMatrix:
    """Tests for the dense analysis matrix."""

    @pytest.mark.parametrize("name", ["haar", "db2", "db3"])
    def test_orthogonal_for_reference_filters(self, name: str) -> None:
        """Test W W^T is the identity for precise reference filters."""
        bank = derive_bank(lookup(name).taps)
        m = max(8 * bank.n, 4)
        w = build_analysis_matrix(bank, m)
        assert np.max(np.abs(w @ w.T - np.eye(m))) < 1e-12

    def test_haar_m4(self, haar_bank) -> None:
        """Test Haar rows at the shortest length."""
        w = build_analysis_matrix(haar_bank, 4)
        half = ROOT2 / 2
        np.testing.assert_allclose(w[0], [half, half, 0, 0], atol=1e-15)
        np.testing.assert_allclose(w[2], [half, -half, 0, 0], atol=1e-15)
        assert np.max(np.abs(w @ w.T - np.eye(4))) < 1e-14

    def test_solved_banks(self, solved_bank, rng: np.random.Generator) -> None:
        """Test orthogonality and agreement with the fast transforms."""
        for n in (5, 7):
            bank = solved_bank(n)
            m = 8 * n
            w = build_analysis_matrix(bank, m)
            assert np.max(np.abs(w @ w.T - np.eye(m))) < 1e-10
            s = rng.normal(size=m)
            d = analyze_1d(s, bank)
            coefficients = np.concatenate([d.p, d.q])
            np.testing.assert_allclose(coefficients, w @ s, atol=1e-13)
            np.testing.assert_allclose(
                synthesize_1d(d, bank).samples, w.T @ coefficients, atol=1e-13
            )

    def test_invalid_filter_is_not_orthogonal(self, rng: np.random.Generator) -> None:
        """Test a filter breaking orthogonality gives a non-orthogonal matrix."""
        bank = derive_bank(Filter([0.5, 0.5, 0.5, 0.5, 0.0, 0.0]))
        w = build_analysis_matrix(bank, 12)
        assert np.max(np.abs(w @ w.T - np.eye(12))) > 0.1
        s = rng.normal(size=12)
        assert reconstruction_error(s, _round_trip_1d(s, bank)) > 1e-3

    def test_rejects_short_length(self, db3_bank) -> None:
        """Test m below 4n."""
        with pytest.raises(TransformError, match="at least 4n"):
            build_analysis_matrix(db3_bank, 8)


class TestTransform2D:
    """Tests for separable image transforms."""

    def test_plane_shapes(self, db3_bank, rng: np.random.Generator) -> None:
        """Test a 64x64 image yields four 32x32 planes."""
        d = analyze_2d(rng.uniform(0, 255, (64, 48)), db3_bank)
        for plane in d.planes().values():
            assert plane.shape == (32, 24)
        assert (d.rows, d.cols) == (64, 48)

    @pytest.mark.parametrize("n,size", [(3, 64), (15, 64), (15, 128)])
    def test_round_trip(self, solved_bank, rng: np.random.Generator, n: int, size: int) -> None:
        """Test 2D perfect reconstruction with short and long solved banks."""
        bank = solved_bank(n)
        image = rng.uniform(0, 255, (size, size))
        rebuilt = synthesize_2d(analyze_2d(image, bank), bank)
        assert reconstruction_error(image, rebuilt) < 1e-10

    def test_separability(self, db3_bank, rng: np.random.Generator) -> None:
        """Test the 2D result matches 1D passes in either order."""
        image = rng.normal(size=(16, 24))
        d = analyze_2d(image, db3_bank)

        rows = [analyze_1d(row, db3_bank) for row in image]
        row_low = np.array([r.p for r in rows])
        cols = [analyze_1d(col, db3_bank) for col in row_low.T]
        np.testing.assert_allclose(np.array([c.p for c in cols]).T, d.main, atol=1e-12)
        np.testing.assert_allclose(np.array([c.q for c in cols]).T, d.horizontal, atol=1e-12)

        columns = [analyze_1d(col, db3_bank) for col in image.T]
        col_high = np.array([c.q for c in columns]).T
        diag = np.array([analyze_1d(row, db3_bank).q for row in col_high])
        np.testing.assert_allclose(diag, d.diagonal, atol=1e-12)
        col_low = np.array([c.p for c in columns]).T
        vert = np.array([analyze_1d(row, db3_bank).q for row in col_low])
        np.testing.assert_allclose(vert, d.vertical, atol=1e-12)

    def test_constant_image(self, db3_bank) -> None:
        """Test a flat image puts all energy in the main plane."""
        d = analyze_2d(np.full((32, 32), 100.0), db3_bank)
        for name in ("horizontal", "vertical", "diagonal"):
            assert np.max(np.abs(getattr(d, name))) < 1e-10
        energy = subband_energy(d)
        assert energy.fractions["main"] == pytest.approx(1.0, abs=1e-12)
        assert sum(energy.fractions.values()) == pytest.approx(1.0)

    def test_horizontal_stripes(self, db3_bank) -> None:
        """Test horizontal stripes concentrate detail in the horizontal plane."""
        image = np.zeros((32, 32))
        image[1::2, :] = 255.0
        fractions = subband_energy(analyze_2d(image, db3_bank)).fractions
        others = {k: v for k, v in fractions.items() if k != "main"}
        assert max(others, key=others.get) == "horizontal"

    def test_energy_matches_image(self, solved_bank, rng: np.random.Generator) -> None:
        """Test subband energies add up to the image energy."""
        image = rng.uniform(0, 255, (32, 40))
        energy = subband_energy(analyze_2d(image, solved_bank(4)))
        assert energy.total == pytest.approx(float(np.sum(image**2)), rel=1e-8)

    def test_zero_planes(self, db3_bank) -> None:
        """Test all-zero planes give a zero image."""
        zero = np.zeros((8, 8))
        d = Decomposition2D(
            main=zero,
            horizontal=zero,
            vertical=zero,
            diagonal=zero,
            mode=BoundaryMode.PERIODIC,
            rows=16,
            cols=16,
        )
        assert not synthesize_2d(d, db3_bank).any()

    def test_zero_image_energy(self, db3_bank) -> None:
        """Test a zero image has zero fractions rather than NaN."""
        energy = subband_energy(analyze_2d(np.zeros((12, 12)), db3_bank))
        assert energy.total == 0.0
        assert set(energy.fractions.values()) == {0.0}

    @pytest.mark.parametrize("shape", [(63, 64), (64, 10), (64,)])
    def test_rejects_bad_images(self, db3_bank, shape: tuple) -> None:
        """Test odd, short and flat inputs."""
        with pytest.raises(TransformError):
            analyze_2d(np.zeros(shape), db3_bank)

    def test_plane_shape_mismatch(self) -> None:
        """Test Decomposition2D checks plane shapes."""
        with pytest.raises(TransformError, match="diagonal"):
            Decomposition2D(
                main=np.zeros((4, 4)),
                horizontal=np.zeros((4, 4)),
                vertical=np.zeros((4, 4)),
                diagonal=np.zeros((4, 3)),
                mode=BoundaryMode.PERIODIC,
                rows=8,
                cols=8,
            )

    def test_multilevel_round_trip(self, rng: np.random.Generator) -> None:
        """Test two levels of decomposition and their inverse."""
        bank = derive_bank(lookup("db2").taps)
        image = rng.uniform(0, 255, (64, 64))
        levels = analyze_2d_multilevel(image, bank, levels=2)
        assert [lvl.main.shape for lvl in levels] == [(32, 32), (16, 16)]
        rebuilt = synthesize_2d_multilevel(levels, bank)
        assert reconstruction_error(image, rebuilt) < 1e-10

    def test_multilevel_rejects_zero_levels(self, db3_bank) -> None:
        """Test at least one level is required."""
        with pytest.raises(TransformError, match="levels"):
            analyze_2d_multilevel(np.zeros((32, 32)), db3_bank, levels=0)
        with pytest.raises(TransformError):
            synthesize_2d_multilevel([], db3_bank)


class TestReconstructionError:
    """Tests for reconstruction_error."""

    def test_examples(self) -> None:
        """Test identical and offset inputs."""
        x = np.arange(5.0)
        assert reconstruction_error(x, x) == 0.0
        assert reconstruction_error([1.0, 2.0], [1.0, 2.5]) == 0.5

    def test_shape_mismatch(self) -> None:
        """Test differing shapes are refused."""
        with pytest.raises(TransformError, match="shape mismatch"):
            reconstruction_error(np.zeros(4), np.zeros(6))
