import math

import numpy as np
import pytest
import scipy.fft

from app.modules.spectral.service import (
    SpectralInputError,
    bin_width,
    dft2,
    find_peaks,
    idft2,
    magnitude,
)
from app.modules.spin.service import synthetic_low_rank_signal
from app.schemas.spectrum_schema import Spectrum2D
from app.schemas.spin_schema import EseemGrid, SyntheticPeak


def naive_dft2(M):
    n1, n2 = M.shape
    i = np.arange(n1)[:, None]
    j = np.arange(n2)[None, :]
    X = np.zeros((n1, n2), dtype=complex)
    for k in range(n1):
        for l in range(n2):
            X[k, l] = np.sum(M * np.exp(-2j * math.pi * (k * i / n1 + l * j / n2)))
    return scipy.fft.fftshift(X)


def test_matches_naive_transform(rng):
    M = rng.standard_normal((16, 16))
    X = dft2(M).values
    assert np.max(np.abs(X - naive_dft2(M))) <= 1e-9 * np.max(np.abs(X))


def test_parseval(rng):
    M = rng.standard_normal((12, 20))
    X = dft2(M).values
    assert np.linalg.norm(X) ** 2 == pytest.approx(M.size * np.linalg.norm(M) ** 2, rel=1e-9)


def test_linearity(rng):
    A = rng.standard_normal((8, 10))
    B = rng.standard_normal((8, 10))
    left = dft2(2.0 * A + 3.0 * B).values
    right = 2.0 * dft2(A).values + 3.0 * dft2(B).values
    assert np.max(np.abs(left - right)) <= 1e-10


def test_inverse_recovers_matrix(rng):
    M = rng.standard_normal((9, 14))
    back = idft2(dft2(M))
    assert np.max(np.abs(back - M)) <= 1e-12


def test_constant_matrix_has_single_peak_at_origin():
    spectrum = dft2(np.ones((15, 16)))
    peaks = find_peaks(spectrum, 0.5)
    assert len(peaks) == 1
    assert peaks[0].nu1 == 0.0
    assert peaks[0].nu2 == 0.0
    assert peaks[0].amplitude == pytest.approx(15 * 16)


def test_exact_bin_cosine_product_gives_four_peaks():
    n = 16
    i = np.arange(n)
    M = np.outer(np.cos(2 * math.pi * 3 * i / n), np.cos(2 * math.pi * 5 * i / n))
    spectrum = dft2(M)
    peaks = find_peaks(spectrum, 0.5)
    assert len(peaks) == 4
    found = sorted((round(p.nu1 * n), round(p.nu2 * n)) for p in peaks)
    assert found == [(-3, -5), (-3, 5), (3, -5), (3, 5)]
    mag = magnitude(spectrum)
    mag[[p.index1 for p in peaks], [p.index2 for p in peaks]] = 0
    assert np.max(mag) <= 1e-9 * n * n


@pytest.mark.parametrize("n", [201, 64])
def test_axes_are_increasing_and_centred(n):
    grid = EseemGrid(n1=n, n2=n, dt1=40e-9, dt2=40e-9)
    spectrum = dft2(np.ones(grid.shape), grid)
    width, _ = bin_width(spectrum)
    assert width == pytest.approx(1 / (n * 40e-9))
    assert np.all(np.diff(spectrum.freq1) > 0)
    assert spectrum.freq1.size == n
    assert abs(spectrum.freq1[0] + spectrum.freq1[-1]) <= width * (1 + 1e-9)
    assert np.count_nonzero(spectrum.freq1 == 0.0) == 1


def test_zero_fill_pads_each_axis(rng):
    M = rng.standard_normal((10, 12))
    spectrum = dft2(M, zero_fill=2)
    assert spectrum.shape == (20, 24)
    assert spectrum.freq1.size == 20
    assert spectrum.freq2.size == 24


def test_rejects_bad_zero_fill():
    with pytest.raises(SpectralInputError):
        dft2(np.ones((4, 4)), zero_fill=0)


def test_rejects_grid_mismatch():
    with pytest.raises(SpectralInputError):
        dft2(np.ones((4, 4)), EseemGrid(n1=5, n2=4))


def test_magnitude_of_zero_spectrum():
    spectrum = dft2(np.zeros((6, 6)))
    assert not np.any(magnitude(spectrum))
    assert find_peaks(spectrum) == []


def test_flat_spectrum_has_no_peaks():
    axis = np.arange(5, dtype=float)
    spectrum = Spectrum2D(values=np.ones((5, 5), dtype=complex), freq1=axis, freq2=axis)
    assert find_peaks(spectrum, 0.3) == []


@pytest.mark.parametrize("threshold", [0.0, 1.0, -0.2, 1.5])
def test_rejects_threshold_outside_unit_interval(threshold):
    with pytest.raises(SpectralInputError):
        find_peaks(dft2(np.ones((4, 4))), threshold)


def test_spectrum_rejects_decreasing_axis():
    with pytest.raises(ValueError):
        Spectrum2D(values=np.ones((2, 2)), freq1=np.array([1.0, 0.0]), freq2=np.array([0.0, 1.0]))


def on_bin_peaks(grid):
    width = 1 / (grid.n1 * grid.dt1)
    bins = [(5, 7, 1.0), (10, 13, 0.9), (17, 20, 0.8), (24, 27, 0.7)]
    return [SyntheticPeak(nu1=k1 * width, nu2=k2 * width, amplitude=a) for k1, k2, a in bins], width


def test_synthetic_peaks_are_recovered():
    grid = EseemGrid(n1=64, n2=64, dt1=1e-7, dt2=1e-7)
    peaks, width = on_bin_peaks(grid)
    spectrum = dft2(synthetic_low_rank_signal(peaks, grid), grid)
    found = find_peaks(spectrum, 0.3)

    expected = {
        (s1 * p.nu1, s2 * p.nu2) for p in peaks for s1 in (1, -1) for s2 in (1, -1)
    }
    assert len(found) == len(expected)
    for peak in found:
        assert min(abs(peak.nu1 - e1) + abs(peak.nu2 - e2) for e1, e2 in expected) <= width
    amplitudes = [p.amplitude for p in found]
    assert amplitudes == sorted(amplitudes, reverse=True)
    assert found[0].amplitude == pytest.approx(64 * 64 / 4, rel=1e-9)


def test_peaks_are_scale_invariant():
    grid = EseemGrid(n1=64, n2=64, dt1=1e-7, dt2=1e-7)
    peaks, _ = on_bin_peaks(grid)
    M = synthetic_low_rank_signal(peaks, grid)
    base = find_peaks(dft2(M, grid), 0.3)
    scaled = find_peaks(dft2(3.0 * M, grid), 0.3)
    assert [(p.index1, p.index2) for p in base] == [(p.index1, p.index2) for p in scaled]
    for a, b in zip(base, scaled):
        assert b.amplitude == pytest.approx(3.0 * a.amplitude, rel=1e-12)
