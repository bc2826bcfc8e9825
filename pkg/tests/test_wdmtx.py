import numpy as np
import pytest

from fibercm.constellation import (
    RingConstellation,
    SymbolFrame,
    draw_symbols,
    load_frame_csv,
    save_frame_csv,
    set_average_power,
)
from fibercm.params import dbm_to_watts
from fibercm.rxdsp import extract_channel, sample_symbols
from fibercm.wdmtx import modulate

TS = 1e-11  # 100 GHz baud


def test_constellation_invariants():
    with pytest.raises(ValueError):
        RingConstellation(0, 1.0)
    with pytest.raises(ValueError):
        RingConstellation(4, -1.0)
    with pytest.raises(ValueError):
        RingConstellation(4, 1.0, phase_levels=2)
    c = RingConstellation(64, 0.5)
    assert len(c.radii) == 64
    assert c.mean_square() == pytest.approx(np.mean(c.radii**2))


def test_draw_single_ring_four_phases():
    rng = np.random.default_rng(0)
    c = RingConstellation(1, 2.0, phase_levels=4)
    fr = draw_symbols(c, 512, 1, rng, TS)
    assert np.allclose(np.abs(fr.symbols), 2.0)
    angles = np.angle(fr.symbols)
    grid = np.array([0, np.pi / 2, np.pi, -np.pi / 2])
    dist = np.abs(np.exp(1j * angles[:, :, None]) - np.exp(1j * grid)).min(axis=2)
    assert np.max(dist) < 1e-12


def test_ring_histogram_uniform():
    rng = np.random.default_rng(1)
    c = RingConstellation(8, 1.0, 64)
    n = 200_000
    fr = draw_symbols(c, n, 1, rng, TS)
    counts = np.bincount(fr.ring_indices.ravel(), minlength=9)[1:]
    expect = n / 8
    sigma = np.sqrt(n * (1 / 8) * (7 / 8))
    assert np.all(np.abs(counts - expect) < 3 * sigma)


def test_default_ring_count_matches_signaling_table():
    c = RingConstellation(64, 1.0)
    assert c.num_rings == 64
    assert c.phase_levels == 256


def test_back_to_back_identity():
    rng = np.random.default_rng(2)
    c = RingConstellation(16, 1.0, 64)
    fr = draw_symbols(c, 256, 1, rng, TS)
    field = modulate(fr, 4)
    rx = sample_symbols(field, TS)
    assert np.max(np.abs(rx - fr.symbols[:, 0])) < 1e-9 * np.abs(fr.symbols).max()


def test_five_channel_frame_and_leakage():
    """Adjacent channels contribute nothing after ideal extraction."""
    rng = np.random.default_rng(3)
    c = RingConstellation(8, 1.0, 32)
    fr = draw_symbols(c, 128, 5, rng, TS)
    field = modulate(fr, 8)
    for l in (-2, -1, 0, 1, 2):
        rx = sample_symbols(extract_channel(field, l, TS), TS)
        err = np.abs(rx - fr.symbols[:, l + 2]) ** 2
        assert err.max() < 1e-8 * np.abs(fr.symbols[:, l + 2]).max() ** 2


def test_too_narrow_grid_rejected():
    rng = np.random.default_rng(4)
    fr = draw_symbols(RingConstellation(4, 1.0, 16), 64, 5, rng, TS)
    with pytest.raises(ValueError):
        modulate(fr, 4)


def test_spectral_confinement():
    rng = np.random.default_rng(5)
    fr = draw_symbols(RingConstellation(8, 1.0, 32), 256, 3, rng, TS)
    field = modulate(fr, 8)
    spec = np.abs(np.fft.fft(field.samples)) ** 2
    ns = len(spec)
    idx = np.arange(ns)
    signed = np.where(idx < ns // 2, idx, idx - ns)
    k = 256
    total = spec.sum()
    in_band = spec[(signed >= -3 * k // 2) & (signed < 3 * k // 2)].sum()
    assert in_band / total > 0.999


def test_power_accounting():
    """Measured field power equals the frame's mean square over T_s."""
    rng = np.random.default_rng(6)
    fr = draw_symbols(RingConstellation(16, 1e-8, 64), 512, 5, rng, TS)
    field = modulate(fr, 8)
    expect = fr.num_channels * fr.mean_symbol_power() / TS
    assert abs(field.power() - expect) / expect < 1e-2


def test_set_average_power():
    rng = np.random.default_rng(7)
    fr = draw_symbols(RingConstellation(16, 1.0, 64), 1024, 5, rng, TS)
    for dbm in (-4.0, -6.0):
        target = dbm_to_watts(dbm)
        scaled = set_average_power(fr, target)
        field = modulate(scaled, 8)
        per_channel = field.power() / fr.num_channels
        assert abs(per_channel - target) / target < 1e-2
    doubled = set_average_power(fr, 2e-3)
    halved = set_average_power(fr, 1e-3)
    assert np.allclose(
        np.abs(doubled.symbols) ** 2, 2 * np.abs(halved.symbols) ** 2
    )
    zero = SymbolFrame(np.zeros((8, 1), complex), TS)
    with pytest.raises(ValueError):
        set_average_power(zero, 1e-3)


def test_frame_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    fr = draw_symbols(RingConstellation(4, 1.0, 16), 32, 3, rng, TS)
    path = tmp_path / "frame.csv"
    save_frame_csv(path, fr)
    back = load_frame_csv(path, TS)
    assert np.array_equal(back.symbols, fr.symbols)
