"""Acceptance gate: one test per release criterion, at pinned tolerances.

Each test prints a single PASS/FAIL line (visible with `pytest -s`; the
-v test report carries the same verdicts). The heavy waterfall runs push
at least 10^9 information bits through each catalog configuration.
"""

import itertools
import math
import time
import zlib

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from fibercm.bch import BchCode, build_code, g709_component
from fibercm.constellation import RingConstellation, draw_symbols, set_average_power
from fibercm.field import OpticalField
from fibercm.params import (
    PropagationPlan,
    STANDARD_FIBER,
    dbm_to_watts,
)
from fibercm.rxdsp import (
    back_rotate,
    backpropagate,
    estimate_xpm_phase,
    evm_db,
    extract_channel,
    linear_equalize,
    sample_symbols,
)
from fibercm.shaping import (
    ShapingCodeSpec,
    bicm_demap_hard,
    bicm_map,
    build_constellation,
    conv_encode,
    coset_map,
    recover_shaping_bits,
    shape,
    uniform_quadrant_energy,
)
from fibercm.ssfm import linear_step, nonlinear_step, ssfm_propagate
from fibercm.staircase import (
    StaircaseParams,
    decode_stream,
    error_floor_estimate,
    minimal_stall_pattern,
    net_coding_gain,
    simulate_bsc,
    StaircaseEncoder,
)
from fibercm.stats import (
    RingGaussianModel,
    binary_entropy,
    fit_model,
    mutual_information,
    pragmatic_rate,
)
from fibercm.wdmtx import modulate

TS = 1e-11

# link/code catalog rows: (tag, m, t, g709, K, p_avg operating point)
CATALOG = [
    ("L500-EQ", 190, 4, False, 8, 1.61e-2),
    ("L500-BP", 510, 3, True, 8, 3.52e-3),
    ("L1000-EQ", 510, 3, True, 6, 3.88e-3),
    ("L1000-BP", 144, 4, False, 8, 2.22e-2),
    ("L2000-EQ", 120, 4, False, 6, 2.52e-2),
    ("L2000-BP", 628, 4, False, 6, 5.16e-3),
]


def _report(name, ok, detail):
    print(f"ACCEPTANCE {'PASS' if ok else 'FAIL'}: {name} ({detail})")
    assert ok, f"{name}: {detail}"


def _params_for(m, t, is_g709):
    if is_g709:
        return StaircaseParams.g709()
    return StaircaseParams.create(m, t)


# ---------------------------------------------------------------- 1
def test_ssfm_correctness():
    # dispersion-only Gaussian broadening vs the closed form
    t0 = 10e-12
    b2 = STANDARD_FIBER.beta2
    z = math.sqrt(3.0) * t0**2 / abs(b2)
    n = 8192
    dt = 0.1e-12
    t = (np.arange(n) - n // 2) * dt
    fld = OpticalField(
        np.fft.ifftshift(np.exp(-(t**2) / (2 * t0**2)).astype(complex)), 1 / dt
    )
    out = linear_step(fld, b2, 0.0, z)
    i0 = np.abs(np.fft.fftshift(fld.samples)) ** 2
    i1 = np.abs(np.fft.fftshift(out.samples)) ** 2
    ratio = math.sqrt((t**2 * i1).sum() / i1.sum()) / math.sqrt(
        (t**2 * i0).sum() / i0.sum()
    )
    expect = math.sqrt(1 + (b2 * z / t0**2) ** 2)
    disp_err = abs(ratio - expect) / expect

    # SPM-only phase
    p0 = 1e-3
    f = OpticalField(np.full(256, math.sqrt(p0), complex), 1e12)
    g = nonlinear_step(f, STANDARD_FIBER.gamma, 1e6)
    spm_err = float(
        np.max(np.abs(np.angle(g.samples) - STANDARD_FIBER.gamma * p0 * 1e6))
    )

    # step-halving convergence
    rng = np.random.default_rng(9)
    frame = draw_symbols(RingConstellation(16, 1.0, 64), 512, 1, rng, TS)
    frame = set_average_power(frame, dbm_to_watts(4.0))
    sig = modulate(frame, 8)
    ref = ssfm_propagate(sig, STANDARD_FIBER, PropagationPlan(100e3, 125.0))
    errs = [
        np.linalg.norm(
            ssfm_propagate(sig, STANDARD_FIBER, PropagationPlan(100e3, h)).samples
            - ref.samples
        )
        / np.linalg.norm(ref.samples)
        for h in (2000.0, 1000.0)
    ]
    conv_ratio = errs[0] / errs[1]

    ok = disp_err < 1e-6 and spm_err < 1e-9 and conv_ratio >= 1.9
    _report(
        "ssfm-correctness",
        ok,
        f"broadening err {disp_err:.2e}, spm err {spm_err:.2e}, "
        f"halving ratio {conv_ratio:.2f}",
    )


# ---------------------------------------------------------------- 2
def test_backpropagation_invertibility():
    rng = np.random.default_rng(11)
    frame = draw_symbols(RingConstellation(16, 1.0, 64), 1024, 1, rng, TS)
    frame = set_average_power(frame, dbm_to_watts(0.0))
    field = modulate(frame, 8)
    t_start = time.time()
    fwd = ssfm_propagate(field, STANDARD_FIBER, PropagationPlan(1000e3, 100.0))
    rx = backpropagate(extract_channel(fwd, 0, TS), STANDARD_FIBER, 1000e3, 1000.0)
    sym = sample_symbols(rx, TS, guard=32)
    evm = evm_db(sym, frame.symbols[32:-32, 0])
    ok = evm <= -40.0 and (time.time() - t_start) < 300
    _report(
        "backpropagation-invertibility",
        ok,
        f"EVM {evm:.1f} dB at 0 dBm over 1000 km, {time.time() - t_start:.0f}s",
    )


# ---------------------------------------------------------------- 3
def test_noise_calibration():
    length = 2e6
    n_ase = STANDARD_FIBER.noise_psd(length)
    fld = OpticalField(np.zeros(2**16, complex), 1.6e12)
    out = ssfm_propagate(
        fld, STANDARD_FIBER,
        PropagationPlan(length, 4e3, noise_enabled=True, noise_seed=12),
    )
    psd = out.power() / out.sample_rate
    rel = abs(psd - n_ase) / n_ase
    ok = rel < 0.02 and abs(n_ase - 1.333e-17) / 1.333e-17 < 5e-3
    _report(
        "noise-calibration",
        ok,
        f"N_ASE {n_ase:.4e} W/Hz, measured {psd:.4e}, rel err {rel:.3%}",
    )


# ---------------------------------------------------------------- 4
def test_mi_estimator_oracle():
    # synthetic 2-ring / 8-phase channel vs dense quadrature
    model = RingGaussianModel(
        radii=np.array([1.0, 2.0]),
        mu=np.array([1.02 + 0.05j, 1.95 - 0.1j]),
        cov=np.array(
            [[[0.04, 0.01], [0.01, 0.03]], [[0.05, -0.005], [-0.005, 0.06]]]
        ),
        counts=np.array([10**6, 10**6]),
    )
    xs = np.linspace(-3.6, 3.6, 481)
    dx = xs[1] - xs[0]
    gx, gy = np.meshgrid(xs, xs)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    dens = []
    for i in range(2):
        for q in range(8):
            phi = 2 * np.pi * q / 8
            rotm = np.array(
                [[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]]
            )
            mean = rotm @ np.array([model.mu[i].real, model.mu[i].imag])
            cov = rotm @ model.cov[i] @ rotm.T
            dens.append(multivariate_normal(mean, cov).pdf(pts))
    dens = np.stack(dens)
    fy = dens.mean(axis=0)
    oracle = 0.0
    for d in dens:
        mask = d > 1e-300
        oracle += np.sum(d[mask] * np.log2(d[mask] / fy[mask])) * dx * dx
    oracle /= len(dens)
    mi, se = mutual_information(model, 8, 60000, np.random.default_rng(5))
    mc_ok = abs(mi - oracle) < 3 * se + 1e-3

    # gamma = 0 link: fitted-model MI vs the Gaussian-channel curve
    from dataclasses import replace as drep

    fiber0 = drep(STANDARD_FIBER, gamma=0.0)
    n_ase = fiber0.noise_psd(1000e3)
    diffs = []
    rng = np.random.default_rng(21)
    for snr_db_target in (5.0, 7.0):
        p = 10 ** (snr_db_target / 10) * n_ase / TS
        const = RingConstellation(16, 1.0, 64)
        frame = draw_symbols(const, 4096, 1, rng, TS)
        scale = math.sqrt(p * TS / frame.mean_symbol_power())
        frame = drep(frame, symbols=frame.symbols * scale)
        fld = modulate(frame, 8)
        out = ssfm_propagate(
            fld, fiber0,
            PropagationPlan(1000e3, 2000.0, noise_enabled=True, noise_seed=31),
        )
        rx = linear_equalize(extract_channel(out, 0, TS), fiber0.beta2, 1000e3)
        sym = sample_symbols(rx, TS, guard=32)
        tx = frame.symbols[32:-32, 0]
        rings = frame.ring_indices[32:-32, 0]
        phi = estimate_xpm_phase(sym, tx)
        mdl = fit_model(back_rotate(sym, tx, phi), rings, const.radii * scale)
        mi_link, _ = mutual_information(mdl, 64, 40000, np.random.default_rng(9))
        snr_meas = np.mean(np.abs(tx) ** 2) / np.mean(np.abs(sym - tx) ** 2)
        diffs.append(abs(mi_link - math.log2(1 + snr_meas)))
    awgn_ok = max(diffs) < 0.1
    _report(
        "mi-estimator-oracle",
        mc_ok and awgn_ok,
        f"MC {mi:.4f} vs quadrature {oracle:.4f} (se {se:.4f}); "
        f"gamma=0 gaps {['%.3f' % d for d in diffs]} bits",
    )


# ---------------------------------------------------------------- 5
def test_bp_vs_eq_ordering():
    """Reduced-scale spectral-efficiency sweep: BP curve sits on or above EQ
    everywhere and peaks strictly higher."""
    rng_master = 77
    powers = (-8.0, -6.0, -4.0, -2.0, 0.0)
    length = 1000e3
    const = RingConstellation(16, 1.0, 64)
    results = {"BP": [], "EQ": []}
    for i, p_dbm in enumerate(powers):
        rng = np.random.default_rng((rng_master, i))
        frame = draw_symbols(const, 2048, 5, rng, TS)
        target = dbm_to_watts(p_dbm)
        scale = math.sqrt(target * TS / frame.mean_symbol_power())
        from dataclasses import replace as drep

        frame = drep(frame, symbols=frame.symbols * scale)
        field = modulate(frame, 8)
        out = ssfm_propagate(
            field, STANDARD_FIBER,
            PropagationPlan(length, 100.0, noise_enabled=True,
                            noise_seed=1000 + i),
        )
        coi = extract_channel(out, 0, TS)
        tx = frame.symbols[32:-32, frame.coi_column]
        rings = frame.ring_indices[32:-32, frame.coi_column]
        for comp in ("BP", "EQ"):
            if comp == "BP":
                comp_field = backpropagate(coi, STANDARD_FIBER, length, 1000.0)
            else:
                comp_field = linear_equalize(coi, STANDARD_FIBER.beta2, length)
            sym = sample_symbols(comp_field, TS, guard=32)
            phi = estimate_xpm_phase(sym, tx)
            mdl = fit_model(back_rotate(sym, tx, phi), rings, const.radii * scale)
            mi, se = mutual_information(
                mdl, 64, 20000, np.random.default_rng((rng_master, i, comp == "BP"))
            )
            results[comp].append((mi, se))
    ordering_ok = all(
        bp[0] >= eq[0] - 3 * math.hypot(bp[1], eq[1])
        for bp, eq in zip(results["BP"], results["EQ"])
    )
    peak_gap = max(m for m, _ in results["BP"]) - max(m for m, _ in results["EQ"])
    ok = ordering_ok and peak_gap > 0
    detail = ", ".join(
        f"{p:+.0f}dBm BP {bp[0]:.3f} EQ {eq[0]:.3f}"
        for p, bp, eq in zip(powers, results["BP"], results["EQ"])
    )
    _report("bp-vs-eq-ordering", ok, f"peak gap {peak_gap:+.3f} bits; {detail}")


# ---------------------------------------------------------------- 6
def test_bch_exhaustive_oracle():
    toy = BchCode.build(15, 3)
    codewords = [
        toy.encode(np.array(bits, dtype=np.uint8))
        for bits in itertools.product([0, 1], repeat=5)
    ]
    patterns = [()]
    for w in (1, 2, 3):
        patterns.extend(itertools.combinations(range(15), w))
    exhaustive_fail = 0
    for cw in codewords:
        for pat in patterns:
            rx = cw.copy()
            for p in pat:
                rx[p] ^= 1
            res = toy.decode(rx)
            if res is None or not np.array_equal(res[0], cw):
                exhaustive_fail += 1
    _report(
        "bch-exhaustive-toy",
        exhaustive_fail == 0,
        f"{len(codewords) * len(patterns)} cases, {exhaustive_fail} failures",
    )


@pytest.mark.parametrize(
    "codename",
    ["240-t4", "288-t4", "380-t4", "1256-t4", "g709"],
)
def test_bch_randomized_production(codename):
    if codename == "g709":
        code = g709_component()
    else:
        two_m, t = codename.split("-t")
        code = build_code(int(two_m), int(t))
    rng = np.random.default_rng(zlib.crc32(codename.encode()))
    trials = 1_000_000
    chunk = 100_000
    failures = 0
    for _ in range(trials // chunk):
        msgs = rng.integers(0, 2, (chunk, code.message_bits), dtype=np.uint8)
        words = code.encode_batch(msgs)
        clean = words.copy()
        nerr = rng.integers(0, code.t + 1, chunk)
        for i in range(chunk):
            pos = rng.choice(code.length, nerr[i], replace=False)
            words[i, pos] ^= 1
        status = code.decode_batch_inplace(words)
        failures += int((status != nerr).sum())
        failures += int((words != clean).any(axis=1).sum())
    _report(
        f"bch-randomized-{codename}",
        failures == 0,
        f"{trials} trials of <= t errors, {failures} failures",
    )


# ---------------------------------------------------------------- 7
@pytest.mark.parametrize("tag,m,t,is_g709,k,p_avg", CATALOG)
def test_staircase_waterfall_catalog(tag, m, t, is_g709, k, p_avg):
    params = _params_for(m, t, is_g709)
    t0 = time.time()
    res = simulate_bsc(
        params, p_avg, np.random.default_rng(zlib.crc32(tag.encode())), 10**9
    )
    dt = time.time() - t0
    ok = res["ber"] < 1e-6 and res["bits"] >= 10**9 and dt < 3600
    _report(
        f"staircase-waterfall-{tag}",
        ok,
        f"p={p_avg}: BER {res['ber']:.2e} over {res['bits']:.2e} info bits "
        f"({res['errors']} errors, {dt:.0f}s)",
    )


def test_staircase_waterfall_g709_threshold():
    params = StaircaseParams.g709()
    t0 = time.time()
    res = simulate_bsc(params, 4.8e-3, np.random.default_rng(20480), 10**9)
    dt = time.time() - t0
    ok = res["ber"] < 1e-6 and res["bits"] >= 10**9 and dt < 3600
    _report(
        "staircase-waterfall-g709-4.8e-3",
        ok,
        f"BER {res['ber']:.2e} over {res['bits']:.2e} info bits "
        f"({res['errors']} errors, {dt:.0f}s)",
    )


# ---------------------------------------------------------------- 8
def test_error_floor_catalog():
    floors = {}
    for tag, m, t, is_g709, k, p_avg in CATALOG:
        params = _params_for(m, t, is_g709)
        floors[tag] = error_floor_estimate(params, p_avg)
    ok = all(v < 1e-20 for v in floors.values())
    _report(
        "error-floor-catalog",
        ok,
        "; ".join(f"{k}={v:.1e}" for k, v in floors.items()),
    )


def test_error_floor_stall_pattern():
    params = StaircaseParams.create(16, 2)
    rng = np.random.default_rng(6)
    enc = StaircaseEncoder(params)
    blocks = np.stack(
        [
            enc.encode_next(
                rng.integers(0, 2, (16, params.info_cols), dtype=np.uint8)
            )
            for _ in range(12)
        ]
    )
    stalled = 0
    for rows, cols in [
        ([2, 7, 11], [1, 8, 13]),
        ([0, 5, 15], [3, 9, 14]),
        ([4, 6, 10], [0, 2, 12]),
    ]:
        mask = minimal_stall_pattern(params, rows, cols)
        noisy = blocks.copy()
        noisy[5] ^= mask
        decoded, _ = decode_stream(params, noisy, blocks)
        if not np.array_equal(decoded[5], blocks[5]):
            stalled += 1
    _report(
        "error-floor-stall-pattern",
        stalled == 3,
        f"{stalled}/3 injected minimal patterns left uncorrected",
    )


# ---------------------------------------------------------------- 9
def test_ncg_reproduction():
    got1 = net_coding_gain(3 / 4, 2.22e-2, 1e-15)
    got2 = net_coding_gain(239 / 255, 4.8e-3, 1e-15)
    ok = abs(got1 - 10.68) <= 0.05 and abs(got2 - 9.41) <= 0.05
    _report(
        "ncg-reproduction",
        ok,
        f"R=3/4: {got1:.3f} dB (target 10.68); R=239/255: {got2:.3f} dB "
        f"(target 9.41)",
    )


# ---------------------------------------------------------------- 10
def test_pragmatic_rate_identities():
    ip_expect = {
        ("L500-EQ"): 8.05, ("L500-BP"): 8.73, ("L1000-EQ"): 6.78,
        ("L1000-BP"): 7.77, ("L2000-EQ"): 5.98, ("L2000-BP"): 6.72,
    }
    se_expect = {
        "L500-EQ": 7.48, "L500-BP": 8.50, "L1000-EQ": 6.62,
        "L1000-BP": 7.00, "L2000-EQ": 5.40, "L2000-BP": 6.58,
    }
    bad = []
    for tag, m, t, is_g709, k, p_avg in CATALOG:
        ip = round(pragmatic_rate(k, p_avg), 2)
        se = round(1 + k * _params_for(m, t, is_g709).rate, 2)
        if ip != ip_expect[tag] or se != se_expect[tag]:
            bad.append((tag, ip, se))
    _report(
        "pragmatic-rate-identities",
        not bad,
        "all six I_P and K*R+1 values reproduced" if not bad else f"mismatch {bad}",
    )


# ---------------------------------------------------------------- 11
def test_shaping_acceptance():
    spec = ShapingCodeSpec()
    c6 = build_constellation(6)
    rng = np.random.default_rng(55)

    # lossless syndrome-former recovery on noiseless frames
    n = 20000
    s = rng.integers(0, 2, n, dtype=np.uint8)
    labels = rng.integers(0, 64, n)
    syms, quad = shape(spec, s, labels, c6)
    coded, q2 = bicm_demap_hard(syms, c6)
    lossless = np.array_equal(recover_shaping_bits(spec, q2), s) and np.array_equal(
        bicm_map(coded, 6), labels
    )

    # energy reduction for K=6 over >= 1e5 symbols
    n2 = 120_000
    labels2 = rng.integers(0, 64, n2)
    s2 = rng.integers(0, 2, n2, dtype=np.uint8)
    syms2, _ = shape(spec, s2, labels2, c6)
    gain = 10 * math.log10(
        uniform_quadrant_energy(c6, labels2) / float(np.mean(np.abs(syms2) ** 2))
    )

    # small-frame Viterbi optimality vs exhaustive coset search
    c2 = build_constellation(2)
    energies = c2.energies_by_label()
    optimal = True
    for _ in range(6):
        nf = 11
        sf = rng.integers(0, 2, nf, dtype=np.uint8)
        lf = rng.integers(0, 4, nf)
        symf, _ = shape(ShapingCodeSpec(traceback_depth=64), sf, lf, c2)
        got = float(np.sum(np.abs(symf) ** 2))
        t = coset_map(sf)
        best = min(
            float(
                energies[
                    lf
                    | ((conv_encode(np.array(b, dtype=np.uint8)) ^ t)[:, 0] << 2)
                    | ((conv_encode(np.array(b, dtype=np.uint8)) ^ t)[:, 1] << 3)
                ].sum()
            )
            for b in itertools.product([0, 1], repeat=nf)
        )
        if not math.isclose(got, best, rel_tol=1e-12):
            optimal = False
    ok = lossless and gain >= 0.5 and optimal
    _report(
        "shaping",
        ok,
        f"recovery lossless={lossless}, K=6 gain {gain:.2f} dB, "
        f"small-frame optimal={optimal}",
    )
