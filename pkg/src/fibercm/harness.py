"""Batch experiment driver: capacity sweeps, BER waterfalls, and the full
pragmatic coded-modulation chain, all emitting versioned CSV."""

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .config import ExperimentConfig
from .constellation import RingConstellation, draw_symbols, SymbolFrame
from .field import OpticalField
from .params import (
    STANDARD_FIBER,
    PropagationPlan,
    dbm_to_watts,
)
from .rxdsp import (
    back_rotate,
    backpropagate,
    estimate_xpm_phase,
    extract_channel,
    linear_equalize,
    sample_symbols,
)
from .shaping import (
    BlockInterleaver,
    ShapingCodeSpec,
    bicm_demap_hard,
    bicm_map,
    build_constellation,
    recover_shaping_bits,
    shape,
    uniform_quadrant_energy,
)
from .ssfm import ssfm_propagate
from .staircase import StaircaseParams, decode_stream, simulate_bsc, StaircaseEncoder
from .stats import (
    SnrSpec,
    fit_model,
    mutual_information,
    pragmatic_rate,
    snr_db,
)
from .wdmtx import modulate

CSV_SCHEMAS = {
    "capacity": (
        "capacity.v1",
        ["length_m", "comp", "power_dbm", "snr_db", "mi_bits", "mi_stderr",
         "seed", "config_hash"],
    ),
    "waterfall": (
        "waterfall.v1",
        ["code", "p_in", "ber_out", "bits_simulated", "errors", "blocks",
         "seed", "config_hash"],
    ),
    "pragmatic": (
        "pragmatic.v1",
        ["length_m", "comp", "k_coded", "rate", "p_avg", "i_p", "se_achieved",
         "post_fec_ber", "shaping_ber", "snr_db", "power_dbm", "seed",
         "config_hash"],
    ),
    "shape": (
        "shape.v1",
        ["k_coded", "symbols", "shaped_energy", "uniform_energy",
         "reduction_db", "seed", "config_hash"],
    ),
}

# Catalog of link / staircase-code pairings: block size m, corrector t,
# coded bits per symbol K, operating crossover p_avg, launch power (dBm).
# The two 239/255-rate systems share the standards-compatible component.
PRESET_SYSTEMS = {
    "L500-EQ": dict(length=500e3, comp="EQ", k=8, m=190, t=4,
                    p_avg=1.61e-2, power_dbm=-6.0, g709=False),
    "L500-BP": dict(length=500e3, comp="BP", k=8, m=510, t=3,
                    p_avg=3.52e-3, power_dbm=-4.0, g709=True),
    "L1000-EQ": dict(length=1000e3, comp="EQ", k=6, m=510, t=3,
                     p_avg=3.88e-3, power_dbm=-6.0, g709=True),
    "L1000-BP": dict(length=1000e3, comp="BP", k=8, m=144, t=4,
                     p_avg=2.22e-2, power_dbm=-4.0, g709=False),
    "L2000-EQ": dict(length=2000e3, comp="EQ", k=6, m=120, t=4,
                     p_avg=2.52e-2, power_dbm=-6.0, g709=False),
    "L2000-BP": dict(length=2000e3, comp="BP", k=6, m=628, t=4,
                     p_avg=5.16e-3, power_dbm=-4.0, g709=False),
}

CODE_PRESETS = {
    "g709": lambda: StaircaseParams.g709(),
    "m120-t4": lambda: StaircaseParams.create(120, 4),
    "m144-t4": lambda: StaircaseParams.create(144, 4),
    "m190-t4": lambda: StaircaseParams.create(190, 4),
    "m628-t4": lambda: StaircaseParams.create(628, 4),
}


def staircase_params_for(name: str) -> StaircaseParams:
    preset = PRESET_SYSTEMS[name]
    if preset["g709"]:
        return StaircaseParams.g709()
    return StaircaseParams.create(preset["m"], preset["t"])


def _seed_for(master: int, family: int, *indices) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master, spawn_key=(family, *indices))


def _seed_int(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(2, dtype=np.uint64)[0])


def write_csv(path, kind: str, rows):
    schema, columns = CSV_SCHEMAS[kind]
    with open(path, "w", newline="") as f:
        f.write(f"# fibercm-csv schema={schema}\n")
        w = csv.writer(f)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])
    return path


def _fmt(v):
    if isinstance(v, float):
        return repr(float(v))
    return v


def read_csv(path):
    """Read a harness CSV; returns (schema, list of dict rows)."""
    with open(path, newline="") as f:
        first = f.readline().strip()
        if not first.startswith("# fibercm-csv schema="):
            raise ValueError(f"{path}: missing schema header")
        schema = first.split("=", 1)[1]
        rows = list(csv.DictReader(f))
    return schema, rows


# ----- capacity sweep -----


def _comp_list(cfg: ExperimentConfig):
    return ("BP", "EQ") if cfg.compensation == "BOTH" else (cfg.compensation,)


def capacity_point(cfg: ExperimentConfig, power_dbm: float, seed: int, index: int):
    """Simulate one launch power; BP and EQ share the propagated field."""
    fiber = STANDARD_FIBER
    ts = cfg.symbol_period
    target = dbm_to_watts(power_dbm)
    rng = np.random.default_rng(_seed_for(seed, 0, index, 0))
    const = RingConstellation(cfg.rings, 1.0, cfg.phase_levels)
    frame = draw_symbols(const, cfg.slots, cfg.channels, rng, ts)
    scale = math.sqrt(target * ts / frame.mean_symbol_power())
    frame = replace(frame, symbols=frame.symbols * scale)
    radii = const.radii * scale

    field = modulate(frame, cfg.oversampling)
    plan = PropagationPlan(
        cfg.length,
        cfg.forward_step,
        noise_enabled=True,
        noise_seed=_seed_int(_seed_for(seed, 0, index, 1)),
    )
    received = ssfm_propagate(field, fiber, plan)
    coi = extract_channel(received, 0, ts)

    g = cfg.guard_slots
    sl = slice(g, cfg.slots - g) if g else slice(None)
    tx = frame.symbols[sl, frame.coi_column]
    tx_rings = frame.ring_indices[sl, frame.coi_column]
    spec = SnrSpec(target, fiber.noise_psd(cfg.length), cfg.snr_bandwidth)

    rows = []
    for ci, comp in enumerate(_comp_list(cfg)):
        if comp == "BP":
            compensated = backpropagate(coi, fiber, cfg.length, cfg.bp_step)
        else:
            compensated = linear_equalize(coi, fiber.beta2, cfg.length)
        rx = sample_symbols(compensated, ts, guard=cfg.guard_slots)
        phi = estimate_xpm_phase(rx, tx)
        rotated = back_rotate(rx, tx, phi)
        model = fit_model(rotated, tx_rings, radii)
        mi, se = mutual_information(
            model,
            cfg.phase_levels,
            cfg.mc_samples,
            np.random.default_rng(_seed_for(seed, 0, index, 2 + ci)),
        )
        rows.append(
            {
                "length_m": cfg.length,
                "comp": comp,
                "power_dbm": power_dbm,
                "snr_db": snr_db(spec),
                "mi_bits": mi,
                "mi_stderr": se,
                "seed": seed,
                "config_hash": cfg.content_hash(),
            }
        )
    return rows


def run_capacity_sweep(cfg: ExperimentConfig, seed: int, out_dir, workers: int = 1):
    jobs = [(cfg, p, seed, i) for i, p in enumerate(cfg.powers_dbm)]
    results = _dispatch(capacity_point, jobs, workers)
    rows = [r for point in results for r in point]
    os.makedirs(out_dir, exist_ok=True)
    return write_csv(os.path.join(out_dir, "capacity.csv"), "capacity", rows)


# ----- BER waterfall -----


def waterfall_point(code_name: str, p_in: float, target_bits: int,
                    max_errors: int, seed: int, index: int, config_hash: str):
    params = CODE_PRESETS[code_name]()
    rng = np.random.default_rng(_seed_for(seed, 1, index))
    res = simulate_bsc(params, p_in, rng, target_bits, max_errors=max_errors)
    return {
        "code": code_name,
        "p_in": p_in,
        "ber_out": res["ber"],
        "bits_simulated": res["bits"],
        "errors": res["errors"],
        "blocks": res["blocks"],
        "seed": seed,
        "config_hash": config_hash,
    }


def run_ber_waterfall(cfg: ExperimentConfig, seed: int, out_dir, workers: int = 1):
    for name in cfg.codes:
        if name not in CODE_PRESETS:
            from .config import ConfigError

            raise ConfigError(f"unknown code preset {name!r}")
    jobs = []
    i = 0
    for name in cfg.codes:
        for p in cfg.p_values:
            jobs.append(
                (name, p, cfg.target_bits, cfg.max_errors, seed, i,
                 cfg.content_hash())
            )
            i += 1
    rows = _dispatch(waterfall_point, jobs, workers)
    os.makedirs(out_dir, exist_ok=True)
    return write_csv(os.path.join(out_dir, "waterfall.csv"), "waterfall", rows)


# ----- pragmatic end-to-end -----


def pragmatic_point(cfg: ExperimentConfig, system: str, seed: int, index: int):
    preset = PRESET_SYSTEMS[system]
    params = staircase_params_for(system)
    k_coded = preset["k"]
    rate = params.rate
    fiber = STANDARD_FIBER
    ts = cfg.symbol_period
    m = params.block_size
    length = cfg.pragmatic_length
    channels = cfg.pragmatic_channels
    target = dbm_to_watts(cfg.pragmatic_power_dbm)
    comp = preset["comp"]

    rng = np.random.default_rng(_seed_for(seed, 2, index, 0))
    spec = ShapingCodeSpec()
    constel = build_constellation(k_coded)

    # encode the staircase stream and interleave each block
    enc = StaircaseEncoder(params)
    truth = []
    tx_bits = []
    il_seed = _seed_int(_seed_for(seed, 2, index, 1))
    interleaver = BlockInterleaver(m * m, il_seed)
    for _ in range(cfg.blocks):
        info = rng.integers(0, 2, size=(m, params.info_cols), dtype=np.uint8)
        blk = enc.encode_next(info)
        truth.append(blk)
        tx_bits.append(interleaver.interleave(blk.reshape(-1)))
    truth = np.stack(truth)
    tx_bits = np.concatenate(tx_bits)

    usable = cfg.slots - 2 * cfg.guard_slots
    nsym_data = -(-len(tx_bits) // k_coded)
    n_frames = -(-nsym_data // usable)
    nsym = n_frames * usable
    pad = nsym * k_coded - len(tx_bits)
    stream_bits = np.concatenate(
        [tx_bits, rng.integers(0, 2, size=pad, dtype=np.uint8)]
    )
    labels = bicm_map(stream_bits, k_coded)
    data_bits = rng.integers(0, 2, size=nsym, dtype=np.uint8)
    tx_syms, tx_quad = shape(spec, data_bits, labels, constel)
    tx_scale = math.sqrt(target * ts / np.mean(np.abs(tx_syms) ** 2))

    rx_syms = np.empty(nsym, dtype=np.complex128)
    for f in range(n_frames):
        frame_syms = np.empty((cfg.slots, channels), dtype=np.complex128)
        for c in range(channels):
            if c == channels // 2:
                seg = tx_syms[f * usable: (f + 1) * usable]
                guard_rng = np.random.default_rng(
                    _seed_for(seed, 2, index, 10 + 3 * f)
                )
                col = np.concatenate(
                    [
                        _uniform_points(constel, cfg.guard_slots, guard_rng),
                        seg,
                        _uniform_points(constel, cfg.guard_slots, guard_rng),
                    ]
                )
            else:
                ch_rng = np.random.default_rng(
                    _seed_for(seed, 2, index, 11 + 3 * f, c)
                )
                nlab = ch_rng.integers(0, 1 << k_coded, size=cfg.slots)
                nbits = ch_rng.integers(0, 2, size=cfg.slots, dtype=np.uint8)
                col, _ = shape(spec, nbits, nlab, constel)
            frame_syms[:, c] = col * tx_scale
        frame = SymbolFrame(symbols=frame_syms, symbol_period=ts)
        field = modulate(frame, cfg.oversampling)
        plan = PropagationPlan(
            length,
            cfg.forward_step,
            noise_enabled=not cfg.noiseless,
            noise_seed=_seed_int(_seed_for(seed, 2, index, 12 + 3 * f)),
        )
        received = ssfm_propagate(field, fiber, plan)
        coi = extract_channel(received, 0, ts)
        if comp == "BP":
            compensated = backpropagate(coi, fiber, length, cfg.bp_step)
        else:
            compensated = linear_equalize(coi, fiber.beta2, length)
        rx_syms[f * usable: (f + 1) * usable] = sample_symbols(
            compensated, ts, guard=cfg.guard_slots
        )

    phi = estimate_xpm_phase(rx_syms, tx_syms * tx_scale)
    rx_rot = rx_syms * np.exp(-1j * phi) / tx_scale
    rx_bits, rx_quad = bicm_demap_hard(rx_rot, constel)

    p_avg = float(np.mean(rx_bits != stream_bits))
    s_rec = recover_shaping_bits(spec, rx_quad)
    shaping_ber = float(np.mean(s_rec != data_bits))

    # deinterleave the data region and run the staircase decoder
    noisy_blocks = np.empty_like(truth)
    for b in range(cfg.blocks):
        seg = rx_bits[b * m * m: (b + 1) * m * m]
        noisy_blocks[b] = interleaver.deinterleave(seg).reshape(m, m)
    _, post_fec = decode_stream(params, noisy_blocks, truth)

    i_p = pragmatic_rate(k_coded, min(p_avg, 0.5))
    snr = snr_db(
        SnrSpec(target, fiber.noise_psd(length), cfg.snr_bandwidth)
    ) if not cfg.noiseless else float("inf")
    return {
        "length_m": length,
        "comp": comp,
        "k_coded": k_coded,
        "rate": rate,
        "p_avg": p_avg,
        "i_p": i_p,
        "se_achieved": 1.0 + k_coded * rate,
        "post_fec_ber": post_fec,
        "shaping_ber": shaping_ber,
        "snr_db": snr,
        "power_dbm": cfg.pragmatic_power_dbm,
        "seed": seed,
        "config_hash": cfg.content_hash(),
    }


def _uniform_points(constel, n, rng):
    if n == 0:
        return np.empty(0, dtype=np.complex128)
    labs = rng.integers(0, constel.num_points, size=n)
    return constel.point_of_label[labs]


def run_pragmatic_endtoend(cfg: ExperimentConfig, seed: int, out_dir,
                           workers: int = 1):
    for name in cfg.systems:
        if name not in PRESET_SYSTEMS:
            from .config import ConfigError

            raise ConfigError(f"unknown system preset {name!r}")
    jobs = [(cfg, name, seed, i) for i, name in enumerate(cfg.systems)]
    rows = _dispatch(pragmatic_point, jobs, workers)
    os.makedirs(out_dir, exist_ok=True)
    return write_csv(os.path.join(out_dir, "pragmatic.csv"), "pragmatic", rows)


# ----- shaping demo -----


def run_shape_demo(cfg: ExperimentConfig, seed: int, out_dir):
    spec = ShapingCodeSpec()
    rows = []
    n = cfg.slots * 4
    for i, k in enumerate((2, 4, 6, 8)):
        constel = build_constellation(k)
        rng = np.random.default_rng(_seed_for(seed, 3, i))
        labels = rng.integers(0, 1 << k, size=n)
        data = rng.integers(0, 2, size=n, dtype=np.uint8)
        syms, _ = shape(spec, data, labels, constel)
        shaped = float(np.mean(np.abs(syms) ** 2))
        uniform = uniform_quadrant_energy(constel, labels)
        rows.append(
            {
                "k_coded": k,
                "symbols": n,
                "shaped_energy": shaped,
                "uniform_energy": uniform,
                "reduction_db": float(10.0 * np.log10(uniform / shaped)),
                "seed": seed,
                "config_hash": cfg.content_hash(),
            }
        )
    os.makedirs(out_dir, exist_ok=True)
    return write_csv(os.path.join(out_dir, "shape.csv"), "shape", rows)


def _dispatch(func, jobs, workers: int):
    if workers <= 1:
        return [func(*args) for args in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(func, *args) for args in jobs]
        return [f.result() for f in futures]
