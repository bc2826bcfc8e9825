"""Figure construction: spectral-efficiency curves and BER waterfalls."""

import os
from importlib import resources

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import CsvFormatError, Table

_COMP_STYLE = {
    "BP": dict(linestyle="-", marker="o", fillstyle="none"),
    "EQ": dict(linestyle="--", marker="s", fillstyle="none"),
}
_LENGTH_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
_CODE_MARKERS = ["o", "s", "D", "^", "v", "p"]


def style_path() -> str:
    return str(resources.files("figrender").joinpath("style/fibercm.mplstyle"))


def _km(length_m: float) -> str:
    return f"{length_m / 1e3:g} km"


def render_capacity(tables, out_path):
    """Curves of MI vs SNR per (length, comp); pragmatic rows become
    isolated filled markers."""
    curves = [t for t in tables if t.schema == "capacity.v1"]
    points = [t for t in tables if t.schema == "pragmatic.v1"]
    if not curves:
        raise CsvFormatError("capacity figure needs at least one capacity.v1 CSV")
    with plt.style.context(style_path()):
        fig, ax = plt.subplots()
        lengths = []
        for t in curves:
            for r in t.rows:
                lm = float(r["length_m"])
                if lm not in lengths:
                    lengths.append(lm)
        lengths.sort()
        for t in curves:
            groups = {}
            for r in t.rows:
                groups.setdefault((float(r["length_m"]), r["comp"]), []).append(r)
            for (lm, comp), rows in sorted(groups.items()):
                rows = sorted(rows, key=lambda r: float(r["snr_db"]))
                snr = [float(r["snr_db"]) for r in rows]
                mi = [float(r["mi_bits"]) for r in rows]
                err = [3 * float(r["mi_stderr"]) for r in rows]
                color = _LENGTH_COLORS[lengths.index(lm) % len(_LENGTH_COLORS)]
                ax.errorbar(
                    snr, mi, yerr=err, color=color,
                    label=f"{_km(lm)} {comp}", **_COMP_STYLE.get(comp, {}),
                )
        for t in points:
            for r in t.rows:
                lm = float(r["length_m"])
                color = (
                    _LENGTH_COLORS[lengths.index(lm) % len(_LENGTH_COLORS)]
                    if lm in lengths
                    else "black"
                )
                marker = "*" if r["comp"] == "BP" else "P"
                ax.plot(
                    float(r["snr_db"]), float(r["se_achieved"]),
                    marker=marker, color=color, markersize=11,
                    linestyle="none",
                    label=f"{_km(lm)} {r['comp']} coded",
                )
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("spectral efficiency (bits/s/Hz)")
        ax.legend(loc="best", ncol=2)
        _save(fig, out_path)
    return out_path


def render_waterfall(tables, out_path):
    """Post-FEC BER vs channel crossover probability, log-log.

    Zero-error points are drawn as downward triangles at the resolution
    floor 1 / bits_simulated (an upper bound, not a measurement)."""
    curves = [t for t in tables if t.schema == "waterfall.v1"]
    if not curves:
        raise CsvFormatError("waterfall figure needs at least one waterfall.v1 CSV")
    with plt.style.context(style_path()):
        fig, ax = plt.subplots()
        code_names = []
        for t in curves:
            for r in t.rows:
                if r["code"] not in code_names:
                    code_names.append(r["code"])
        for t in curves:
            groups = {}
            for r in t.rows:
                groups.setdefault(r["code"], []).append(r)
            for code, rows in sorted(groups.items()):
                rows = sorted(rows, key=lambda r: float(r["p_in"]))
                p = np.array([float(r["p_in"]) for r in rows])
                ber = np.array([float(r["ber_out"]) for r in rows])
                bits = np.array([float(r["bits_simulated"]) for r in rows])
                floor = 1.0 / bits
                shown = np.where(ber > 0, ber, floor)
                ci = code_names.index(code)
                color = _LENGTH_COLORS[ci % len(_LENGTH_COLORS)]
                marker = _CODE_MARKERS[ci % len(_CODE_MARKERS)]
                ax.plot(p, shown, color=color, marker=marker, label=code)
                zero = ber == 0
                if zero.any():
                    ax.plot(
                        p[zero], shown[zero], linestyle="none", marker="v",
                        color=color, fillstyle="none", markersize=9,
                    )
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("channel crossover probability")
        ax.set_ylabel("post-FEC bit error rate")
        ax.legend(loc="best")
        _save(fig, out_path)
    return out_path


def _save(fig, out_path):
    ext = os.path.splitext(out_path)[1].lower()
    if ext == ".svg":
        # strip the volatile date so repeated renders are byte-identical
        fig.savefig(out_path, metadata={"Date": None})
    elif ext == ".png":
        fig.savefig(out_path)
    else:
        raise CsvFormatError(f"unsupported figure format {ext!r} (png or svg)")
    plt.close(fig)
