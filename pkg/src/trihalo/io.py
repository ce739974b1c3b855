"""Deterministic file emission: CSV tables, JSON records, simple SVG plots.

All floating-point output goes through fmt() (12 significant digits) so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .fanofit import FitResult
from .spectrum import ThreeBodySpectrum, ThresholdScan

CURVE_HEADER = "E_keV,sigma_fm2"


def fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _round12(obj):
    """Recursively round floats to 12 significant digits for JSON emission."""
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_round12(obj), indent=2) + "\n")


def write_curve_csv(path, energies_keV, sigmas_fm2) -> None:
    lines = [CURVE_HEADER]
    for e, s in zip(energies_keV, sigmas_fm2):
        lines.append(f"{fmt(e)},{fmt(s)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_curve_csv(path):
    """Read an E_keV,sigma_fm2 table; returns (energies, sigmas) arrays."""
    text = Path(path).read_text().strip().splitlines()
    if not text or text[0].strip() != CURVE_HEADER:
        raise ConfigurationError(
            f"{path}: expected header '{CURVE_HEADER}', got {text[0]!r}"
            if text
            else f"{path}: empty file"
        )
    E, s = [], []
    for i, line in enumerate(text[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise ConfigurationError(f"{path}:{i}: expected two columns")
        try:
            E.append(float(parts[0]))
            s.append(float(parts[1]))
        except ValueError:
            raise ConfigurationError(f"{path}:{i}: non-numeric value") from None
    return np.array(E), np.array(s)


def write_spectrum_csv(path, spectrum: ThreeBodySpectrum) -> None:
    lines = ["n,epsilon3_keV"]
    for lv in spectrum.levels:
        lines.append(f"{lv.index},{fmt(lv.epsilon3_keV)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_scan_csv(path, scan: ThresholdScan) -> None:
    lines = ["epsilon2_keV,bound_excited_count"]
    for pt in scan.points:
        lines.append(f"{fmt(pt.epsilon2_keV)},{pt.bound_excited_count}")
    Path(path).write_text("\n".join(lines) + "\n")


def crossings_record(scan: ThresholdScan):
    return [
        {"state_index": c.state_index, "epsilon2_star_keV": c.epsilon2_star_keV}
        for c in scan.crossings
    ]


def fit_record(result: FitResult) -> dict:
    p = result.params
    rec = {"model": result.model}
    if result.model == "fano":
        rec.update(
            sigma0_fm2=p.sigma0_fm2, q=p.q, E_r_keV=p.E_r_keV, Gamma_keV=p.Gamma_keV
        )
    else:
        rec.update(
            sigma_bg_fm2=p.sigma_bg_fm2,
            amplitude_fm2=p.amplitude_fm2,
            E_r_keV=p.E_r_keV,
            Gamma_keV=p.Gamma_keV,
        )
    rec.update(
        residual_norm=result.residual_norm,
        converged=result.converged,
        iterations=result.iterations,
        covariance=[list(row) for row in result.covariance],
    )
    return rec


# --- minimal self-contained SVG -------------------------------------------


def _svg_path(xs, ys, color, width, dash=""):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (
        f'<polyline points="{pts}" fill="none" stroke="{color}" '
        f'stroke-width="{width}"{dash_attr}/>'
    )


def write_curve_svg(path, energies_keV, sigmas_fm2, overlay=None, title="") -> None:
    """Plot sigma(E) (log y) with an optional fitted-curve overlay.

    overlay: (energies, sigmas) of the model curve, drawn dashed.
    """
    W, H, pad = 640, 420, 56
    E = np.asarray(energies_keV, dtype=float)
    s = np.clip(np.asarray(sigmas_fm2, dtype=float), 1e-300, None)
    all_s = s if overlay is None else np.concatenate(
        [s, np.clip(np.asarray(overlay[1], dtype=float), 1e-300, None)]
    )
    x0, x1 = float(E[0]), float(E[-1])
    y0 = math.log10(float(np.min(all_s)))
    y1 = math.log10(float(np.max(all_s)))
    if y1 - y0 < 1e-12:
        y1 = y0 + 1.0
    if x1 - x0 < 1e-300:
        x1 = x0 + 1.0

    def X(e):
        return pad + (e - x0) / (x1 - x0) * (W - 2 * pad)

    def Y(v):
        return H - pad - (math.log10(max(v, 1e-300)) - y0) / (y1 - y0) * (H - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<line x1="{pad}" y1="{H-pad}" x2="{W-pad}" y2="{H-pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H-pad}" stroke="black"/>',
        _svg_path([X(e) for e in E], [Y(v) for v in s], "#1f4e9c", 1.5),
    ]
    if overlay is not None:
        oe, osig = overlay
        parts.append(
            _svg_path([X(e) for e in oe], [Y(v) for v in osig], "#c03020", 1.5, "6,4")
        )
    parts += [
        f'<text x="{W/2:.0f}" y="{H-14}" text-anchor="middle" '
        f'font-family="monospace" font-size="13">E_cm [keV]  '
        f"({fmt(x0)} to {fmt(x1)})</text>",
        f'<text x="18" y="{H/2:.0f}" text-anchor="middle" font-family="monospace" '
        f'font-size="13" transform="rotate(-90 18 {H/2:.0f})">'
        f"log10 sigma [fm^2]</text>",
    ]
    if title:
        parts.append(
            f'<text x="{W/2:.0f}" y="24" text-anchor="middle" '
            f'font-family="monospace" font-size="14">{title}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
