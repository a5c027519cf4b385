"""Minimal SVG emission for reconstructions and residual curves.

Figures are written directly as SVG text: trajectories as polylines with line
width proportional to atom mass, jumps as dashed verticals, interval truths
as shaded bands, and a weight-labeled legend. No plotting library involved,
so outputs are deterministic byte for byte.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .core import CadlagSamples, Domain1D, SparseDiracMeasure, TimeGrid

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 60, 150, 36, 48
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#e377c2"]
_JUMP_DRAW_MIN = 5e-3  # fraction of the domain below which a jump is drawn solid


class _Frame:
    def __init__(self, x0, x1, y0, y1):
        self.x0, self.x1, self.y0, self.y1 = x0, x1, y0, y1

    def x(self, v):
        return _ML + (v - self.x0) / (self.x1 - self.x0) * (_W - _ML - _MR)

    def y(self, v):
        return _H - _MB - (v - self.y0) / (self.y1 - self.y0) * (_H - _MT - _MB)


def _polyline(points, color, width, dashed=False):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
    dash = ' stroke-dasharray="5,4"' if dashed else ""
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="{width:.2f}"{dash} '
        f'points="{pts}"/>'
    )


def _text(x, y, s, size=12, anchor="middle", color="#333"):
    return (
        f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" text-anchor="{anchor}" '
        f'fill="{color}" font-family="sans-serif">{s}</text>'
    )


def _axes(fr: _Frame, xlabel: str, ylabel: str, xticks, yticks, title: str = ""):
    el = [
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        _polyline([(fr.x(fr.x0), fr.y(fr.y0)), (fr.x(fr.x1), fr.y(fr.y0))], "#000", 1),
        _polyline([(fr.x(fr.x0), fr.y(fr.y0)), (fr.x(fr.x0), fr.y(fr.y1))], "#000", 1),
    ]
    for t, lab in xticks:
        el.append(_polyline([(fr.x(t), fr.y(fr.y0)), (fr.x(t), fr.y(fr.y0) + 4)], "#000", 1))
        el.append(_text(fr.x(t), fr.y(fr.y0) + 18, lab))
    for v, lab in yticks:
        el.append(_polyline([(fr.x(fr.x0) - 4, fr.y(v)), (fr.x(fr.x0), fr.y(v))], "#000", 1))
        el.append(_text(fr.x(fr.x0) - 8, fr.y(v) + 4, lab, anchor="end"))
    el.append(_text((_ML + _W - _MR) / 2, _H - 12, xlabel))
    el.append(_text(16, (_MT + _H - _MB) / 2, ylabel, anchor="middle"))
    if title:
        el.append(_text((_ML + _W - _MR) / 2, 20, title, size=14))
    return el


def _write(path, elements):
    body = "\n".join(elements)
    Path(path).write_text(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">\n{body}\n</svg>\n'
    )


def _trajectory_segments(curve: CadlagSamples, grid: TimeGrid, dom: Domain1D):
    """Split a sampled trajectory into drift polylines and jump verticals."""
    ts = grid.points
    gp, gm = curve.gamma_plus, curve.gamma_minus
    jump_min = _JUMP_DRAW_MIN * dom.diam
    drift, jumps = [], []
    current = [(ts[0], gp[0])]
    for j in range(1, ts.size):
        current.append((ts[j], gm[j]))
        if abs(gp[j] - gm[j]) > jump_min:
            drift.append(current)
            jumps.append(((ts[j], gm[j]), (ts[j], gp[j])))
            current = [(ts[j], gp[j])]
        else:
            current.append((ts[j], gp[j]))
    drift.append(current)
    return drift, jumps


def plot_reconstruction(
    measure: SparseDiracMeasure,
    grid: TimeGrid,
    dom: Domain1D,
    path,
    truth_measure: SparseDiracMeasure | None = None,
    truth_zeta: tuple[CadlagSamples, CadlagSamples] | None = None,
    title: str = "",
) -> None:
    fr = _Frame(0.0, 1.0, dom.lo, dom.hi)
    yticks = [(v, f"{v:g}") for v in np.linspace(dom.lo, dom.hi, 6)]
    el = _axes(fr, "t", "x", [(0, "0"), (0.5, "0.5"), (1, "1")], yticks, title)
    if truth_zeta is not None:
        lo, hi = truth_zeta
        top = [(fr.x(t), fr.y(v)) for t, v in zip(grid.points, hi.gamma_plus)]
        bot = [(fr.x(t), fr.y(v)) for t, v in zip(grid.points, lo.gamma_plus)]
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in top + bot[::-1])
        el.append(f'<polygon fill="#bbbbbb" fill-opacity="0.45" stroke="none" points="{pts}"/>')
    if truth_measure is not None:
        for atom in truth_measure.atoms:
            drift, jumps = _trajectory_segments(atom.curve, grid, dom)
            for seg in drift:
                el.append(_polyline([(fr.x(t), fr.y(v)) for t, v in seg], "#999999", 1.4))
            for (p0, p1) in jumps:
                el.append(
                    _polyline([(fr.x(p0[0]), fr.y(p0[1])), (fr.x(p1[0]), fr.y(p1[1]))],
                              "#999999", 1.0, dashed=True)
                )
    max_mass = max((a.mass for a in measure.atoms), default=1.0) or 1.0
    for i, atom in enumerate(measure.atoms):
        color = _COLORS[i % len(_COLORS)]
        width = 1.0 + 3.0 * atom.mass / max_mass
        drift, jumps = _trajectory_segments(atom.curve, grid, dom)
        for seg in drift:
            el.append(_polyline([(fr.x(t), fr.y(v)) for t, v in seg], color, width))
        for (p0, p1) in jumps:
            el.append(
                _polyline([(fr.x(p0[0]), fr.y(p0[1])), (fr.x(p1[0]), fr.y(p1[1]))],
                          color, width * 0.75, dashed=True)
            )
        ly = _MT + 16 + 18 * i
        el.append(_polyline([(_W - _MR + 12, ly - 4), (_W - _MR + 44, ly - 4)], color, width))
        el.append(_text(_W - _MR + 50, ly, f"m={atom.mass:.3f}", anchor="start"))
    if not measure.atoms:
        el.append(_text((_ML + _W - _MR) / 2, (_MT + _H - _MB) / 2, "empty measure"))
    _write(path, el)


def plot_residuals(residuals, path) -> None:
    r = np.asarray(residuals, dtype=np.float64)
    pos = r[r > 0]
    floor = float(pos.min()) * 0.5 if pos.size else 1e-16
    logs = np.log10(np.maximum(r, floor))
    lo = math.floor(float(logs.min()))
    hi = math.ceil(float(logs.max())) if logs.max() > logs.min() else lo + 1
    fr = _Frame(0.0, max(len(r) - 1, 1), lo, hi)
    xticks = [(k, str(k)) for k in range(0, len(r), max(1, len(r) // 6 or 1))]
    yticks = [(v, f"1e{v:d}") for v in range(lo, hi + 1)]
    el = _axes(fr, "k", "r0", xticks, yticks, "residual decay (log scale)")
    el.append(_polyline([(fr.x(k), fr.y(v)) for k, v in enumerate(logs)], _COLORS[0], 1.8))
    for k, v in enumerate(logs):
        el.append(
            f'<circle cx="{fr.x(k):.2f}" cy="{fr.y(v):.2f}" r="2.4" fill="{_COLORS[0]}"/>'
        )
    _write(path, el)
