"""Dickman's function rho on a uniform grid.

rho = 1 on [0, 1] and rho(u) = 1 - log u on [1, 2].  Beyond 2 the table
marches the integral form u rho(u) = int_{u-1}^{u} rho(t) dt.  The window
integral is re-evaluated at every step rather than updated by adding and
dropping a panel: the add/drop update is a differentiated form whose
errors stay constant in absolute size while rho decays, so its relative
error grows by roughly a factor u per unit step.

rho is only piecewise smooth (derivatives jump at the integers), so the
window is split at the integer it contains and each piece gets composite
weights built from six-node panel rules that never cross a segment
boundary.  Values are held on a per-segment scale and stored as log rho,
so tables reach u far past the point where rho underflows a double.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..core import DomainError

DEFAULT_STEP = 1.0 / 1024
DEFAULT_U_MAX = 20.0

_PANEL_NODES = 6
_INTERP_NODES = 6


@lru_cache(maxsize=None)
def _panel_weights(nodes: int, start: int) -> np.ndarray:
    """Weights w_k with int_{start}^{start+1} p(x) dx = sum w_k y_k for the
    interpolant p through (k, y_k), k = 0..nodes-1."""
    weights = np.empty(nodes)
    xs = np.arange(nodes, dtype=float)
    for k in range(nodes):
        others = np.delete(xs, k)
        poly = np.poly1d(others, r=True) / np.prod(xs[k] - others)
        anti = np.polyint(poly)
        weights[k] = anti(start + 1) - anti(start)
    return weights


def _segment_stencil(lo_idx: int, seg_start: int, seg_end: int, nodes: int) -> int:
    """First node of a ``nodes``-point stencil around panel [lo_idx, lo_idx+1]
    that stays inside [seg_start, seg_end]."""
    first = lo_idx - (nodes // 2 - 1)
    first = max(first, seg_start)
    first = min(first, seg_end - nodes + 1)
    return first


@lru_cache(maxsize=4096)
def _composite_weights(n: int) -> np.ndarray:
    """Weights (in units of h) for int over n panels, nodes 0..n, from
    per-panel interpolatory rules on min(6, n+1) nodes inside [0, n]."""
    if n == 0:
        return np.zeros(1)
    nodes = min(_PANEL_NODES, n + 1)
    w = np.zeros(n + 1)
    panels = np.arange(n)
    first = np.clip(panels - (nodes // 2 - 1), 0, n - nodes + 1)
    offsets = panels - first
    table = np.array([_panel_weights(nodes, k) for k in range(nodes - 1)])
    idx = first[:, None] + np.arange(nodes)[None, :]
    np.add.at(w, idx.ravel(), table[offsets].ravel())
    w.setflags(write=False)
    return w


@dataclass(frozen=True)
class DickmanTable:
    """rho sampled at 0, h, 2h, ..., u_max; interpolation is a 6-node
    Lagrange fit of log rho inside one unit segment."""

    u_max: float
    step: float
    log_values: np.ndarray = field(repr=False)
    interpolation: str = "lagrange6-log-segmentwise"

    @property
    def per_unit(self) -> int:
        return int(round(1.0 / self.step))

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_values)

    @property
    def grid(self) -> np.ndarray:
        return np.arange(len(self.log_values)) * self.step

    @classmethod
    def build(cls, u_max: float = DEFAULT_U_MAX, step: float = DEFAULT_STEP) -> "DickmanTable":
        per_unit = int(round(1.0 / step))
        if per_unit < 8 or abs(per_unit * step - 1.0) > 1e-12:
            raise DomainError("step must be 1/N for an integer N >= 8")
        if u_max < 2:
            raise DomainError("u_max must be at least 2")
        return cls(float(u_max), 1.0 / per_unit, _march(per_unit, u_max))

    def rho(self, u: float) -> float:
        return dickman_rho(u, self)

    def log_rho(self, u: float) -> float:
        return dickman_log_rho(u, self)

    def to_csv(self, every: int = 1) -> str:
        """``u,value`` rows at 15 significant digits."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["u", "value"])
        for i in range(0, len(self.log_values), every):
            writer.writerow([f"{i * self.step:.15g}", f"{math.exp(self.log_values[i]):.15g}"])
        return buf.getvalue()


def _march(N: int, u_max: float) -> np.ndarray:
    h = 1.0 / N
    top = int(math.ceil(u_max * N - 1e-9))
    # rho up to 2 in closed form
    log_rho = np.zeros(top + 1)
    i2 = min(2 * N, top)
    u = np.arange(N, i2 + 1) * h
    log_rho[N : i2 + 1] = np.log1p(-np.log(u))
    if top <= 2 * N:
        return log_rho

    # y holds rho on the current scale for the previous and current segment:
    # rho_i = y_i * exp(scale)
    y = np.concatenate([np.exp(log_rho[: 2 * N + 1]), np.zeros(top - 2 * N)])
    scale = 0.0

    for i in range(2 * N + 1, top + 1):
        seg = (i - 1) // N  # newest panel [i-1, i] lies in [seg, seg+1]
        seg_start = seg * N
        if i - 1 == seg_start:
            # finish the previous segment in log form, then rescale
            lo = (seg - 1) * N
            log_rho[lo + 1 : seg_start + 1] = np.log(y[lo + 1 : seg_start + 1]) + scale
            f = 1.0 / y[seg_start]
            y[lo : seg_start + 1] *= f
            scale -= math.log(f)

        # window [i-N, i] = [i-N, seg_start] (old segment) + [seg_start, i]
        wa = _composite_weights(seg_start - (i - N))
        wb = _composite_weights(i - seg_start)
        known = float(np.dot(wa, y[i - N : seg_start + 1]))
        known += float(np.dot(wb[:-1], y[seg_start:i]))
        ui = i * h
        y[i] = h * known / (ui - h * wb[-1])

    last_seg = (top - 1) // N
    lo = last_seg * N
    log_rho[lo + 1 : top + 1] = np.log(y[lo + 1 : top + 1]) + scale
    return log_rho


@lru_cache(maxsize=8)
def default_table(u_max: float = DEFAULT_U_MAX, step: float = DEFAULT_STEP) -> DickmanTable:
    return DickmanTable.build(u_max, step)


def dickman_log_rho(u: float, table: DickmanTable | None = None) -> float:
    if table is None:
        table = default_table(max(DEFAULT_U_MAX, math.ceil(u)))
    if u < 0 or u > table.u_max + 1e-12:
        raise DomainError(f"u={u} outside the table range [0, {table.u_max}]")
    if u <= 1.0:
        return 0.0
    N = table.per_unit
    x = u * N
    i = int(math.floor(x))
    if i >= len(table.log_values) - 1:
        return float(table.log_values[-1])
    frac = x - i
    if frac < 1e-12:
        return float(table.log_values[i])
    seg = i // N
    first = _segment_stencil(i, seg * N, min((seg + 1) * N, len(table.log_values) - 1), _INTERP_NODES)
    xs = np.arange(first, first + _INTERP_NODES, dtype=float)
    ys = table.log_values[first : first + _INTERP_NODES]
    return float(_lagrange(xs, ys, x))


def _lagrange(xs: np.ndarray, ys: np.ndarray, x: float) -> float:
    total = 0.0
    for k in range(len(xs)):
        term = ys[k]
        for m in range(len(xs)):
            if m != k:
                term *= (x - xs[m]) / (xs[k] - xs[m])
        total += term
    return total


def dickman_rho(u: float, table: DickmanTable | None = None) -> float:
    """Dickman's rho(u), 0 <= u <= u_max."""
    return math.exp(dickman_log_rho(u, table))


def log_derivative(table: DickmanTable) -> np.ndarray:
    """-rho'(u)/rho(u) = rho(u-1) / (u rho(u)) on grid points u > 1 (nan below)."""
    N = table.per_unit
    lv = table.log_values
    out = np.full(len(lv), np.nan)
    idx = np.arange(N + 1, len(lv))
    out[N + 1 :] = np.exp(lv[idx - N] - lv[idx]) / (idx * table.step)
    return out


B4 = 1.0 / (2.0 * (1.0 - math.log(2.0)))


def b4_constant(table: DickmanTable) -> float:
    """max over grid points 1 < u <= 2 of -rho'/rho."""
    N = table.per_unit
    return float(np.nanmax(log_derivative(table)[N + 1 : 2 * N + 1]))


def dickman_log_deriv_check(table: DickmanTable, u_range=(1.0, 10.0)) -> float:
    """sup over grid points in (lo, hi] of (-rho'/rho) / (1 + log u).

    Also confirms that the maximum of -rho'/rho over (1, 2] equals
    1/(2(1 - log 2)) to within 1e-3 and raises ``RuntimeError`` otherwise.
    """
    lo, hi = u_range
    if lo < 1 or hi <= lo or hi > table.u_max + 1e-12:
        raise DomainError(f"range ({lo}, {hi}] must lie in (1, {table.u_max}]")
    b4 = b4_constant(table)
    if abs(b4 - B4) > 1e-3:
        raise RuntimeError(f"max of -rho'/rho on (1,2] is {b4}, expected {B4}")
    N = table.per_unit
    ld = log_derivative(table)
    i_lo = int(math.floor(lo * N + 1e-9)) + 1
    i_hi = int(math.floor(hi * N + 1e-9))
    idx = np.arange(max(i_lo, N + 1), i_hi + 1)
    ratio = ld[idx] / (1.0 + np.log(idx * table.step))
    return float(np.max(ratio))
