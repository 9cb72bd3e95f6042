"""Figure rendering for emitted artifacts.

Imports matplotlib lazily with the Agg backend so headless runs work and the
library itself never needs a display.  Every function writes one file and
returns its path.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_profile(path, grid, values, lam: float, title: str) -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    ax.plot(grid, values, lw=1.0)
    ax.axhline(0.0, color="gray", lw=0.5)
    ax.set_xlabel("x")
    ax.set_ylabel("u(x)")
    ax.set_title(f"{title}, eigenvalue {lam:g}")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def render_scan(path, lams, mismatches, root: float, title: str) -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    floor = 1e-18
    ax.semilogy(lams, np.maximum(np.asarray(mismatches, dtype=float), floor), lw=1.0)
    ax.axvline(root, color="tab:red", lw=0.8, ls="--", label=f"claimed root {root:g}")
    ax.set_xlabel("trial eigenvalue")
    ax.set_ylabel("decay-condition mismatch")
    ax.set_title(title)
    ax.grid(alpha=0.3, which="both")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def render_spectrum(path, eigenvalues, target: float, window: float, title: str) -> Path:
    plt = _plt()
    w = np.asarray(eigenvalues, dtype=float)
    sel = np.abs(w - target) <= window
    if not sel.any():
        sel = np.argsort(np.abs(w - target))[:25]
    idx = np.arange(w.size)
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    ax.plot(idx[sel], w[sel], "o", ms=3)
    ax.axhline(target, color="tab:red", lw=0.8, ls="--", label=f"target {target:g}")
    ax.set_xlabel("eigenvalue index")
    ax.set_ylabel("eigenvalue")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def render_race(path, bs, z1s, z3s, b_star: float | None, title: str) -> Path:
    plt = _plt()

    def gapped(zs):
        zs = np.asarray(zs, dtype=float).copy()
        zs[~np.isfinite(zs)] = np.nan
        return zs

    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    ax.plot(bs, gapped(z1s), lw=1.2, label="first zero of u'")
    ax.plot(bs, gapped(z3s), lw=1.2, label="first zero of u'''")
    if b_star is not None and math.isfinite(b_star):
        ax.axvline(b_star, color="tab:red", lw=0.8, ls="--", label=f"tie at B = {b_star:.6g}")
    ax.set_xlabel("B")
    ax.set_ylabel("zero position")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)
