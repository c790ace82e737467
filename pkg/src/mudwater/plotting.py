"""SVG figures for runs and tables (presentation only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_snapshots", "plot_amplitudes", "plot_symbols", "plot_dispersion"]

# fixed ids and no timestamp keep the files reproducible
matplotlib.rcParams["svg.hashsalt"] = "mudwater"
_META = {"Date": None}


def _save(fig, path):
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def _snapshot_indices(n, count):
    if n <= count:
        return list(range(n))
    return sorted(set(np.linspace(0, n - 1, count).round().astype(int).tolist()))


def plot_snapshots(traj, path, count=6):
    """Interface profiles at evenly spaced stored times."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for i in _snapshot_indices(len(traj), count):
        prof = traj.profiles[i]
        x = np.append(prof.x, 2.0 * np.pi)
        y = np.append(prof.values, prof.values[0])
        ax.plot(x, y, label=f"t={traj.times[i]:.4g}")
    ax.set_xlim(0.0, 2.0 * np.pi)
    ax.set_xlabel("x")
    ax.set_ylabel("f(t, x)")
    ax.legend(fontsize="small")
    return _save(fig, path)


def plot_amplitudes(traj, path, modes=None):
    """|a_k(t)| on a log scale for the requested (or the largest initial) modes."""
    t = np.asarray(traj.times)
    coeffs = np.array([np.abs(p.coeffs) for p in traj.profiles])
    if modes is None:
        order = np.argsort(coeffs[0, 1:])[::-1] + 1
        modes = [int(k) for k in order[:4] if coeffs[0, k] > 0] or [1]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for k in modes:
        amp = coeffs[:, k]
        if np.any(amp > 0):
            ax.semilogy(t, np.where(amp > 0, amp, np.nan), label=f"k={k}")
    ax.set_xlabel("t")
    ax.set_ylabel("|a_k|")
    if ax.get_lines():
        ax.legend(fontsize="small")
    else:
        ax.text(0.5, 0.5, "all modes zero", transform=ax.transAxes, ha="center")
    return _save(fig, path)


def plot_symbols(k, m, lam, path):
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 3.2))
    a1.plot(k, m, "o-")
    a1.set_xlabel("k")
    a1.set_ylabel("m(k)")
    a2.plot(k, lam, "o-")
    a2.axhline(0.0, color="0.6", lw=0.8)
    a2.set_xlabel("k")
    a2.set_ylabel("lambda_k")
    return _save(fig, path)


def plot_dispersion(k, analytic, fitted, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(k, analytic, "-", label="symbol")
    ax.plot(k, fitted, "o", label="fitted")
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.set_xlabel("k")
    ax.set_ylabel("rate")
    ax.legend(fontsize="small")
    return _save(fig, path)
