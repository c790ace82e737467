"""Trajectory, diagnostics and restart files."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .evolution import DIAGNOSTIC_COLUMNS, SimState

__all__ = ["write_outputs", "write_trajectory_csv", "write_diagnostics_csv", "write_restart",
           "read_restart", "fmt", "write_table"]


def fmt(value):
    """Full-precision rendering used in every CSV."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def write_table(path, header, rows):
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def write_trajectory_csv(traj, path):
    """Long-form modal history: one row per (t, k) with ``k = 0..N/2``."""
    def rows():
        for t, prof in zip(traj.times, traj.profiles):
            for k, c in enumerate(prof.coeffs):
                yield (t, k, c.real, c.imag)

    return write_table(path, ("t", "k", "re", "im"), rows())


def write_diagnostics_csv(traj, path):
    rows = ([d[c] for c in DIAGNOSTIC_COLUMNS] for d in traj.diagnostics)
    return write_table(path, DIAGNOSTIC_COLUMNS, rows)


def write_restart(state, config, path, status="running"):
    data = {"format": "mudwater-restart", "version": 1, "status": status,
            "config": config.to_dict() if config is not None else None,
            "state": state.to_json()}
    path = Path(path)
    try:
        path.write_text(json.dumps(data, indent=1))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def read_restart(path, problem=None):
    """Return ``(state, config_dict)`` from a restart file."""
    data = json.loads(Path(path).read_text())
    if data.get("format") != "mudwater-restart":
        raise ValueError(f"{path} is not a restart file")
    return SimState.from_json(data["state"], problem), data.get("config")


def write_outputs(traj, config, directory=None, figures=None):
    """Write CSVs, a restart file and (optionally) SVG figures; return the paths."""
    if not len(traj):
        raise ValueError("empty trajectory")
    out = config.output
    directory = Path(directory if directory is not None else out.dir)
    directory.mkdir(parents=True, exist_ok=True)
    stem = directory / out.prefix
    paths = {
        "trajectory": write_trajectory_csv(traj, f"{stem}_trajectory.csv"),
        "diagnostics": write_diagnostics_csv(traj, f"{stem}_diagnostics.csv"),
    }
    if traj.final_state is not None:
        paths["restart"] = write_restart(traj.final_state, config, f"{stem}_restart.json", traj.status)
    summary = {"status": traj.status, "message": traj.message, "steps": len(traj) - 1,
               "t_final": traj.times[-1], "f_sup_final": traj.profiles[-1].sup_norm()}
    paths["summary"] = Path(f"{stem}_summary.json")
    paths["summary"].write_text(json.dumps(summary, indent=1))
    if figures if figures is not None else out.svg:
        from .plotting import plot_amplitudes, plot_snapshots
        paths["snapshots_svg"] = plot_snapshots(traj, f"{stem}_interface.svg", out.snapshots)
        paths["amplitudes_svg"] = plot_amplitudes(traj, f"{stem}_modes.svg", out.modes or None)
    return paths
