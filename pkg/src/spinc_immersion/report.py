"""Machine-readable run reports: JSON, CSV and plain-text mesh dumps.

JSON schema ``spinc-immersion-report`` version 1::

    {
      "schema": "spinc-immersion-report",
      "schema_version": 1,
      "scenario": {"kind", "params", "p", "ambient", "A1", "A2"},
      "resolutions": [[N, ...], ...],
      "ratio_window": [lo, hi],
      "debug": {"zero_b", "zero_nu", "zero_a", "perturb_a"},
      "gauge_twist": str | null,
      "checks": [
        {"name", "kind": "fd" | "algebraic", "tolerance",
         "levels": [{"resolution", "max", "mean", "rms"}, ...],
         "ratios": [float | null, ...],   # error(h) / error(h/2)
         "pass": bool}
      ],
      "pass": bool,
      "timings": [{stage: seconds}, ...]   # only with --timings
    }

CSV columns: check, resolution, max, mean, ratio, pass. ``resolution`` is
written as ``64x64``; ``ratio`` is empty on the first level or when the
finer error is at roundoff level.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any

import numpy as np

from .pipeline import RunReport

SCHEMA = "spinc-immersion-report"
SCHEMA_VERSION = 1
CSV_FIELDS = ("check", "resolution", "max", "mean", "ratio", "pass")


def report_dict(report: RunReport, timings: bool = False) -> dict[str, Any]:
    cfg = report.config
    s = cfg.scenario
    out: dict[str, Any] = {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "scenario": {
            "kind": s.kind,
            "params": {k: float(v) for k, v in sorted(s.params.items())},
            "p": s.p,
            "ambient": s.ambient,
            "A1": [c.source for c in s.A1],
            "A2": [c.source for c in s.A2],
        },
        "resolutions": [list(r) for r in report.resolutions],
        "ratio_window": list(cfg.ratio_window),
        "debug": cfg.debug.as_dict(),
        "gauge_twist": cfg.gauge_twist.source if cfg.gauge_twist else None,
        "checks": [
            {
                "name": c.name,
                "kind": c.kind,
                "tolerance": c.tolerance,
                "levels": [
                    {"resolution": list(res), "max": st.max, "mean": st.mean, "rms": st.rms} for res, st in c.levels
                ],
                "ratios": c.ratios,
                "pass": c.passed,
            }
            for c in report.checks
        ],
        "pass": report.passed,
    }
    if timings:
        out["timings"] = report.timings
    return out


def write_json(report: RunReport, path: str | Path, timings: bool = False) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report_dict(report, timings), indent=2) + "\n")
    return path


def _res_label(res) -> str:
    return "x".join(str(n) for n in res)


def csv_rows(report: RunReport) -> list[dict[str, str]]:
    rows = []
    for c in report.checks:
        for i, (res, st) in enumerate(c.levels):
            ratio = c.ratios[i - 1] if i > 0 else None
            rows.append(
                {
                    "check": c.name,
                    "resolution": _res_label(res),
                    "max": repr(st.max),
                    "mean": repr(st.mean),
                    "ratio": "" if ratio is None else repr(ratio),
                    "pass": "true" if c.passed else "false",
                }
            )
    return rows


def write_csv(report: RunReport, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(csv_rows(report))
    return path


def read_csv(path: str | Path) -> list[dict[str, Any]]:
    with Path(path).open(newline="") as fh:
        return [
            {
                "check": r["check"],
                "resolution": tuple(int(n) for n in r["resolution"].split("x")),
                "max": float(r["max"]),
                "mean": float(r["mean"]),
                "ratio": float(r["ratio"]) if r["ratio"] else None,
                "pass": r["pass"] == "true",
            }
            for r in csv.DictReader(fh)
        ]


def write_mesh(report: RunReport, path: str | Path) -> Path:
    """One line per sample of the finest level, row-major: u v F_1 ... F_{n+1}."""
    lvl = report.finest
    u, v = lvl.grid.uv()
    F = lvl.F.reshape(-1, lvl.F.shape[-1])
    cols = np.column_stack([u.ravel(), v.ravel(), F])
    path = Path(path)
    with path.open("w") as fh:
        for row in cols:
            fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")
    return path
