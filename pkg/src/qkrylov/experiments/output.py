"""CSV, JSON and SVG emission for sweep results."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from ..noise import CONVENTION
from .config import SweepConfig
from .sweep import CSV_COLUMNS, ConvergedStats, Model, SweepRow

CONVERGED_COLUMNS = [f.name for f in fields(ConvergedStats)]
SEED_RULE = "SeedSequence(master_seed, spawn_key=(sigma_index, d, trial_index)) -> PCG64; S noise drawn before H noise"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "" if np.isnan(v) else repr(v)


def _write_csv(path: Path, header: list[str], records: list[dict]) -> None:
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for rec in records:
                w.writerow([_fmt(rec[c]) for c in header])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_sweep_csv(path: Path, rows: list[SweepRow]) -> None:
    _write_csv(path, CSV_COLUMNS, [{c: getattr(r, c) for c in CSV_COLUMNS} for r in rows])


def write_converged_csv(path: Path, stats: list[ConvergedStats]) -> None:
    _write_csv(path, CONVERGED_COLUMNS, [asdict(s) for s in stats])


def resolved_config(config: SweepConfig, model: Model | None) -> dict:
    out = {"config": config.to_json(), "noise_convention": CONVENTION, "seed_rule": SEED_RULE}
    if model is not None:
        out["dt"] = model.dt
        out["model"] = model.quantities.as_dict()
    return out


def _plots(out: Path, rows: list[SweepRow], stats: list[ConvergedStats], fits: dict, model: Model | None) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "qkrylov"
    meta = {"Date": None, "Creator": None}
    written = []
    sigmas = list(dict.fromkeys(r.sigma for r in rows))

    fig, ax = plt.subplots(figsize=(6, 4))
    for s in sigmas:
        sel = [r for r in rows if r.sigma == s]
        ax.plot([r.d for r in sel], [r.medianEnergy for r in sel], marker=".", label=f"σ={s:g}")
    if model is not None:
        ax.axhline(model.quantities.E0, color="k", lw=0.8, ls="--", label="E0")
    ax.set_xlabel("d")
    ax.set_ylabel("median Ẽ0")
    ax.legend(fontsize=7)
    fig.tight_layout()
    written.append(out / "energy_vs_d.svg")
    fig.savefig(written[-1], format="svg", metadata=meta)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 4))
    for s in sigmas:
        sel = [r for r in rows if r.sigma == s]
        ax.semilogy([r.d for r in sel], [r.medianAbsError for r in sel], marker=".", label=f"σ={s:g}")
    ax.set_xlabel("d")
    ax.set_ylabel("median |Ẽ0 − E0|")
    ax.legend(fontsize=7)
    fig.tight_layout()
    written.append(out / "abs_error_vs_d.svg")
    fig.savefig(written[-1], format="svg", metadata=meta)
    plt.close(fig)

    if stats:
        fig, ax = plt.subplots(figsize=(6, 4))
        sg = np.array([s.sigma for s in stats])
        pos = np.array([s.posMedian for s in stats])
        neg = np.array([-s.negMedian for s in stats])
        ax.loglog(sg, pos, "o", label="positive errors")
        ax.loglog(sg, neg, "s", mfc="none", label="|negative errors|")
        if "positive" in fits:
            k, c = fits["positive"]["exponent"], fits["positive"]["coefficient"]
            ax.loglog(sg, c * sg**k, "--", label=f"fit σ^{k:.3f}")
        ax.loglog(sg, [s.upperBound for s in stats], "-", label="upper bound (optimized)")
        ax.loglog(sg, [s.chiMedian for s in stats], ":", label="χ")
        ax.set_xlabel("σ")
        ax.set_ylabel("converged error")
        ax.legend(fontsize=7)
        fig.tight_layout()
        written.append(out / "converged_vs_sigma.svg")
        fig.savefig(written[-1], format="svg", metadata=meta)
        plt.close(fig)
    return written


def emit_outputs(
    rows: list[SweepRow],
    stats: list[ConvergedStats],
    fits: dict,
    config: SweepConfig,
    model: Model | None = None,
    out_dir: str | Path | None = None,
) -> list[Path]:
    """Write sweep.csv, converged.csv, config.json, fit.json and (for nonempty rows) SVG plots."""
    out = Path(out_dir if out_dir is not None else config.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    paths = [out / "sweep.csv", out / "converged.csv", out / "config.json", out / "fit.json"]
    write_sweep_csv(paths[0], rows)
    write_converged_csv(paths[1], stats)
    paths[2].write_text(json.dumps(resolved_config(config, model), indent=2, sort_keys=True) + "\n")
    paths[3].write_text(json.dumps(fits, indent=2, sort_keys=True) + "\n")
    if rows:
        paths += _plots(out, rows, stats, fits, model)
    return paths
