"""Result emission: delimited curves, JSON bundles, markdown tables, figures.

Numeric text output uses fixed formatting so goldens diff cleanly:
curve values as 10-decimal fixed point, table cells as AUROC*100 with one
decimal. The figure (curves.png) is a rendering of curves.csv, which
stays the machine-readable plotting interface.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from .errors import DataError
from .harness import ResultBundle, SweepOutcome

CURVES_CSV = "curves.csv"
SUMMARY_JSON = "summary.json"
TABLE_MD = "table.md"
CURVES_PNG = "curves.png"


def format_curves_csv(bundle: ResultBundle) -> str:
    lines = ["t,detector,auc"]
    for det in bundle.detectors:
        for t, value in zip(det.curve.ts, det.curve.values):
            lines.append(f"{t},{det.label},{value:.10f}")
    return "\n".join(lines) + "\n"


def format_summary_json(bundle: ResultBundle) -> str:
    return json.dumps(bundle.to_dict(), indent=2, sort_keys=True) + "\n"


def _cell(score: float) -> str:
    return f"{100.0 * score:.1f}"


def format_table_md(bundle: ResultBundle) -> str:
    fractions = bundle.eval_fractions
    header = "| detector | " + " | ".join(f"auc2@{f * 100:g}%" for f in fractions) + " |"
    sep = "|" + "---|" * (len(fractions) + 1)
    lines = [header, sep]
    for det in bundle.detectors:
        cells = " | ".join(_cell(s) for s in det.auc2.scores)
        lines.append(f"| {det.label} | {cells} |")
    return "\n".join(lines) + "\n"


def render_curves(bundle: ResultBundle, path: str | Path) -> Path:
    """Plot AUC(t) per detector to an image file (headless backend)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for det in bundle.detectors:
        ax.plot(det.curve.ts, det.curve.values, label=det.label, linewidth=1.4)
    ax.set_xlabel("observations seen (t)")
    ax.set_ylabel("AUROC on full test set")
    ax.set_title(f"{Path(bundle.dataset).stem} | r={bundle.contamination_r:g}% "
                 f"| seed={bundle.seed}")
    ax.grid(alpha=0.3)
    ax.legend(loc="lower right")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def emit_outputs(bundle: ResultBundle, output_dir: str | Path,
                 figure: bool = True) -> dict[str, Path]:
    """Write curves.csv, summary.json, table.md, and curves.png."""
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output dir {out}: {exc}") from None
    paths = {
        CURVES_CSV: out / CURVES_CSV,
        SUMMARY_JSON: out / SUMMARY_JSON,
        TABLE_MD: out / TABLE_MD,
    }
    paths[CURVES_CSV].write_text(format_curves_csv(bundle), encoding="utf-8")
    paths[SUMMARY_JSON].write_text(format_summary_json(bundle), encoding="utf-8")
    paths[TABLE_MD].write_text(format_table_md(bundle), encoding="utf-8")
    if figure:
        paths[CURVES_PNG] = render_curves(bundle, out / CURVES_PNG)
    return paths


def load_bundle(path: str | Path) -> ResultBundle:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        return ResultBundle.from_dict(raw)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"cannot load bundle {path}: {exc}") from None


def _tau_label(det_settings: dict) -> str:
    tau = det_settings.get("tau", {})
    if tau.get("mode") == "percentile":
        return f"p{tau.get('percent'):g}"
    return "none"


def combined_rows(bundles: Sequence[ResultBundle]) -> list[dict]:
    """One row per (bundle, detector), keyed for cross-experiment comparison."""
    rows = []
    for b in bundles:
        for det in b.detectors:
            row = {
                "dataset": Path(b.dataset).stem,
                "detector": det.label,
                "r": b.contamination_r,
                "tau": _tau_label(det.settings),
                "seed": b.seed,
            }
            for frac, score in zip(det.auc2.fractions, det.auc2.scores):
                row[f"auc2@{frac * 100:g}%"] = score
            rows.append(row)
    return rows


def format_combined_csv(bundles: Sequence[ResultBundle]) -> str:
    rows = combined_rows(bundles)
    if not rows:
        return ""
    cols = list(rows[0].keys())
    lines = [",".join(cols)]
    for row in rows:
        cells = []
        for c in cols:
            v = row[c]
            cells.append(f"{v:.10f}" if isinstance(v, float) and c.startswith("auc2")
                         else f"{v}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def format_combined_md(bundles: Sequence[ResultBundle]) -> str:
    rows = combined_rows(bundles)
    if not rows:
        return "(no successful runs)\n"
    cols = list(rows[0].keys())
    lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    for row in rows:
        cells = []
        for c in cols:
            v = row[c]
            cells.append(_cell(v) if c.startswith("auc2") else f"{v}")
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def emit_sweep_outputs(outcomes: Sequence[SweepOutcome],
                       output_dir: str | Path) -> dict[str, Path]:
    """Per-config bundle outputs plus the cross-config comparison table."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    bundles = []
    statuses = []
    for oc in outcomes:
        if oc.ok:
            sub = (oc.config.output_dir if oc.config and oc.config.output_dir
                   else out / oc.label)
            emit_outputs(oc.bundle, sub)
            bundles.append(oc.bundle)
            statuses.append({"label": oc.label, "status": "ok",
                             "output_dir": str(sub)})
        else:
            statuses.append({"label": oc.label, "status": "error", "error": oc.error})
    paths = {
        "combined.csv": out / "combined.csv",
        "combined.md": out / "combined.md",
        "sweep_report.json": out / "sweep_report.json",
    }
    paths["combined.csv"].write_text(format_combined_csv(bundles), encoding="utf-8")
    paths["combined.md"].write_text(format_combined_md(bundles), encoding="utf-8")
    paths["sweep_report.json"].write_text(
        json.dumps({"runs": statuses}, indent=2) + "\n", encoding="utf-8")
    return paths
