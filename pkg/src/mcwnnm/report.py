"""Machine-readable run reports: JSON-lines records plus a summary footer.

The structured report contains only deterministic fields so that identical
runs produce byte-identical files; wall times appear in the human-readable
table only.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .denoiser import DenoiseConfig


@dataclass
class RunRecord:
    image: str
    variant: str
    sigmas: tuple[float, float, float]
    input_psnr: float
    output_psnr: float
    seed: int
    cfg: dict
    wall_time: float = 0.0  # seconds; excluded from the structured report


def cfg_snapshot(cfg: DenoiseConfig) -> dict:
    return dataclasses.asdict(cfg)


def _record_line(rec: RunRecord) -> str:
    payload = {
        "type": "record",
        "image": rec.image,
        "variant": rec.variant,
        "sigmas": list(rec.sigmas),
        "input_psnr": rec.input_psnr,
        "output_psnr": rec.output_psnr,
        "seed": rec.seed,
        "cfg": rec.cfg,
    }
    return json.dumps(payload, sort_keys=True)


def summarize(records: list[RunRecord]) -> dict:
    """Per-variant mean PSNRs over all records."""
    by_variant: dict[str, list[RunRecord]] = {}
    for rec in records:
        by_variant.setdefault(rec.variant, []).append(rec)
    means = {}
    for variant in sorted(by_variant):
        rs = by_variant[variant]
        means[variant] = {
            "count": len(rs),
            "mean_input_psnr": sum(r.input_psnr for r in rs) / len(rs),
            "mean_output_psnr": sum(r.output_psnr for r in rs) / len(rs),
        }
    return means


def write_report(path, records: list[RunRecord]) -> None:
    lines = [_record_line(r) for r in records]
    lines.append(json.dumps({"type": "summary", "variants": summarize(records)},
                            sort_keys=True))
    Path(path).write_text("\n".join(lines) + "\n")


def format_table(records: list[RunRecord]) -> str:
    """Human-readable results table with per-variant means."""
    header = f"{'image':<24} {'variant':<8} {'in dB':>8} {'out dB':>8} {'time s':>8}"
    rows = [header, "-" * len(header)]
    for rec in records:
        rows.append(f"{rec.image:<24} {rec.variant:<8} "
                    f"{rec.input_psnr:>8.2f} {rec.output_psnr:>8.2f} "
                    f"{rec.wall_time:>8.1f}")
    rows.append("-" * len(header))
    for variant, m in summarize(records).items():
        rows.append(f"{'mean':<24} {variant:<8} "
                    f"{m['mean_input_psnr']:>8.2f} {m['mean_output_psnr']:>8.2f}")
    return "\n".join(rows)
