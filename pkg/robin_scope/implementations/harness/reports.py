"""
Report and data-file writers.

Every run directory holds ``report.json`` (the full nested report),
``summary.txt`` (one line per check and per scalar result), CSV tables for
convergence rows and columnar ``.dat`` files with a one-line header.
"""
import csv
import dataclasses
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from robin_scope.implementations.datastructures import RunReport


def to_plain(value: Any) -> Any:
    """Nested builtins for JSON: dataclasses, arrays and numpy scalars included."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.generic):
        return to_plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, Path):
        return str(value)
    if callable(value):
        return getattr(value, "__name__", repr(value))
    return value


class ReportWriter:
    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def write_report(self, report: RunReport) -> Path:
        payload = {
            "experiment": report.experiment,
            "run_id": report.run_id,
            "passed": report.passed,
            "config": to_plain(report.config),
            "results": to_plain(report.results),
            "checks": [to_plain(c) for c in report.checks],
            "timings": to_plain(report.timings),
        }
        path = self._path("report.json")
        path.write_text(json.dumps(payload, indent=2, sort_keys=True))
        self._path("summary.txt").write_text(summary_text(report))
        return path

    def write_csv(self, name: str, rows: Sequence[Any]) -> Path:
        plain = [to_plain(r) for r in rows]
        path = self._path(name)
        with path.open("w", newline="") as fh:
            if not plain:
                return path
            writer = csv.DictWriter(fh, fieldnames=list(plain[0].keys()))
            writer.writeheader()
            writer.writerows(plain)
        return path

    def write_columns(self, name: str, header: str, columns: Iterable[Sequence[float]]) -> Path:
        path = self._path(name)
        data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
        np.savetxt(path, data, fmt="%.15e", header=header)
        return path

    def file(self, name: str) -> Path:
        return self._path(name)


def _scalar_lines(prefix: str, value: Any) -> list[str]:
    if isinstance(value, dict):
        lines = []
        for key in sorted(value):
            lines.extend(_scalar_lines(f"{prefix}.{key}" if prefix else str(key), value[key]))
        return lines
    if isinstance(value, (int, float, str, bool)) or value is None:
        return [f"  {prefix:<48} {value}"]
    return []


def summary_text(report: RunReport) -> str:
    lines = [
        f"experiment  {report.experiment}",
        f"run         {report.run_id}",
        f"status      {'PASS' if report.passed else 'FAIL'}",
        "",
        "checks",
    ]
    for check in report.checks:
        flag = "pass" if check.status else "FAIL"
        lines.append(f"  [{flag}] {check.criterion or '-':<28} {check.message or ''}")
    lines += ["", "results"]
    lines += _scalar_lines("", to_plain(report.results))
    lines += ["", "timings (s)"]
    lines += [f"  {name:<48} {seconds:.3f}" for name, seconds in report.timings.items()]
    return "\n".join(lines) + "\n"
