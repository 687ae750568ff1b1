import csv
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from ..config import get_settings
from ..models.chaos_model import GaussianSample
from ..models.experiment_model import RunManifest


class ResultWriter:
    """Escreve CSVs com cabeçalho '#' e o manifest.json de uma execução."""

    MANIFEST_NAME = "manifest.json"

    def __init__(self, out_dir: str, header: Optional[Dict[str, Any]] = None, digits: Optional[int] = None):
        self.settings = get_settings()
        self.logger = logging.getLogger(__name__)
        self.out_dir = Path(out_dir)
        self.header = dict(header or {})
        self.digits = digits if digits is not None else self.settings.csv_digits
        self.manifest: Optional[RunManifest] = None

    def format_value(self, value: Any) -> str:
        if isinstance(value, (bool, np.bool_)):
            return str(bool(value)).lower()
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            if math.isnan(value):
                return "nan"
            return f"{float(value):.{self.digits}g}"
        if value is None:
            return ""
        return str(getattr(value, "value", value))

    def attach_manifest(self, manifest: RunManifest) -> None:
        self.manifest = manifest
        self.write_manifest()

    def write_manifest(self) -> Path:
        if self.manifest is None:
            raise RuntimeError("no manifest attached to the writer")
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / self.MANIFEST_NAME
        path.write_text(self.manifest.model_dump_json(indent=2), encoding="utf-8")
        return path

    def write_table(
        self,
        name: str,
        columns: Sequence[str],
        rows: Iterable[Sequence[Any]],
        meta: Optional[Dict[str, Any]] = None,
    ) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        header = {**self.header, **(meta or {})}
        with open(path, "w", newline="", encoding="utf-8") as handle:
            for key in sorted(header):
                handle.write(f"# {key}={self.format_value(header[key])}\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(columns)
            count = 0
            for row in rows:
                if len(row) != len(columns):
                    raise ValueError(f"{name}: row has {len(row)} fields, expected {len(columns)}")
                writer.writerow([self.format_value(v) for v in row])
                count += 1
        if self.manifest is not None:
            self.manifest.add_file(name)
        self.logger.info(f"Wrote {count} rows to {path}")
        return path

    def write_sample(self, name: str, sample: GaussianSample) -> Path:
        rows = [
            [i, k, float(sample.xi[i - 1, k - 1])]
            for i in range(1, sample.n_t + 1)
            for k in range(1, sample.n_w + 1)
        ]
        return self.write_table(name, ["i", "k", "value"], rows, {"seed": sample.seed, "stream": sample.stream})


def read_table(path: str) -> Dict[str, Any]:
    """Lê um CSV escrito por ResultWriter: {'meta': {...}, 'columns': [...], 'rows': [[...], ...]}."""
    meta: Dict[str, str] = {}
    lines: List[str] = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key] = value
            else:
                lines.append(line)
    reader = csv.reader(lines)
    columns = next(reader, [])
    return {"meta": meta, "columns": columns, "rows": [row for row in reader]}


def read_sample(path: str) -> GaussianSample:
    table = read_table(path)
    entries = [(int(i), int(k), float(v)) for i, k, v in table["rows"]]
    if not entries:
        raise ValueError(f"{path} holds no sample entries")
    n_t = max(i for i, _, _ in entries)
    n_w = max(k for _, k, _ in entries)
    xi = np.full((n_t, n_w), np.nan)
    for i, k, value in entries:
        xi[i - 1, k - 1] = value
    if np.isnan(xi).any():
        raise ValueError(f"{path} does not cover every (i, k) cell")
    return GaussianSample(
        xi=xi,
        seed=int(table["meta"].get("seed", 0)),
        stream=int(table["meta"].get("stream", 0)),
    )
