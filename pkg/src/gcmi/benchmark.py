"""Mean/mode baseline, masked-cell RMSE, and the Monte Carlo benchmark.

Every repeat draws (or loads) a complete dataset, deletes cells under each
configured mechanism, hands the identical amputed matrix to every method,
and scores the methods on the identical mask.  RMSE is computed over the
deleted cells only, on a per-column [0, 1] scale fitted to the complete
truth (categorical cells contribute 0/1 disagreement); the raw scale is
available via ``normalized=False``.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .chained import GcmiConfig, gcmi_impute, initial_fill
from .data import ColumnSchema, DataMatrix, matrix_from_array, read_csv
from .errors import DataError, ShapeError
from .seeding import spawn_rng
from .simulate import AmputationSpec, SyntheticSpec, ampute, gen_synthetic

METHOD_KINDS = ("gcmi", "mean", "external")


def mean_impute(dm: DataMatrix) -> DataMatrix:
    """Column mean for continuous cells, observed mode for coded cells."""
    return initial_fill(dm)


def rmse(
    X_true: np.ndarray,
    X_imputed: np.ndarray,
    mask: np.ndarray,
    schema: list[ColumnSchema] | None = None,
    normalized: bool = True,
) -> float:
    """Root mean squared error over the masked cells.

    ``normalized`` rescales continuous errors by the truth's per-column
    range (columns without spread keep scale 1).  Binary/categorical cells
    score 0/1 disagreement either way.
    """
    X_true = np.asarray(X_true, dtype=float)
    X_imputed = np.asarray(X_imputed, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if X_true.shape != X_imputed.shape or X_true.shape != mask.shape:
        raise ShapeError("truth, imputed and mask must share one shape")
    if not mask.any():
        raise ValueError("RMSE is undefined on an empty mask")
    p = X_true.shape[1]
    if schema is None:
        continuous = np.ones(p, dtype=bool)
    else:
        continuous = np.array([c.kind == "continuous" for c in schema])
    scale = np.ones(p)
    if normalized:
        spread = X_true.max(axis=0) - X_true.min(axis=0)
        scale[continuous & (spread > 0)] = spread[continuous & (spread > 0)]
    errors = []
    for j in range(p):
        cells = mask[:, j]
        if not cells.any():
            continue
        if continuous[j]:
            errors.append((X_true[cells, j] - X_imputed[cells, j]) / scale[j])
        else:
            errors.append((X_true[cells, j] != X_imputed[cells, j]).astype(float))
    flat = np.concatenate(errors)
    return float(np.sqrt(np.mean(flat**2)))


@dataclass
class MethodSpec:
    """One imputation method entering the benchmark."""

    kind: str
    name: str = ""
    path: str | None = None  # directory of per-repeat results for external methods

    def __post_init__(self):
        if self.kind not in METHOD_KINDS:
            raise ValueError(f"method kind must be one of {METHOD_KINDS}")
        if not self.name:
            self.name = self.kind
        if self.kind == "external" and not self.path:
            raise ValueError("external methods need a results path")


@dataclass
class BenchmarkSpec:
    """Monte Carlo experiment grid: data x mechanisms x methods."""

    data: SyntheticSpec | str | Path
    mechanisms: list[AmputationSpec] = field(default_factory=list)
    methods: list[MethodSpec] = field(default_factory=lambda: [MethodSpec("mean")])
    mc_repeats: int = 100
    seed: int = 0
    gcmi: GcmiConfig = field(default_factory=GcmiConfig)
    workers: int = 1
    normalized: bool = True

    def validate(self) -> None:
        if self.mc_repeats < 1:
            raise ValueError("mc_repeats must be at least 1")
        if not self.methods:
            raise ValueError("method list must be non-empty")
        if not self.mechanisms:
            raise ValueError("mechanism list must be non-empty")


@dataclass
class BenchmarkRow:
    method: str
    mechanism: str
    rate: float
    mean_rmse: float
    sd_rmse: float
    se_rmse: float
    n_repeats: int


@dataclass
class BenchmarkTable:
    """Aggregated results plus the per-repeat raw values."""

    rows: list[BenchmarkRow]
    raw: dict[tuple[str, str], list[float]]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["method", "mechanism", "rate", "mean_rmse", "sd_rmse", "se_rmse", "n_repeats"]
            )
            for r in self.rows:
                writer.writerow(
                    [
                        r.method,
                        r.mechanism,
                        repr(float(r.rate)),
                        repr(float(r.mean_rmse)),
                        repr(float(r.sd_rmse)),
                        repr(float(r.se_rmse)),
                        r.n_repeats,
                    ]
                )

    def to_json(self, path: str | Path) -> None:
        payload = [
            {
                "method": r.method,
                "mechanism": r.mechanism,
                "rate": r.rate,
                "mean_rmse": r.mean_rmse,
                "sd_rmse": r.sd_rmse,
                "se_rmse": r.se_rmse,
                "n_repeats": r.n_repeats,
            }
            for r in self.rows
        ]
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))

    def dump_raw_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["method", "mechanism", "repeat", "rmse"])
            for (method, mech), values in sorted(self.raw.items()):
                for r, v in enumerate(values):
                    writer.writerow([method, mech, r, repr(float(v))])


def _pool_completed(result) -> np.ndarray:
    """Collapse M completed datasets to one matrix: cell means for
    continuous columns, majority level elsewhere."""
    stack = np.stack([dm.values for dm in result.completed])
    schema = result.completed[0].schema
    out = stack.mean(axis=0)
    for j, col in enumerate(schema):
        if col.kind == "continuous":
            continue
        codes = stack[:, :, j].astype(int)
        n_levels = max(len(col.levels), 2)
        counts = np.zeros((codes.shape[1], n_levels))
        for m in range(codes.shape[0]):
            counts[np.arange(codes.shape[1]), codes[m]] += 1
        out[:, j] = np.argmax(counts, axis=1).astype(float)
    return out


def _load_truth(spec: BenchmarkSpec, repeat: int) -> DataMatrix:
    if isinstance(spec.data, SyntheticSpec):
        seed = int(spawn_rng(spec.seed, 100, repeat).integers(0, 2**63))
        X, _ = gen_synthetic(replace(spec.data, seed=seed))
        return matrix_from_array(X)
    return read_csv(spec.data)


def _external_result(method: MethodSpec, mech_label: str, repeat: int, dm_truth: DataMatrix) -> np.ndarray:
    path = Path(method.path) / f"{mech_label}_rep{repeat:03d}.csv"
    if not path.exists():
        raise DataError(f"external method {method.name!r}: missing results file for repeat {repeat}: {path}")
    ext = read_csv(path)
    if ext.values.shape != dm_truth.values.shape:
        raise DataError(
            f"external method {method.name!r}: repeat {repeat} has shape "
            f"{ext.values.shape}, expected {dm_truth.values.shape}"
        )
    if ext.mask.any():
        raise DataError(f"external method {method.name!r}: repeat {repeat} still contains missing cells")
    return ext.values


def _run_repeat(spec: BenchmarkSpec, repeat: int) -> list[tuple[str, str, float]]:
    """All (method, mechanism) scores for one Monte Carlo repeat."""
    truth = _load_truth(spec, repeat)
    out = []
    for i, mech in enumerate(spec.mechanisms):
        mech_seed = int(spawn_rng(spec.seed, 200, repeat, i).integers(0, 2**63))
        mask = ampute(truth.values, replace(mech, seed=mech_seed))
        if not mask.any():
            out.extend((m.name, mech.label, 0.0) for m in spec.methods)
            continue
        amputed = DataMatrix(
            list(truth.schema),
            np.where(mask, np.nan, truth.values),
            mask,
        )
        for method in spec.methods:
            if method.kind == "mean":
                imputed = mean_impute(amputed).values
            elif method.kind == "gcmi":
                run_seed = int(spawn_rng(spec.seed, 300, repeat, i).integers(0, 2**63))
                cfg = replace(spec.gcmi, seed=run_seed, workers=1)
                imputed = _pool_completed(gcmi_impute(amputed, cfg))
            else:
                imputed = _external_result(method, mech.label, repeat, truth)
            score = rmse(
                truth.values, imputed, mask, schema=truth.schema, normalized=spec.normalized
            )
            out.append((method.name, mech.label, score))
    return out


def run_benchmark(spec: BenchmarkSpec) -> BenchmarkTable:
    """Run the full grid; deterministic per spec.seed regardless of workers."""
    spec.validate()
    if spec.workers > 1 and spec.mc_repeats > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            per_repeat = list(pool.map(_run_repeat, [spec] * spec.mc_repeats, range(spec.mc_repeats)))
    else:
        per_repeat = [_run_repeat(spec, r) for r in range(spec.mc_repeats)]

    raw: dict[tuple[str, str], list[float]] = {}
    for scores in per_repeat:
        for method, mech, value in scores:
            raw.setdefault((method, mech), []).append(value)

    mech_rates = {m.label: _nominal_rate(m) for m in spec.mechanisms}
    rows = []
    for method in spec.methods:
        for mech in spec.mechanisms:
            values = np.array(raw[(method.name, mech.label)])
            n = values.size
            sd = float(values.std(ddof=1)) if n > 1 else 0.0
            rows.append(
                BenchmarkRow(
                    method=method.name,
                    mechanism=mech.label,
                    rate=mech_rates[mech.label],
                    mean_rmse=float(values.mean()),
                    sd_rmse=sd,
                    se_rmse=sd / np.sqrt(n) if n > 1 else 0.0,
                    n_repeats=n,
                )
            )
    return BenchmarkTable(rows=rows, raw=raw)


def _nominal_rate(mech: AmputationSpec) -> float:
    if mech.mechanism == "mcar":
        return float(mech.rate)
    if mech.mechanism == "mar":
        return 0.5  # expected rate when logits are centred
    return float(mech.b0)
