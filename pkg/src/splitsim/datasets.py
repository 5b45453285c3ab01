"""Heart-failure clinical-records dataset access.

The reference corpus is the public heart-failure clinical records table:
299 patients, 13 features, binary death-event label with a 203/96 split.
Network access is not assumed, so the package bundles a synthetic
stand-in generated once with a fixed seed (same schema, same row count,
same label split, class-conditional feature distributions shaped like the
published summary statistics).  Point the ``SPLITSIM_DATASET`` environment
variable, or the ``path`` argument, at the real CSV to use it instead.
"""

from __future__ import annotations

import csv
import hashlib
import io
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ParseError, SchemaError

__all__ = ["FEATURE_COLUMNS", "LABEL_COLUMN", "Dataset", "load_dataset", "synthesize_reference_csv"]

FEATURE_COLUMNS = (
    "age",
    "anaemia",
    "creatinine_phosphokinase",
    "diabetes",
    "ejection_fraction",
    "high_blood_pressure",
    "platelets",
    "serum_creatinine",
    "serum_sodium",
    "sex",
    "smoking",
    "time",
)
LABEL_COLUMN = "DEATH_EVENT"
ENV_DATASET = "SPLITSIM_DATASET"


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    source_hash: str

    def __post_init__(self):
        object.__setattr__(self, "features", np.asarray(self.features, dtype=float))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=int))

    @property
    def num_rows(self) -> int:
        return len(self.labels)


def _parse_csv(text: str, source_hash: str) -> Dataset:
    try:
        reader = csv.DictReader(io.StringIO(text))
        rows = list(reader)
    except csv.Error as exc:
        raise ParseError(f"could not parse dataset CSV: {exc}") from exc
    if not rows:
        raise ParseError("dataset CSV has no rows")
    header = set(reader.fieldnames or ())
    missing = (set(FEATURE_COLUMNS) | {LABEL_COLUMN}) - header
    if missing:
        raise SchemaError(f"dataset is missing columns: {sorted(missing)}")
    feats = np.empty((len(rows), len(FEATURE_COLUMNS)))
    labels = np.empty(len(rows), dtype=int)
    for r, row in enumerate(rows):
        try:
            for c, name in enumerate(FEATURE_COLUMNS):
                feats[r, c] = float(row[name])
            label = float(row[LABEL_COLUMN])
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad value in dataset row {r + 1}: {exc}") from exc
        if label not in (0.0, 1.0):
            raise SchemaError(f"label must be 0 or 1, got {label} in row {r + 1}")
        labels[r] = int(label)
    return Dataset(feats, labels, FEATURE_COLUMNS, source_hash)


def load_dataset(path: str | os.PathLike | None = None) -> Dataset:
    """Load the reference CSV: explicit path, else $SPLITSIM_DATASET, else bundled."""
    if path is None:
        path = os.environ.get(ENV_DATASET) or None
    if path is None:
        data = resources.files("splitsim").joinpath("data/heart_failure_reference.csv").read_bytes()
    else:
        with open(path, "rb") as fh:
            data = fh.read()
    return _parse_csv(data.decode("utf-8"), hashlib.sha256(data).hexdigest())


def synthesize_reference_csv(seed: int = 20230913) -> str:
    """Regenerate the bundled stand-in CSV (fixed seed, 299 rows, 203/96)."""
    rng = np.random.default_rng(seed)
    rows = []
    # class-conditional shapes follow the published summary statistics:
    # shorter follow-up, lower ejection fraction and higher serum creatinine
    # for death events.
    specs = [(0, 203), (1, 96)]
    for label, count in specs:
        for _ in range(count):
            if label:
                age = rng.normal(66.0, 12.5)
                ejection = rng.normal(31.5, 11.5)
                creatinine = np.exp(rng.normal(0.52, 0.42))
                sodium = rng.normal(134.8, 5.0)
                days = rng.normal(62.0, 55.0)
                hbp = rng.random() < 0.41
                anaemia = rng.random() < 0.48
            else:
                age = rng.normal(58.2, 10.6)
                ejection = rng.normal(41.5, 10.5)
                creatinine = np.exp(rng.normal(0.08, 0.26))
                sodium = rng.normal(137.5, 4.0)
                days = rng.normal(165.0, 65.0)
                hbp = rng.random() < 0.33
                anaemia = rng.random() < 0.41
            rows.append(
                {
                    "age": round(float(np.clip(age, 40, 95)), 0),
                    "anaemia": int(anaemia),
                    "creatinine_phosphokinase": int(np.clip(np.exp(rng.normal(5.8, 1.1)), 23, 7861)),
                    "diabetes": int(rng.random() < 0.42),
                    "ejection_fraction": int(np.clip(ejection, 14, 80)),
                    "high_blood_pressure": int(hbp),
                    "platelets": round(float(np.clip(rng.normal(263358, 97804), 25100, 850000)), 2),
                    "serum_creatinine": round(float(np.clip(creatinine, 0.5, 9.4)), 1),
                    "serum_sodium": int(np.clip(sodium, 113, 148)),
                    "sex": int(rng.random() < 0.65),
                    "smoking": int(rng.random() < 0.32),
                    "time": int(np.clip(days, 4, 285)),
                    LABEL_COLUMN: label,
                }
            )
    order = rng.permutation(len(rows))
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=list(FEATURE_COLUMNS) + [LABEL_COLUMN])
    writer.writeheader()
    for idx in order:
        writer.writerow(rows[idx])
    return out.getvalue()
