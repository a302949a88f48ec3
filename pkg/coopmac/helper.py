import json
import math
from fractions import Fraction
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from coopmac.config import load_document
from coopmac.dmc import DmcSpec, InputDistribution, ShapeError
from coopmac.exponents import ExponentResult
from coopmac.optimizer import Frontier, RatePoint

FLOAT_FORMAT = "%.12g"
FRONTIER_COLUMNS = [
    "mu",
    "r1",
    "r2",
    "alpha1",
    "alpha2",
    "p10",
    "pU",
    "p20",
    "pV",
    "p13",
    "p23",
    "c2",
    "c3",
    "d2",
    "d3",
    "objective",
]
SWEEP_COLUMNS = ["rho", "q1", "q2", "psi"]

_DMC_ARRAYS = {
    "ch1": ("channels", ("X10", "Y", "Y12")),
    "ch2": ("channels", ("X20", "Y", "Y21")),
    "ch3": ("channels", ("X13", "X23", "Y")),
    "pU_X10": ("inputs", ("U", "X10")),
    "pV_X20": ("inputs", ("V", "X20")),
    "pX13_given_UV": ("inputs", ("U", "V", "X13")),
    "pX23_given_UV": ("inputs", ("U", "V", "X23")),
}


def read_dmc(file: str) -> Tuple[DmcSpec, InputDistribution]:
    """Reads a finite-alphabet channel document.
    Args:
        file: YAML file with alphabet sizes and row-major probability lists
    Returns:
        the channel and the input distribution.
    """
    doc = load_document(file, "dmc.json")
    sizes = doc["alphabets"]
    arrays: Dict[str, np.ndarray] = {}
    for name, (block, axes) in _DMC_ARRAYS.items():
        values = doc[block][name]
        shape = tuple(sizes[a] for a in axes)
        if len(values) != int(np.prod(shape)):
            raise ShapeError(
                f"{file}: {name} has {len(values)} entries, "
                f"expected {'x'.join(axes)} = {int(np.prod(shape))}"
            )
        arrays[name] = np.array(values, dtype=float).reshape(shape)

    cap = doc.get("max_alphabet")
    extra = {"max_alphabet": cap} if cap is not None else {}
    spec = DmcSpec(arrays["ch1"], arrays["ch2"], arrays["ch3"], **extra)
    dist = InputDistribution(
        arrays["pU_X10"],
        arrays["pV_X20"],
        arrays["pX13_given_UV"],
        arrays["pX23_given_UV"],
        **extra,
    )
    return spec, dist


def _point_row(point: RatePoint) -> Dict[str, Any]:
    row: Dict[str, Any] = {c: math.nan for c in FRONTIER_COLUMNS}
    row.update(r1=point.r1, r2=point.r2)
    if point.mu is not None:
        row["mu"] = point.mu
    if point.objective is not None:
        row["objective"] = point.objective
    if point.witness is not None:
        schedule, policy = point.witness
        row.update(alpha1=schedule.alpha1, alpha2=schedule.alpha2)
        row.update(policy.as_dict())
    return row


def frontier_table(front: Frontier) -> pd.DataFrame:
    return pd.DataFrame([_point_row(p) for p in front.points], columns=FRONTIER_COLUMNS)


def write_frontier(front: Frontier, file: str) -> None:
    frontier_table(front).to_csv(file, index=False, float_format=FLOAT_FORMAT)


def read_frontier(file: str, label: str = "") -> Frontier:
    """Reads a frontier CSV; only the r1 and r2 columns are required.
    Args:
        file: the CSV file
        label: name for the frontier
    Returns:
        the frontier, without witnesses.
    """
    df = pd.read_csv(file)
    missing = {"r1", "r2"} - set(df.columns)
    if missing:
        raise ValueError(f"{file}: missing columns {sorted(missing)}")
    points = []
    for record in df.to_dict("records"):
        mu = record.get("mu")
        points.append(
            RatePoint(
                float(record["r1"]),
                float(record["r2"]),
                None if mu is None or pd.isna(mu) else float(mu),
            )
        )
    return Frontier(points, label=label or file)


def write_sweep(results: Sequence[ExponentResult], file: str) -> None:
    df = pd.DataFrame([r.as_dict() for r in results], columns=SWEEP_COLUMNS)
    df.to_csv(file, index=False, float_format=FLOAT_FORMAT)


def write_table(rows: List[Dict[str, Any]], file: str) -> None:
    pd.DataFrame(rows).to_csv(file, index=False, float_format=FLOAT_FORMAT)


def rounded(value: Any) -> Any:
    """Floats at 12 significant digits, recursively; rationals as ``p/q`` strings."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if not math.isfinite(value) else float(FLOAT_FORMAT % value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, dict):
        return {str(k): rounded(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [rounded(v) for v in value]
    return value


def write_json(data: Any, file: str) -> None:
    with open(file, "w") as f:
        json.dump(rounded(data), f, indent=2, sort_keys=True)
        f.write("\n")

