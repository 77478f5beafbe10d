"""Prediction-accuracy metrics: MAPE, PRED(25), RMSE and R².

MAPE is returned in percent. PRED(25) counts observations whose relative
error is strictly below 0.25. R² is not clamped and goes negative for fits
worse than predicting the mean.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import DegenerateActuals, DimensionMismatch, EmptyInput, LengthMismatch, ZeroActual
from .model import PolynomialModel, ProfileDataset, predict

PRED_THRESHOLD = 0.25


def _pair(actual, predicted) -> tuple[list[float], list[float]]:
    a = [float(x) for x in actual]
    p = [float(x) for x in predicted]
    if len(a) != len(p):
        raise LengthMismatch(f"{len(a)} actual values vs {len(p)} predictions")
    if not a:
        raise EmptyInput("metrics need at least one observation")
    return a, p


def _relative_errors(a: list[float], p: list[float]) -> list[float]:
    out = []
    for i, (y, yh) in enumerate(zip(a, p)):
        if y == 0.0:
            raise ZeroActual(f"actual value {i} is zero; relative error undefined")
        out.append(abs(y - yh) / y)
    return out


def mape(actual: Sequence[float], predicted: Sequence[float]) -> float:
    """Mean absolute percentage error, in percent."""
    a, p = _pair(actual, predicted)
    if any(y < 0 for y in a):
        raise ZeroActual("actual values must be strictly positive")
    rel = _relative_errors(a, p)
    return 100.0 * math.fsum(rel) / len(rel)


def pred25(actual: Sequence[float], predicted: Sequence[float]) -> float:
    a, p = _pair(actual, predicted)
    if any(y < 0 for y in a):
        raise ZeroActual("actual values must be strictly positive")
    rel = _relative_errors(a, p)
    return sum(1 for e in rel if e < PRED_THRESHOLD) / len(rel)


def rmse(actual: Sequence[float], predicted: Sequence[float]) -> float:
    a, p = _pair(actual, predicted)
    return math.sqrt(math.fsum((y - yh) ** 2 for y, yh in zip(a, p)) / len(a))


def r_squared(actual: Sequence[float], predicted: Sequence[float]) -> float:
    a, p = _pair(actual, predicted)
    if len(a) < 2:
        raise DegenerateActuals("R² needs at least two observations")
    mean = math.fsum(a) / len(a)
    ss_tot = math.fsum((y - mean) ** 2 for y in a)
    if ss_tot == 0.0:
        raise DegenerateActuals("actual values have zero variance")
    ss_res = math.fsum((y - yh) ** 2 for y, yh in zip(a, p))
    return 1.0 - ss_res / ss_tot


class Residual(NamedTuple):
    actual: float
    predicted: float
    relative_error: float
    config: tuple[int, ...] = ()


@dataclass(frozen=True)
class EvaluationReport:
    mape: float
    pred25: float
    rmse: float
    r_squared: float
    residuals: tuple[Residual, ...]
    name: str = ""

    @property
    def m(self) -> int:
        return len(self.residuals)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "m": self.m,
            "mape_percent": self.mape,
            "pred25": self.pred25,
            "rmse": self.rmse,
            "r_squared": self.r_squared,
            "residuals": [
                {
                    "index": i,
                    "config": list(r.config),
                    "actual": r.actual,
                    "predicted": r.predicted,
                    "relative_error": r.relative_error,
                }
                for i, r in enumerate(self.residuals, 1)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        return format_table([self])


def format_table(reports: Sequence[EvaluationReport]) -> str:
    """Plain-text table with one row per application, columns as in the usual
    RMSE / MAPE / R² / PRED layout."""
    header = ("Application", "RMSE", "MAPE(%)", "R^2", "PRED(25)", "M")
    rows = [
        (r.name or "-", f"{r.rmse:.6g}", f"{r.mape:.2f}", f"{r.r_squared:.2f}",
         f"{r.pred25:.2f}", str(r.m))
        for r in reports
    ]
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(header)]
    fmt = lambda cells: "  ".join(
        c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths))
    )
    lines = [fmt(header), "  ".join("-" * w for w in widths)]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines) + "\n"


def evaluate(model: PolynomialModel, test: ProfileDataset, name: str = "") -> EvaluationReport:
    """Predict every test configuration and score the predictions."""
    if model.num_params != test.num_params:
        raise DimensionMismatch(
            f"model has {model.num_params} parameters, test data has {test.num_params}"
        )
    actual = [o.load for o in test.observations]
    predicted = [predict(model, o.config) for o in test.observations]
    residuals = tuple(
        Residual(y, yh, abs(y - yh) / y if y else math.inf, o.config.values)
        for o, y, yh in zip(test.observations, actual, predicted)
    )
    return EvaluationReport(
        mape=mape(actual, predicted),
        pred25=pred25(actual, predicted),
        rmse=rmse(actual, predicted),
        r_squared=r_squared(actual, predicted),
        residuals=residuals,
        name=name,
    )
