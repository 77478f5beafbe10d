"""Per-parameter polynomial model of shuffle load.

The load of experiment ``k`` is modelled as::

    load = a0 + sum_i sum_{j=1..d} a_ij * p_i**j

with no cross terms between parameters. Fitting solves the least-squares
problem on a column-standardized design matrix with an SVD-based solver and
maps the coefficients back to the raw power basis, so callers always see
``[a0, a_11, ..., a_1d, ..., a_N1, ..., a_Nd]``.

Model document
--------------
``save_model`` writes a JSON object::

    {
      "format": "shuffleload-model",
      "version": 1,
      "degree": 3,
      "num_params": 2,
      "param_names": ["num_maps", "num_reduces"],
      "coefficients": [...],          # shortest round-trip decimal floats
      "fit_meta": {"m": 64, "rss": ..., "condition": ..., "standardized": true}
    }

Coefficients are written with ``repr`` precision, so ``load_model(save_model(m))``
reproduces every coefficient bit for bit.
"""
from __future__ import annotations

import json
import math
import operator
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    InconsistentDimension,
    InsufficientData,
    InvalidConfig,
    ParseError,
    RankDeficient,
    VersionMismatch,
)

DEFAULT_DEGREE = 3
MODEL_FORMAT = "shuffleload-model"
MODEL_VERSION = 1
DEFAULT_PARAM_NAMES = ("num_maps", "num_reduces")


@dataclass(frozen=True)
class ParameterVector:
    """Configuration parameter values of one experiment, e.g. ``(maps, reduces)``."""

    values: tuple[int, ...]

    def __post_init__(self):
        try:
            vals = tuple(operator.index(v) for v in self.values)
        except TypeError as exc:
            raise InvalidConfig(f"parameter values must be integers: {self.values!r}") from exc
        if not vals:
            raise InvalidConfig("a parameter vector needs at least one value")
        if any(v < 1 for v in vals):
            raise InvalidConfig(f"parameter values must be >= 1: {vals}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, config) -> "ParameterVector":
        if isinstance(config, cls):
            return config
        return cls(tuple(config))

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


@dataclass(frozen=True)
class Observation:
    config: ParameterVector
    load: float

    def __post_init__(self):
        object.__setattr__(self, "config", ParameterVector.of(self.config))
        load = float(self.load)
        if not (load >= 0.0) or math.isinf(load):
            raise ValueError(f"load must be a finite non-negative number, got {self.load!r}")
        object.__setattr__(self, "load", load)


@dataclass(frozen=True)
class ProfileDataset:
    """Averaged training (or test) data: one observation per distinct configuration."""

    observations: tuple[Observation, ...]
    input_bytes: int | None = None
    meta: str = ""

    def __post_init__(self):
        obs = tuple(self.observations)
        if not obs:
            raise EmptyInput("a profile dataset needs at least one observation")
        n = len(obs[0].config)
        if any(len(o.config) != n for o in obs):
            raise InconsistentDimension("all configurations in a dataset must have the same length")
        seen = set()
        for o in obs:
            if o.config in seen:
                raise ValueError(f"duplicate configuration {o.config.values} (average repeats first)")
            seen.add(o.config)
        object.__setattr__(self, "observations", obs)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Sequence[int], float]], **kw) -> "ProfileDataset":
        return cls(tuple(Observation(ParameterVector.of(c), y) for c, y in pairs), **kw)

    @property
    def num_params(self) -> int:
        return len(self.observations[0].config)

    @property
    def configs(self) -> list[ParameterVector]:
        return [o.config for o in self.observations]

    @property
    def loads(self) -> np.ndarray:
        return np.array([o.load for o in self.observations], dtype=float)

    def __len__(self):
        return len(self.observations)


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    entries: np.ndarray
    degree: int
    num_params: int

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class FitMeta:
    m: int
    rss: float
    condition: float
    standardized: bool = True


@dataclass(frozen=True)
class PolynomialModel:
    degree: int
    num_params: int
    coefficients: tuple[float, ...]
    param_names: tuple[str, ...] = DEFAULT_PARAM_NAMES
    fit_meta: FitMeta | None = None

    def __post_init__(self):
        coef = tuple(float(c) for c in self.coefficients)
        if self.degree < 1 or self.num_params < 1:
            raise ValueError("degree and num_params must be >= 1")
        if len(coef) != 1 + self.num_params * self.degree:
            raise ValueError(
                f"coefficient count {len(coef)} != 1 + num_params*degree "
                f"= {1 + self.num_params * self.degree}"
            )
        if not all(math.isfinite(c) for c in coef):
            raise ValueError("coefficients must be finite")
        names = tuple(self.param_names)
        if len(names) != self.num_params:
            names = default_param_names(self.num_params)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "param_names", names)

    def coefficient(self, param: int, power: int) -> float:
        """Coefficient of ``p_param ** power`` (both 1-based)."""
        return self.coefficients[1 + (param - 1) * self.degree + (power - 1)]


def default_param_names(n: int) -> tuple[str, ...]:
    if n == 2:
        return DEFAULT_PARAM_NAMES
    return tuple(f"p{i + 1}" for i in range(n))


def _row(config: ParameterVector, degree: int) -> list[float]:
    row = [1.0]
    for p in config.values:
        x = float(p)
        row.extend(x ** j for j in range(1, degree + 1))
    return row


def build_design_matrix(configs: Sequence, degree: int = DEFAULT_DEGREE) -> DesignMatrix:
    """Rows ``[1, p1, p1**2, .., p1**d, .., pN, .., pN**d]`` in input order."""
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    configs = [ParameterVector.of(c) for c in configs]
    if not configs:
        raise EmptyInput("cannot build a design matrix from zero configurations")
    n = len(configs[0])
    if any(len(c) != n for c in configs):
        raise InconsistentDimension("configurations have differing numbers of parameters")
    entries = np.array([_row(c, degree) for c in configs], dtype=float)
    entries.setflags(write=False)
    return DesignMatrix(entries, degree, n)


def fit(
    dataset: ProfileDataset,
    degree: int = DEFAULT_DEGREE,
    *,
    standardize: bool = True,
    param_names: Sequence[str] | None = None,
) -> PolynomialModel:
    """Least-squares fit of the polynomial model to ``dataset``.

    Raises InsufficientData when there are fewer observations than
    coefficients and RankDeficient when the design matrix columns are
    linearly dependent; no regularization is ever applied.
    """
    dm = build_design_matrix(dataset.configs, degree)
    P = dm.entries
    m, cols = P.shape
    if m < cols:
        raise InsufficientData(
            f"{m} observations cannot determine {cols} coefficients "
            f"(need at least 1 + {dm.num_params}*{degree})"
        )
    y = dataset.loads

    if standardize:
        mu = P[:, 1:].mean(axis=0)
        sd = P[:, 1:].std(axis=0)
        flat = np.flatnonzero(sd == 0.0)
        if flat.size:
            raise RankDeficient(f"design matrix column {int(flat[0]) + 1} is constant")
        Z = np.empty_like(P)
        Z[:, 0] = 1.0
        Z[:, 1:] = (P[:, 1:] - mu) / sd
    else:
        Z = P

    sol, _, rank, sv = np.linalg.lstsq(Z, y, rcond=None)
    if rank < cols:
        raise RankDeficient(f"design matrix has rank {rank} < {cols} columns")

    if standardize:
        alpha = np.empty(cols)
        alpha[1:] = sol[1:] / sd
        alpha[0] = sol[0] - np.dot(sol[1:], mu / sd)
    else:
        alpha = sol
    if not np.all(np.isfinite(alpha)):
        raise RankDeficient("solver produced non-finite coefficients")

    resid = y - P @ alpha
    meta = FitMeta(
        m=m,
        rss=float(resid @ resid),
        condition=float(sv[0] / sv[-1]),
        standardized=standardize,
    )
    names = tuple(param_names) if param_names is not None else default_param_names(dm.num_params)
    return PolynomialModel(degree, dm.num_params, tuple(alpha.tolist()), names, meta)


def predict(model: PolynomialModel, config) -> float:
    config = ParameterVector.of(config)
    if len(config) != model.num_params:
        raise DimensionMismatch(
            f"model expects {model.num_params} parameters, got {len(config)}"
        )
    return float(np.dot(_row(config, model.degree), model.coefficients))


def predict_many(model: PolynomialModel, configs: Iterable) -> np.ndarray:
    return np.array([predict(model, c) for c in configs], dtype=float)


# -- persistence --------------------------------------------------------------

def save_model(model: PolynomialModel) -> str:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "degree": model.degree,
        "num_params": model.num_params,
        "param_names": list(model.param_names),
        "coefficients": list(model.coefficients),
        "fit_meta": None,
    }
    if model.fit_meta is not None:
        fm = model.fit_meta
        doc["fit_meta"] = {
            "m": fm.m,
            "rss": fm.rss,
            "condition": fm.condition,
            "standardized": fm.standardized,
        }
    return json.dumps(doc, indent=2) + "\n"


def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def _require(doc: dict, text: str, key: str, kind, check=None):
    if key not in doc:
        raise ParseError("required field is missing", field=key)
    value = doc[key]
    # bool is an int subclass
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise ParseError(f"expected {kind.__name__}, got {type(value).__name__}",
                         line=_line_of(text, key), field=key)
    if check is not None and not check(value):
        raise ParseError(f"invalid value {value!r}", line=_line_of(text, key), field=key)
    return value


def load_model(text: str) -> PolynomialModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object", line=1)
    if doc.get("format", MODEL_FORMAT) != MODEL_FORMAT:
        raise ParseError(f"unknown document format {doc['format']!r}",
                         line=_line_of(text, "format"), field="format")

    version = _require(doc, text, "version", int)
    if version != MODEL_VERSION:
        raise VersionMismatch(f"model document version {version}, expected {MODEL_VERSION}")
    degree = _require(doc, text, "degree", int, lambda v: v >= 1)
    num_params = _require(doc, text, "num_params", int, lambda v: v >= 1)
    names = _require(doc, text, "param_names", list,
                     lambda v: len(v) == num_params and all(isinstance(s, str) for s in v))
    coefs = _require(doc, text, "coefficients", list)
    line = _line_of(text, "coefficients")
    for c in coefs:
        if isinstance(c, bool) or not isinstance(c, (int, float)) or not math.isfinite(c):
            raise ParseError(f"coefficient {c!r} is not a finite number", line=line,
                             field="coefficients")
    if len(coefs) != 1 + num_params * degree:
        raise ParseError(
            f"arity rule violated: coefficient count {len(coefs)} must equal "
            f"1 + num_params*degree = {1 + num_params * degree}",
            line=line, field="coefficients",
        )

    meta = None
    raw_meta = doc.get("fit_meta")
    if raw_meta is not None:
        if not isinstance(raw_meta, dict):
            raise ParseError("expected object", line=_line_of(text, "fit_meta"), field="fit_meta")
        try:
            meta = FitMeta(
                m=int(raw_meta["m"]),
                rss=float(raw_meta["rss"]),
                condition=float(raw_meta["condition"]),
                standardized=bool(raw_meta.get("standardized", True)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed fit_meta ({exc})",
                             line=_line_of(text, "fit_meta"), field="fit_meta") from None

    return PolynomialModel(degree, num_params, tuple(float(c) for c in coefs), tuple(names), meta)
