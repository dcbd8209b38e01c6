"""Jittering estimators: kernel density and local linear regression.

Both estimators follow the same recipe: draw one or more jitter
replicates of the dataset, smooth each replicate with a product kernel,
and average the per-replicate results. Bandwidths live on the
standardized scale (the transform is computed from the first jitter
replicate), so evaluation uses the effective per-column bandwidth
``b_j * scale_j`` on original units.
"""

from __future__ import annotations

import math
import pickle
from dataclasses import dataclass, field

import numpy as np

from .data import (
    ColumnSchema,
    JitteredDataset,
    MixedDataset,
    Standardization,
    jitter,
)
from .errors import (
    InsufficientDataError,
    InvalidParameterError,
    NoLocalDataError,
    SchemaError,
)
from .noise import NoiseSpec

_KERNEL_NAMES = ("gaussian", "epanechnikov")
_RIDGE_FACTOR = 1e-8
_MIN_TOTAL_WEIGHT = 1e-12

MODEL_FORMAT = "jitterkit-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class Kernel:
    """Univariate symmetric kernel density; multivariate use is the product
    across coordinates."""

    name: str

    def __post_init__(self):
        if self.name not in _KERNEL_NAMES:
            raise InvalidParameterError(
                f"unknown kernel {self.name!r}; choose from {_KERNEL_NAMES}"
            )

    def profile(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.name == "gaussian":
            return np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
        # epanechnikov, compact support [-1, 1]
        return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)


GAUSSIAN = Kernel("gaussian")
EPANECHNIKOV = Kernel("epanechnikov")


def get_kernel(name: str) -> Kernel:
    return Kernel(name)


def select_bandwidth(data) -> np.ndarray:
    """Normal-reference bandwidth per coordinate on standardized data.

    ``b_j = (4 / (d + 2))^(1/(d+4)) * n^(-1/(d+4))`` for every coordinate
    (all have unit sample sd after standardization). Accepts a dataset, a
    jitter replicate, or a plain (n, d) matrix.
    """
    rows = data if isinstance(data, np.ndarray) else data.rows
    n, d = rows.shape
    if n < 2:
        raise InsufficientDataError(f"bandwidth selection needs n >= 2, got n = {n}")
    if d < 1:
        raise InvalidParameterError("bandwidth selection needs at least one column")
    b = (4.0 / (d + 2.0)) ** (1.0 / (d + 4.0)) * n ** (-1.0 / (d + 4.0))
    return np.full(d, b)


def _resolve_bandwidths(override, d: int) -> np.ndarray:
    b = np.atleast_1d(np.asarray(override, dtype=float))
    if b.size == 1:
        b = np.full(d, float(b[0]))
    if b.shape != (d,):
        raise InvalidParameterError(f"bandwidth override must have {d} entries, got {b.shape}")
    if np.any(b <= 0) or not np.all(np.isfinite(b)):
        raise InvalidParameterError("bandwidths must be positive and finite")
    return b


def _reject_categorical(dataset: MixedDataset) -> None:
    cat = dataset.indices_of_kind("categorical")
    if cat:
        names = [dataset.schema[j].name for j in cat]
        raise SchemaError(
            f"categorical columns {names} must be dummy-coded before fitting"
        )


@dataclass(frozen=True, eq=False)
class KdeModel:
    """Fitted jittered kernel density estimator.

    ``bandwidths`` are on the standardized scale, one per column;
    ``replicates`` hold the jittered datasets the estimator averages
    over. Models are immutable and safe for concurrent evaluation.
    """

    kernel: Kernel
    noise: NoiseSpec
    seed: int
    bandwidths: np.ndarray
    transform: Standardization
    replicates: tuple[JitteredDataset, ...] = field(repr=False)

    def __post_init__(self):
        b = np.asarray(self.bandwidths, dtype=float)
        if np.any(b <= 0):
            raise InvalidParameterError("bandwidths must be positive")
        b.setflags(write=False)
        object.__setattr__(self, "bandwidths", b)
        object.__setattr__(self, "replicates", tuple(self.replicates))
        if not self.replicates:
            raise InvalidParameterError("model needs at least one jitter replicate")

    @property
    def schema(self) -> tuple[ColumnSchema, ...]:
        return self.replicates[0].schema

    @property
    def origin(self) -> MixedDataset:
        return self.replicates[0].origin

    @property
    def num_jitters(self) -> int:
        return len(self.replicates)

    @property
    def effective_bandwidths(self) -> np.ndarray:
        """Per-column bandwidths on original units: b_j * scale_j."""
        return self.bandwidths * self.transform.scales


def fit_kde(
    dataset: MixedDataset,
    spec: NoiseSpec,
    kernel: Kernel = GAUSSIAN,
    num_jitters: int = 1,
    seed: int = 0,
    bandwidth=None,
) -> KdeModel:
    """Fit the jittered kernel density estimator.

    Draws ``num_jitters`` independent jitter replicates from the seeded
    noise streams, standardizes on the first replicate, and selects
    normal-reference bandwidths unless ``bandwidth`` overrides them
    (stored verbatim). Deterministic given its inputs.
    """
    if num_jitters < 1:
        raise InvalidParameterError(f"num_jitters must be >= 1, got {num_jitters}")
    if dataset.n < 2:
        raise InsufficientDataError(f"fit_kde needs n >= 2 observations, got {dataset.n}")
    _reject_categorical(dataset)
    replicates = tuple(jitter(dataset, spec, seed, r) for r in range(num_jitters))
    transform = Standardization.from_rows(replicates[0].rows, dataset.column_names)
    d = dataset.rows.shape[1]
    if bandwidth is None:
        bandwidths = select_bandwidth(replicates[0])
    else:
        bandwidths = _resolve_bandwidths(bandwidth, d)
    return KdeModel(
        kernel=kernel,
        noise=spec,
        seed=int(seed),
        bandwidths=bandwidths,
        transform=transform,
        replicates=replicates,
    )


def _kde_replicate_values(model: KdeModel, point: np.ndarray) -> np.ndarray:
    h = model.effective_bandwidths
    norm = float(np.prod(h))
    vals = np.empty(model.num_jitters)
    for r, rep in enumerate(model.replicates):
        k = model.kernel.profile((rep.rows - point) / h)
        vals[r] = k.prod(axis=1).sum() / (rep.n * norm)
    return vals


def kde_eval(model: KdeModel, point) -> float:
    """Density estimate at ``point`` (original units).

    The value is the arithmetic mean of the per-replicate product-kernel
    estimates; it is nonnegative and a pure function of (model, point).
    """
    point = np.asarray(point, dtype=float)
    d = len(model.schema)
    if point.shape != (d,):
        raise InvalidParameterError(f"point must have {d} coordinates, got shape {point.shape}")
    return float(np.mean(_kde_replicate_values(model, point)))


@dataclass(frozen=True, eq=False)
class LocLinModel:
    """Fitted jittered local linear regression estimator.

    The covariate block mirrors :class:`KdeModel` (jittered replicates,
    standardization, per-covariate bandwidths); the response column is
    kept on its original values unless it is discrete and response
    jittering was requested at fit time.
    """

    response_index: int
    kernel: Kernel
    noise: NoiseSpec
    seed: int
    bandwidths: np.ndarray
    transform: Standardization
    replicates: tuple[JitteredDataset, ...] = field(repr=False)
    jitter_response: bool = False

    def __post_init__(self):
        b = np.asarray(self.bandwidths, dtype=float)
        b.setflags(write=False)
        object.__setattr__(self, "bandwidths", b)
        object.__setattr__(self, "replicates", tuple(self.replicates))
        if not self.replicates:
            raise InvalidParameterError("model needs at least one jitter replicate")
        d = len(self.schema) - 1
        if b.shape != (d,):
            raise InvalidParameterError(
                f"expected {d} covariate bandwidths, got shape {b.shape}"
            )

    @property
    def schema(self) -> tuple[ColumnSchema, ...]:
        return self.replicates[0].schema

    @property
    def origin(self) -> MixedDataset:
        return self.replicates[0].origin

    @property
    def num_jitters(self) -> int:
        return len(self.replicates)

    @property
    def covariate_indices(self) -> tuple[int, ...]:
        return tuple(j for j in range(len(self.schema)) if j != self.response_index)

    def response_values(self, replicate: JitteredDataset) -> np.ndarray:
        if self.jitter_response:
            return replicate.rows[:, self.response_index]
        return self.origin.rows[:, self.response_index]


def fit_loclin(
    dataset: MixedDataset,
    response_index: int,
    spec: NoiseSpec,
    kernel: Kernel = GAUSSIAN,
    num_jitters: int = 1,
    seed: int = 0,
    bandwidth=None,
    jitter_response: bool = False,
) -> LocLinModel:
    """Fit jittered local linear regression of one column on the rest.

    Covariates are jittered (discrete ones) and standardized; the
    response stays on original values unless ``jitter_response`` is set
    and the response column is discrete. Deterministic given its inputs.
    """
    if num_jitters < 1:
        raise InvalidParameterError(f"num_jitters must be >= 1, got {num_jitters}")
    _reject_categorical(dataset)
    ncol = len(dataset.schema)
    if not 0 <= response_index < ncol:
        raise SchemaError(f"response_index {response_index} out of range for {ncol} columns")
    d = ncol - 1
    if d < 1:
        raise SchemaError("local linear regression needs at least one covariate")
    if dataset.n < d + 2:
        raise InsufficientDataError(
            f"local linear fit needs n >= d + 2 = {d + 2} rows, got {dataset.n}"
        )
    response_kind = dataset.schema[response_index].kind
    replicates = tuple(jitter(dataset, spec, seed, r) for r in range(num_jitters))
    cov_idx = tuple(j for j in range(ncol) if j != response_index)
    cov_names = tuple(dataset.schema[j].name for j in cov_idx)
    transform = Standardization.from_rows(replicates[0].rows[:, cov_idx], cov_names)
    if bandwidth is None:
        bandwidths = select_bandwidth(replicates[0].rows[:, cov_idx])
    else:
        bandwidths = _resolve_bandwidths(bandwidth, d)
    return LocLinModel(
        response_index=int(response_index),
        kernel=kernel,
        noise=spec,
        seed=int(seed),
        bandwidths=bandwidths,
        transform=transform,
        replicates=replicates,
        jitter_response=bool(jitter_response and response_kind == "discrete_ordered"),
    )


def _weighted_local_fit(dx: np.ndarray, w: np.ndarray, y: np.ndarray) -> float:
    """Solve the kernel-weighted least squares for the local intercept.

    Minimizes ``sum_i w_i (y_i - m - beta' dx_i)^2``; returns ``m``, the
    fitted value at the evaluation point. Falls back to a small ridge on
    the normal equations only when the local design is singular.
    """
    a = np.column_stack([np.ones(dx.shape[0]), dx])
    m = a.T @ (a * w[:, None])
    rhs = a.T @ (w * y)
    try:
        beta = np.linalg.solve(m, rhs)
        if np.all(np.isfinite(beta)):
            return float(beta[0])
    except np.linalg.LinAlgError:
        pass
    ridge = _RIDGE_FACTOR * np.trace(m) / m.shape[0]
    beta = np.linalg.solve(m + ridge * np.eye(m.shape[0]), rhs)
    return float(beta[0])


def loclin_eval(model: LocLinModel, covariate_point) -> float:
    """Estimated conditional mean of the response at ``covariate_point``.

    Per replicate, solves the product-kernel weighted least squares
    around the point and returns the replicate average of the local
    intercept. Raises :class:`NoLocalDataError` when the total kernel
    weight in any replicate is below 1e-12.
    """
    x0 = np.asarray(covariate_point, dtype=float)
    cov_idx = model.covariate_indices
    if x0.shape != (len(cov_idx),):
        raise InvalidParameterError(
            f"covariate point must have {len(cov_idx)} coordinates, got shape {x0.shape}"
        )
    h = model.bandwidths * model.transform.scales
    estimates = np.empty(model.num_jitters)
    for r, rep in enumerate(model.replicates):
        cov = rep.rows[:, cov_idx]
        w = model.kernel.profile((cov - x0) / h).prod(axis=1)
        total = w.sum()
        if not total > _MIN_TOTAL_WEIGHT:
            raise NoLocalDataError(
                f"total kernel weight {total} at point {x0.tolist()} (replicate {r})"
            )
        estimates[r] = _weighted_local_fit(cov - x0, w, model.response_values(rep))
    return float(np.mean(estimates))


def _schema_payload(schema) -> list:
    return [(c.name, c.kind, list(c.levels) if c.levels is not None else None) for c in schema]


def _schema_from_payload(payload) -> tuple[ColumnSchema, ...]:
    return tuple(
        ColumnSchema(name, kind, tuple(levels) if levels is not None else None)
        for name, kind, levels in payload
    )


def save_model(model: KdeModel | LocLinModel, path) -> None:
    """Serialize a fitted model to a versioned binary artifact.

    The payload is plain data (arrays, scalars, schema tuples), so a
    reload reproduces evaluations bit-identically and identical fits
    serialize to identical bytes.
    """
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "type": "loclin" if isinstance(model, LocLinModel) else "kde",
        "kernel": model.kernel.name,
        "noise": (model.noise.theta, model.noise.nu, model.noise.dims),
        "seed": model.seed,
        "bandwidths": np.asarray(model.bandwidths),
        "transform": (np.asarray(model.transform.means), np.asarray(model.transform.scales)),
        "schema": _schema_payload(model.schema),
        "origin_rows": np.asarray(model.origin.rows),
        "replicates": [
            (rep.replicate_index, np.asarray(rep.rows)) for rep in model.replicates
        ],
    }
    if isinstance(model, LocLinModel):
        payload["response_index"] = model.response_index
        payload["jitter_response"] = model.jitter_response
    with open(path, "wb") as fh:
        fh.write(pickle.dumps(payload, protocol=4))


def load_model(path) -> KdeModel | LocLinModel:
    """Load a model written by :func:`save_model`."""
    with open(path, "rb") as fh:
        payload = pickle.loads(fh.read())
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise InvalidParameterError(f"{path}: not a jitterkit model artifact")
    if payload.get("version") != MODEL_VERSION:
        raise InvalidParameterError(
            f"{path}: unsupported model version {payload.get('version')}"
        )
    schema = _schema_from_payload(payload["schema"])
    origin = MixedDataset(schema=schema, rows=payload["origin_rows"])
    theta, nu, dims = payload["noise"]
    spec = NoiseSpec(theta=theta, nu=nu, dims=dims)
    replicates = tuple(
        JitteredDataset(
            origin=origin,
            noise=spec,
            seed=payload["seed"],
            replicate_index=idx,
            rows=rows,
        )
        for idx, rows in payload["replicates"]
    )
    transform = Standardization(means=payload["transform"][0], scales=payload["transform"][1])
    common = dict(
        kernel=Kernel(payload["kernel"]),
        noise=spec,
        seed=payload["seed"],
        bandwidths=payload["bandwidths"],
        transform=transform,
        replicates=replicates,
    )
    if payload["type"] == "loclin":
        return LocLinModel(
            response_index=payload["response_index"],
            jitter_response=payload["jitter_response"],
            **common,
        )
    return KdeModel(**common)
