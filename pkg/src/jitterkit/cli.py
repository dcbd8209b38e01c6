"""Command-line front end.

Subcommands: jitter, fit, eval, verify, simulate, benchmark. Every
subcommand is deterministic given --seed (default 0). Option precedence
is flags > config file > built-in defaults. Exit codes: 0 success,
1 usage error, 2 data error, 3 numerical or verification failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import sys

import numpy as np

from .data import ColumnSchema, MixedDataset, dummy_code, jitter, load_csv, write_csv
from .errors import (
    DegenerateColumnError,
    IngestionError,
    InsufficientDataError,
    InvalidParameterError,
    NoLocalDataError,
    NumericalError,
    QuantileSearchError,
    SchemaError,
    UndefinedConditionalError,
)
from .estimators import (
    KdeModel,
    LocLinModel,
    fit_kde,
    fit_loclin,
    get_kernel,
    kde_eval,
    load_model,
    loclin_eval,
    save_model,
)
from .noise import NoiseSpec, eta_density, verify_membership
from .oracle import (
    DiscretePmf,
    convolve_density,
    finite_difference,
    model_from_config,
    sample_model,
    true_conditional,
)
from .regression import (
    FunctionalQuery,
    _kde_response_slice,
    classify,
    cond_cdf,
    cond_mean,
    cond_quantile,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

# documented defaults; --seed 0 keeps every run reproducible unless overridden
DEFAULTS = {
    "seed": 0,
    "theta": 0.8,
    "nu": 5,
    "jitters": 1,
    "kernel": "gaussian",
    "replicate": 0,
    "estimator": "kde",
    "functional": "density",
    "grid_points": 401,
    "tol": 1e-8,
    "count": 1000,
    "n_grid": "500,2000,8000",
    "seeds": 20,
    "functionals": "kde_atom_mae",
    "workers": 4,
}

_VERIFY_BATTERY = [(t, v) for t in (0.0, 0.4, 0.8) for v in (1, 2, 5)]
_BENCH_FUNCTIONALS = ("kde_atom_mae", "mean_abs_err")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _add_noise_opts(p):
    p.add_argument("--theta", type=float, default=None, help="noise shoulder width in [0, 1)")
    p.add_argument("--nu", type=int, default=None, help="noise smoothness (positive integer)")
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")


def _add_schema_opts(p):
    p.add_argument("--discrete", default=None, help="comma-separated discrete column names")
    p.add_argument("--continuous", default=None, help="comma-separated continuous column names")
    p.add_argument("--categorical", default=None, help="comma-separated categorical column names")


def _add_config_opt(p):
    p.add_argument("--config", default=None, help="JSON config file (flags take precedence)")


def build_parser() -> _Parser:
    parser = _Parser(prog="jitterkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("jitter", parents=[], help="jitter a CSV dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--replicate", type=int, default=None, help="replicate index (default 0)")
    _add_schema_opts(p)
    _add_noise_opts(p)
    _add_config_opt(p)
    p.set_defaults(func=run_jitter)

    p = sub.add_parser("fit", help="fit a jittered estimator and save the model")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="model artifact path")
    p.add_argument("--estimator", choices=("kde", "loclin"), default=None)
    p.add_argument("--response", default=None, help="response column name (loclin)")
    p.add_argument("--jitter-response", action="store_true",
                   help="jitter a discrete response too (loclin)")
    p.add_argument("--jitters", type=int, default=None, help="number of jitter replicates")
    p.add_argument("--kernel", choices=("gaussian", "epanechnikov"), default=None)
    p.add_argument("--bandwidth", default=None,
                   help="override: one value or comma-separated per column")
    _add_schema_opts(p)
    _add_noise_opts(p)
    _add_config_opt(p)
    p.set_defaults(func=run_fit)

    p = sub.add_parser("eval", help="evaluate a fitted model")
    p.add_argument("--model", required=True, help="model artifact path")
    p.add_argument("--functional", default=None,
                   choices=("density", "mean", "cdf", "quantile", "class_probs"))
    p.add_argument("--response", default=None, help="response column name")
    p.add_argument("--at", default=None, help="covariate point, e.g. 'z=2,x=0.5'")
    p.add_argument("--threshold", type=float, default=None, help="cdf threshold")
    p.add_argument("--alpha", type=float, default=None, help="quantile level in [0, 1]")
    p.add_argument("--classes", default=None, help="comma-separated dummy column names")
    p.add_argument("--output", default=None, help="output CSV (default stdout)")
    _add_config_opt(p)
    p.set_defaults(func=run_eval)

    p = sub.add_parser("verify", help="run the noise and density identity checks")
    p.add_argument("--theta", type=float, default=None, help="check a single theta")
    p.add_argument("--nu", type=int, default=None, help="check a single nu")
    p.add_argument("--grid-points", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--corrupt-eta-scale", type=float, default=None, help=argparse.SUPPRESS)
    _add_config_opt(p)
    p.set_defaults(func=run_verify)

    p = sub.add_parser("simulate", help="draw a synthetic dataset to CSV")
    p.add_argument("--model-config", required=True, help="JSON synthetic model config")
    p.add_argument("--count", type=int, default=None, help="number of rows")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", required=True)
    _add_config_opt(p)
    p.set_defaults(func=run_simulate)

    p = sub.add_parser("benchmark", help="empirical error vs sample size study")
    p.add_argument("--model-config", required=True, help="JSON synthetic model config")
    p.add_argument("--n-grid", default=None, help="comma-separated sample sizes")
    p.add_argument("--seeds", type=int, default=None, help="number of replications per n")
    p.add_argument("--jitters", type=int, default=None)
    p.add_argument("--kernel", choices=("gaussian", "epanechnikov"), default=None)
    p.add_argument("--functionals", default=None,
                   help=f"comma-separated subset of {_BENCH_FUNCTIONALS}")
    p.add_argument("--workers", type=int, default=None, help="concurrent (n, seed) cells")
    p.add_argument("--output", required=True, help="long-format CSV (n, seed, functional, error)")
    _add_noise_opts(p)
    _add_config_opt(p)
    p.set_defaults(func=run_benchmark)

    return parser


def _load_config(args) -> dict:
    path = getattr(args, "config", None)
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise IngestionError(f"{path}: config must be a JSON object")
    return cfg


def _opt(args, cfg: dict, key: str):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in cfg:
        return cfg[key]
    return DEFAULTS.get(key)


def _split_names(text) -> list[str]:
    if not text:
        return []
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _read_header(path) -> list[str]:
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), None)
    if header is None:
        raise IngestionError(f"{path}: empty file, expected a header row")
    return header


def _schema_from_flags(path, args, cfg) -> list[ColumnSchema]:
    kinds = {}
    for flag, kind in (
        ("discrete", "discrete_ordered"),
        ("continuous", "continuous"),
        ("categorical", "categorical"),
    ):
        for name in _split_names(_opt(args, cfg, flag)):
            if name in kinds:
                raise IngestionError(f"column {name!r} assigned more than one kind")
            kinds[name] = kind
    header = _read_header(path)
    missing = [name for name in header if name not in kinds]
    if missing:
        raise IngestionError(f"{path}: no kind declared for columns {missing}")
    unknown = [name for name in kinds if name not in header]
    if unknown:
        raise IngestionError(f"{path}: declared columns {unknown} not in header {header}")
    return [ColumnSchema(name, kinds[name]) for name in header]


def _noise_spec(args, cfg, dims: int) -> NoiseSpec:
    return NoiseSpec(
        theta=float(_opt(args, cfg, "theta")),
        nu=int(_opt(args, cfg, "nu")),
        dims=dims,
    )


def _parse_bandwidth(text):
    if text is None:
        return None
    vals = [float(t) for t in _split_names(text)]
    return vals[0] if len(vals) == 1 else vals


def _parse_point(text) -> dict[str, float]:
    point = {}
    for item in _split_names(text):
        if "=" not in item:
            raise InvalidParameterError(f"bad covariate assignment {item!r}; use name=value")
        name, _, value = item.partition("=")
        point[name.strip()] = float(value)
    return point


def _write_rows(path, header: list[str], rows: list[list]) -> None:
    def emit(fh):
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)

    if path is None:
        emit(sys.stdout)
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            emit(fh)


def run_jitter(args) -> int:
    cfg = _load_config(args)
    schema = _schema_from_flags(args.input, args, cfg)
    dataset = load_csv(args.input, schema)
    spec = _noise_spec(args, cfg, dims=len(dataset.indices_of_kind("discrete_ordered")))
    jittered = jitter(
        dataset, spec, seed=int(_opt(args, cfg, "seed")),
        replicate_index=int(_opt(args, cfg, "replicate")),
    )
    write_csv(jittered, args.output)
    return EXIT_OK


def run_fit(args) -> int:
    cfg = _load_config(args)
    schema = _schema_from_flags(args.input, args, cfg)
    dataset = load_csv(args.input, schema)
    for col in list(dataset.schema):
        if col.kind == "categorical":
            dataset = dummy_code(dataset, col.name)
    spec = _noise_spec(args, cfg, dims=len(dataset.indices_of_kind("discrete_ordered")))
    kernel = get_kernel(str(_opt(args, cfg, "kernel")))
    jitters = int(_opt(args, cfg, "jitters"))
    seed = int(_opt(args, cfg, "seed"))
    bandwidth = _parse_bandwidth(_opt(args, cfg, "bandwidth"))
    estimator = str(_opt(args, cfg, "estimator"))
    if estimator == "loclin":
        response = _opt(args, cfg, "response")
        if response is None:
            raise InvalidParameterError("loclin fits need --response")
        model = fit_loclin(
            dataset, dataset.column_index(str(response)), spec,
            kernel=kernel, num_jitters=jitters, seed=seed, bandwidth=bandwidth,
            jitter_response=bool(args.jitter_response),
        )
    else:
        model = fit_kde(
            dataset, spec, kernel=kernel, num_jitters=jitters, seed=seed, bandwidth=bandwidth,
        )
    save_model(model, args.output)
    return EXIT_OK


def _response_kind_of(model, index: int) -> str:
    return "discrete" if model.schema[index].kind == "discrete_ordered" else "continuous"


def run_eval(args) -> int:
    cfg = _load_config(args)
    model = load_model(args.model)
    functional = str(_opt(args, cfg, "functional"))
    at = _parse_point(_opt(args, cfg, "at"))
    names = [c.name for c in model.schema]
    for name in at:
        if name not in names:
            raise SchemaError(f"--at names unknown column {name!r}")
    at_text = ";".join(f"{k}={at[k]!r}" for k in sorted(at))
    header = ["kind", "target", "param", "at", "value", "denominator_mass"]

    if isinstance(model, LocLinModel):
        if functional != "mean":
            raise InvalidParameterError("loclin models evaluate the conditional mean only")
        cov_names = [names[j] for j in model.covariate_indices]
        missing = [n for n in cov_names if n not in at]
        if missing:
            raise InvalidParameterError(f"--at must set every covariate; missing {missing}")
        point = [at[n] for n in cov_names]
        value = loclin_eval(model, point)
        _write_rows(args.output, header,
                    [["mean", names[model.response_index], "", at_text, repr(value), ""]])
        return EXIT_OK

    assert isinstance(model, KdeModel)
    if functional == "density":
        missing = [n for n in names if n not in at]
        if missing:
            raise InvalidParameterError(f"density needs every column in --at; missing {missing}")
        value = kde_eval(model, [at[n] for n in names])
        _write_rows(args.output, header, [["density", "", "", at_text, repr(value), ""]])
        return EXIT_OK

    response = _opt(args, cfg, "response")
    if functional != "class_probs" and response is None:
        raise InvalidParameterError(f"--response is required for {functional}")
    covariate_point = {names.index(n): v for n, v in at.items()}

    if functional == "class_probs":
        class_names = _split_names(_opt(args, cfg, "classes"))
        if not class_names:
            raise InvalidParameterError("class_probs needs --classes")
        class_cols = tuple(names.index(n) for n in class_names)
        query = FunctionalQuery(
            kind="class_probs", response_index=class_cols[0], response_kind="discrete",
            covariate_point=covariate_point, class_columns=class_cols,
        )
        est = classify(model, query)
        rows = [
            ["class_prob", class_names[i], "", at_text, repr(float(p)),
             repr(est.denominator_mass)]
            for i, p in enumerate(est.value)
        ]
        _write_rows(args.output, header, rows)
        return EXIT_OK

    r_index = names.index(str(response))
    r_kind = _response_kind_of(model, r_index)
    query = FunctionalQuery(
        kind=functional,
        response_index=r_index,
        response_kind=r_kind,
        covariate_point=covariate_point,
        threshold=_opt(args, cfg, "threshold"),
        alpha=_opt(args, cfg, "alpha"),
    )
    est = {"mean": cond_mean, "cdf": cond_cdf, "quantile": cond_quantile}[functional](model, query)
    param = "" if functional == "mean" else repr(
        float(query.threshold if functional == "cdf" else query.alpha)
    )
    _write_rows(args.output, header,
                [[functional, str(response), param, at_text, repr(float(est.value)),
                  repr(est.denominator_mass)]])
    return EXIT_OK


def run_verify(args) -> int:
    cfg = _load_config(args)
    grid_points = int(_opt(args, cfg, "grid_points"))
    tol = float(_opt(args, cfg, "tol"))
    corrupt = _opt(args, cfg, "corrupt_eta_scale")
    theta = getattr(args, "theta", None)
    nu = getattr(args, "nu", None)
    if theta is not None and nu is not None:
        battery = [(float(theta), int(nu))]
    else:
        battery = _VERIFY_BATTERY

    pmf = DiscretePmf.binomial(4, 0.3)
    atoms = list(pmf.support)
    lines = []
    failures = 0

    def record(label: str, check: str, value: float, ok: bool):
        nonlocal failures
        if not ok:
            failures += 1
        lines.append((label, check, value, "PASS" if ok else "FAIL"))

    for t, v in battery:
        spec = NoiseSpec(theta=t, nu=v, dims=1)
        label = f"theta={t:g} nu={v}"
        density = None
        if corrupt is not None:
            scale = float(corrupt)
            density = lambda x, _s=spec, _c=scale: _c * eta_density(_s, x)
        report = verify_membership(spec, grid_points=grid_points, tol=tol, density=density)
        f = density if density is not None else (lambda x, _s=spec: eta_density(_s, x))
        plateau_grid = np.linspace(-spec.gamma1, spec.gamma1, 101)
        plateau_dev = max(abs(f(x) - 1.0) for x in plateau_grid)
        record(label, "eta(0) == 1", report.value_at_zero, report.value_at_zero == 1.0)
        record(label, "plateau max|eta-1| <= 1e-12", plateau_dev, plateau_dev <= 1e-12)
        record(label, "eta == 0 outside support", report.max_abs_outside_support,
               report.max_abs_outside_support == 0.0)
        record(label, "|mass - 1| <= 1e-8", abs(report.mass - 1.0),
               abs(report.mass - 1.0) <= 1e-8)

        conv_err = max(
            abs(convolve_density(pmf, spec, float(z)) - pmf.mass(z)) for z in atoms
        )
        record(label, "convolution equals pmf at atoms", conv_err, conv_err <= 1e-10)
        if t == 0.0:
            step_err = max(
                abs(convolve_density(pmf, spec, z + 0.3) - pmf.mass(z)) for z in atoms
            )
            record(label, "theta=0 step structure at z+0.3", step_err, step_err <= 1e-10)
        else:
            h = spec.gamma1 / 2.0
            deriv = max(
                abs(finite_difference(
                    lambda s, _sp=spec: convolve_density(pmf, _sp, s), float(z), order, h
                ))
                for z in atoms
                for order in (1, 2)
            )
            record(label, "derivatives vanish at atoms", deriv, deriv <= 1e-6)

    width = max(len(label) for label, *_ in lines)
    cwidth = max(len(check) for _, check, *_ in lines)
    print(f"{'spec':<{width}}  {'check':<{cwidth}}  {'value':>12}  result")
    for label, check, value, result in lines:
        print(f"{label:<{width}}  {check:<{cwidth}}  {value:>12.3e}  {result}")
    print(f"\n{len(lines) - failures}/{len(lines)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_NUMERIC


def _dataset_from_samples(model, rows: np.ndarray) -> MixedDataset:
    schema = [ColumnSchema("z", "discrete_ordered")]
    if rows.shape[1] == 2:
        schema.append(ColumnSchema("x", "continuous"))
    return MixedDataset(schema=tuple(schema), rows=rows)


def run_simulate(args) -> int:
    cfg = _load_config(args)
    with open(args.model_config, encoding="utf-8") as fh:
        model = model_from_config(json.load(fh))
    count = int(_opt(args, cfg, "count"))
    seed = int(_opt(args, cfg, "seed"))
    rows = sample_model(model, count, seed)
    write_csv(_dataset_from_samples(model, rows), args.output)
    return EXIT_OK


def _bench_cell(model, spec_base, kernel_name, jitters, n, seed_idx, master_seed, functionals):
    data_seed = _derived_seed(master_seed, n, seed_idx, 0)
    fit_seed = _derived_seed(master_seed, n, seed_idx, 1)
    rows = sample_model(model, n, data_seed)
    dataset = _dataset_from_samples(model, rows)
    spec = NoiseSpec(theta=spec_base.theta, nu=spec_base.nu,
                     dims=len(dataset.indices_of_kind("discrete_ordered")))
    kde = fit_kde(dataset, spec, kernel=get_kernel(kernel_name),
                  num_jitters=jitters, seed=fit_seed)
    pmf = model.margin
    out = {}
    if "kde_atom_mae" in functionals:
        sl = _kde_response_slice(kde, 0, {})
        errs = [abs(sl.density(float(z)) - pmf.mass(z)) for z in pmf.support]
        out["kde_atom_mae"] = float(np.mean(errs))
    if "mean_abs_err" in functionals:
        query = FunctionalQuery(kind="mean", response_index=0, response_kind="discrete")
        est = cond_mean(kde, query)
        out["mean_abs_err"] = abs(float(est.value) - true_conditional(model, "mean"))
    return out


def _derived_seed(master: int, *key: int) -> int:
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def run_benchmark(args) -> int:
    cfg = _load_config(args)
    with open(args.model_config, encoding="utf-8") as fh:
        model = model_from_config(json.load(fh))
    n_grid = [int(t) for t in _split_names(_opt(args, cfg, "n_grid"))]
    seeds = int(_opt(args, cfg, "seeds"))
    jitters = int(_opt(args, cfg, "jitters"))
    kernel_name = str(_opt(args, cfg, "kernel"))
    master_seed = int(_opt(args, cfg, "seed"))
    functionals = _split_names(_opt(args, cfg, "functionals"))
    unknown = [f for f in functionals if f not in _BENCH_FUNCTIONALS]
    if unknown or not functionals:
        raise InvalidParameterError(
            f"functionals must be a nonempty subset of {_BENCH_FUNCTIONALS}, got {functionals}"
        )
    if not n_grid or seeds < 1:
        raise InvalidParameterError("need a nonempty n grid and seeds >= 1")
    spec_base = NoiseSpec(theta=float(_opt(args, cfg, "theta")),
                          nu=int(_opt(args, cfg, "nu")), dims=1)

    cells = [(n, s) for n in n_grid for s in range(seeds)]
    results = {}
    workers = max(1, int(_opt(args, cfg, "workers")))
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            pool.submit(_bench_cell, model, spec_base, kernel_name, jitters,
                        n, s, master_seed, functionals): (n, s)
            for n, s in cells
        }
        for fut in concurrent.futures.as_completed(futures):
            results[futures[fut]] = fut.result()

    rows = []
    for n, s in sorted(results):
        for functional in sorted(functionals):
            rows.append([n, s, functional, repr(results[(n, s)][functional])])
    _write_rows(args.output, ["n", "seed", "functional", "error"], rows)

    print("benchmark summary (mean error over seeds)")
    print(f"{'functional':<16}{'n':>8}  {'mean_error':>12}")
    for functional in sorted(functionals):
        means = []
        for n in n_grid:
            errs = [results[(n, s)][functional] for s in range(seeds)]
            means.append(float(np.mean(errs)))
            print(f"{functional:<16}{n:>8}  {means[-1]:>12.6f}")
        if len(n_grid) > 1 and all(m > 0 for m in means):
            slope = float(np.polyfit(np.log(n_grid), np.log(means), 1)[0])
            print(f"{functional:<16}{'log-log slope':>8}  {slope:>12.4f}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return EXIT_USAGE
    try:
        return int(args.func(args))
    except _UsageError:
        return EXIT_USAGE
    except InvalidParameterError as exc:
        print(f"jitterkit: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IngestionError, SchemaError, DegenerateColumnError,
            InsufficientDataError, UndefinedConditionalError, OSError,
            json.JSONDecodeError) as exc:
        print(f"jitterkit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, QuantileSearchError, NoLocalDataError) as exc:
        print(f"jitterkit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def run() -> None:
    sys.exit(main())
