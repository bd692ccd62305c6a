"""Sweep-driven command line for the outage analysis toolkit.

Verbs
-----
``sweep``       evaluate requested methods over a swept parameter, CSV out
``bound``       closed-form outage bound for one scenario
``exact``       numeric outage integral for one scenario
``asymptotic``  high-SNR approximation for one scenario
``mc``          Monte-Carlo estimate for one scenario
``design``      smallest surface sizes reaching a target outage
``preset``      canned multi-curve sweeps (``fig2``, ``fig3``)

Scenario files are flat ``key = value`` text (keys documented in
`ris_sop.channel.CONFIG_KEYS`); SNR-like inputs are decibels on ingest
and all internal math runs in linear scale.  Sweep output is CSV with a
fixed column order and full round-trip precision; a failed evaluation
leaves an ``ERROR`` sentinel in its column, the run continues, and the
process exits nonzero.

The ``fig2``/``fig3`` presets pin every scenario parameter of the two
bundled reproduction experiments.  Their swept-SNR axis defaults to
0-40 dB in 2 dB steps (an assumption — the source experiments do not
state the axis numerically).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import math
import sys
from typing import List, Optional, Sequence, Tuple, Union

from .analysis import (
    SopMethod,
    binary_asymptote,
    continuous_asymptote,
    sop_asymptotic,
    sop_bound_closed_form,
    sop_exact_numeric,
)
from .channel import (
    CONTINUOUS,
    QuantBits,
    SystemConfig,
    db_to_linear,
    linear_to_db,
    load_config,
    parse_quant_bits,
)
from .montecarlo import DEFAULT_TRIALS, McConfig, estimate_sop
from .numerics import QuadratureError

SWEEP_VARIABLES = ("gamma_srd_db", "n_elements", "quant_bits", "c_th")
METHOD_NAMES = ("bound", "exact", "asymptotic", "mc")
CSV_COLUMNS = (
    "gamma_srd_db",
    "n_elements",
    "quant_bits",
    "c_th",
    "sop_bound",
    "sop_exact",
    "sop_asymptotic",
    "sop_mc",
    "mc_ci_half_width",
    "mc_trials",
)
ERROR_SENTINEL = "ERROR"
MAX_DESIGN_ELEMENTS = 10**6

# Exceptions an evaluation may raise for one sweep point without
# aborting the rest of the run.
_POINT_ERRORS = (QuadratureError, ValueError, OverflowError, ZeroDivisionError)


def _value_order_key(variable: str, value):
    if variable == "quant_bits":
        return (1, 0) if value is CONTINUOUS else (0, value)
    return (0, value)


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    """One swept parameter, the methods to evaluate, and the MC budget."""

    base: SystemConfig
    sweep_variable: str
    values: Tuple
    methods: Tuple[str, ...]
    mc_config: McConfig

    def __post_init__(self) -> None:
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ValueError(
                f"sweep_variable must be one of {SWEEP_VARIABLES}, "
                f"got {self.sweep_variable!r}"
            )
        if not self.values:
            raise ValueError("values must be non-empty")
        keys = [_value_order_key(self.sweep_variable, v) for v in self.values]
        if any(a >= b for a, b in zip(keys, keys[1:])):
            raise ValueError("values must be strictly increasing")
        if not self.methods:
            raise ValueError("methods must be non-empty")
        unknown = [m for m in self.methods if m not in METHOD_NAMES]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {METHOD_NAMES}")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("methods must not repeat")


@dataclasses.dataclass(frozen=True)
class SweepRow:
    """One sweep point's resolved parameters and per-method results.

    A method's column is None when it was not requested; a method listed
    in ``failed`` was requested but raised, and renders as the CSV error
    sentinel.
    """

    gamma_srd_db: float
    n_elements: int
    quant_bits: QuantBits
    c_th: float
    sop_bound: Optional[float] = None
    sop_exact: Optional[float] = None
    sop_asymptotic: Optional[float] = None
    sop_mc: Optional[float] = None
    mc_ci_half_width: Optional[float] = None
    mc_trials: Optional[int] = None
    failed: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for name in ("sop_bound", "sop_exact", "sop_asymptotic", "sop_mc"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        unknown = [m for m in self.failed if m not in METHOD_NAMES]
        if unknown:
            raise ValueError(f"failed lists unknown methods {unknown}")


def resolve_config(base: SystemConfig, variable: str, value) -> SystemConfig:
    """The base scenario with one swept field replaced."""
    if variable == "gamma_srd_db":
        return dataclasses.replace(base, gamma_srd_bar=db_to_linear(value))
    if variable == "n_elements":
        return dataclasses.replace(base, n_elements=value)
    if variable == "quant_bits":
        return dataclasses.replace(base, quant_bits=value)
    if variable == "c_th":
        return dataclasses.replace(base, c_th=value)
    raise ValueError(f"unknown sweep variable {variable!r}")


def evaluate_sweep_point(
    cfg: SystemConfig,
    methods: Sequence[str],
    mc_config: McConfig,
    trial_offset: int = 0,
) -> SweepRow:
    """Evaluate every requested method for one resolved scenario.

    A method failure is recorded and does not disturb the others.
    """
    results = {}
    failed = []
    for method in methods:
        try:
            if method == "bound":
                results["sop_bound"] = sop_bound_closed_form(cfg).value
            elif method == "exact":
                results["sop_exact"] = sop_exact_numeric(cfg).value
            elif method == "asymptotic":
                results["sop_asymptotic"] = sop_asymptotic(cfg).value
            elif method == "mc":
                mc_result = estimate_sop(cfg, mc_config, trial_offset=trial_offset)
                results["sop_mc"] = mc_result.sop_hat
                results["mc_ci_half_width"] = mc_result.ci_half_width
                results["mc_trials"] = mc_result.trials
            else:
                raise ValueError(f"unknown method {method!r}")
        except _POINT_ERRORS:
            failed.append(method)
    return SweepRow(
        gamma_srd_db=linear_to_db(cfg.gamma_srd_bar),
        n_elements=cfg.n_elements,
        quant_bits=cfg.quant_bits,
        c_th=cfg.c_th,
        failed=tuple(failed),
        **results,
    )


def _run_points(
    points: Sequence[Tuple[SystemConfig, Tuple[str, ...], Optional[float]]],
    mc_config: McConfig,
) -> List[SweepRow]:
    """Evaluate resolved sweep points, rows returned in sweep order.

    Each point is ``(cfg, methods, snr_db_label)``; a non-None label
    replaces the derived ``gamma_srd_db`` cell so swept decibel inputs
    echo exactly.  Each point consumes the disjoint trial range
    ``[index*trials, (index+1)*trials)`` of the master seed's stream, so
    the full result set is deterministic however the points are
    scheduled.  The worker budget applies at the point level; each
    point's own Monte-Carlo loop then runs single-threaded.
    """
    point_mc = dataclasses.replace(mc_config, workers=1)

    def job(index: int) -> SweepRow:
        cfg, methods, db_label = points[index]
        row = evaluate_sweep_point(
            cfg, methods, point_mc, trial_offset=index * mc_config.trials
        )
        if db_label is not None:
            row = dataclasses.replace(row, gamma_srd_db=float(db_label))
        return row

    if mc_config.workers == 1 or len(points) == 1:
        return [job(i) for i in range(len(points))]
    with concurrent.futures.ThreadPoolExecutor(
        max_workers=min(mc_config.workers, len(points))
    ) as pool:
        futures = [pool.submit(job, i) for i in range(len(points))]
        return [f.result() for f in futures]


def run_sweep(spec: SweepSpec, out_path=None) -> List[SweepRow]:
    """Evaluate a sweep and optionally write the CSV."""
    snr_sweep = spec.sweep_variable == "gamma_srd_db"
    points = [
        (
            resolve_config(spec.base, spec.sweep_variable, value),
            spec.methods,
            value if snr_sweep else None,
        )
        for value in spec.values
    ]
    rows = _run_points(points, spec.mc_config)
    if out_path is not None:
        write_sweep_csv(rows, out_path)
    return rows


def _format_cell(column: str, row: SweepRow) -> str:
    if column == "quant_bits":
        return "continuous" if row.quant_bits is CONTINUOUS else repr(row.quant_bits)
    value = getattr(row, column)
    method = {
        "sop_bound": "bound",
        "sop_exact": "exact",
        "sop_asymptotic": "asymptotic",
        "sop_mc": "mc",
        "mc_ci_half_width": "mc",
        "mc_trials": "mc",
    }.get(column)
    if method is not None and method in row.failed:
        return ERROR_SENTINEL
    if value is None:
        return ""
    if column in ("n_elements", "mc_trials"):
        return repr(int(value))
    return repr(float(value))


def rows_to_csv_text(rows: Sequence[SweepRow]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_format_cell(column, row) for column in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rows_to_csv_text(rows))


def parse_sweep_csv_text(text: str) -> List[SweepRow]:
    """Parse CSV produced by `rows_to_csv_text` (exact round-trip)."""
    lines = text.splitlines()
    if not lines or lines[0] != ",".join(CSV_COLUMNS):
        raise ValueError("missing or unexpected CSV header")
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != len(CSV_COLUMNS):
            raise ValueError(f"expected {len(CSV_COLUMNS)} fields, got {len(cells)}")
        record = dict(zip(CSV_COLUMNS, cells))
        failed = []
        kwargs = {}
        for column, cell in record.items():
            if column == "quant_bits":
                kwargs[column] = parse_quant_bits(cell)
            elif column in ("gamma_srd_db", "c_th"):
                kwargs[column] = float(cell)
            elif column == "n_elements":
                kwargs[column] = int(cell)
            elif cell == ERROR_SENTINEL:
                method = "mc" if column.startswith("mc_") else column[len("sop_"):]
                if method not in failed:
                    failed.append(method)
            elif cell == "":
                kwargs[column] = None
            elif column == "mc_trials":
                kwargs[column] = int(cell)
            else:
                kwargs[column] = float(cell)
        rows.append(SweepRow(failed=tuple(failed), **kwargs))
    return rows


def load_sweep_csv(path) -> List[SweepRow]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_sweep_csv_text(fh.read())


@dataclasses.dataclass(frozen=True)
class DesignRecommendation:
    """Smallest surfaces meeting a target outage, per phase-control mode."""

    n_binary: int
    n_continuous: int
    ratio: float


def design_query(target_sop: float, cfg: SystemConfig) -> DesignRecommendation:
    """Smallest surface sizes whose asymptotic outage meets a target.

    ``cfg`` supplies the SNR scene (its own ``n_elements``/``quant_bits``
    are ignored); the SNR-advantage factor is re-evaluated at each
    candidate size since the direct eavesdropper path is shared across
    the surface.  Raises ValueError when even a million elements cannot
    reach the target.
    """
    if not 0.0 < target_sop < 1.0:
        raise ValueError(f"target_sop must lie in (0, 1), got {target_sop}")

    def k_at(n: int) -> float:
        return cfg.gamma_srd_bar / (cfg.gamma_sre_bar + cfg.gamma_se_bar / n)

    def smallest(asymptote) -> int:
        if asymptote(1, k_at(1)) <= target_sop:
            return 1
        if asymptote(MAX_DESIGN_ELEMENTS, k_at(MAX_DESIGN_ELEMENTS)) > target_sop:
            raise ValueError(
                f"target {target_sop} unreachable within "
                f"{MAX_DESIGN_ELEMENTS} elements"
            )
        low, high = 1, MAX_DESIGN_ELEMENTS  # predicate false at low, true at high
        while high - low > 1:
            mid = (low + high) // 2
            if asymptote(mid, k_at(mid)) <= target_sop:
                high = mid
            else:
                low = mid
        return high

    n_binary = smallest(binary_asymptote)
    n_continuous = smallest(continuous_asymptote)
    return DesignRecommendation(
        n_binary=n_binary,
        n_continuous=n_continuous,
        ratio=n_binary / n_continuous,
    )


def _preset_base(c_th: float) -> SystemConfig:
    return SystemConfig(
        n_elements=30,
        quant_bits=1,
        gamma_srd_bar=1.0,
        gamma_sre_bar=db_to_linear(0.0),
        gamma_se_bar=db_to_linear(-5.0),
        c_th=c_th,
    )


def _preset_snr_values() -> Tuple[float, ...]:
    return tuple(float(db) for db in range(0, 41, 2))


def preset_points(
    name: str,
) -> List[Tuple[SystemConfig, Tuple[str, ...], Optional[float]]]:
    """Resolved (scenario, methods, snr-label) points of a named preset."""
    snr_values = _preset_snr_values()
    points = []
    if name == "fig2":
        methods = ("bound", "mc")
        base = _preset_base(c_th=0.05)
        for bits in (1, 2, 3, CONTINUOUS):
            for db in snr_values:
                cfg = dataclasses.replace(
                    base, quant_bits=bits, gamma_srd_bar=db_to_linear(db)
                )
                points.append((cfg, methods, db))
    elif name == "fig3":
        methods = ("bound", "asymptotic", "mc")
        base = _preset_base(c_th=0.2)
        for n, bits in ((30, CONTINUOUS), (30, 1), (48, 1), (60, 1)):
            for db in snr_values:
                cfg = dataclasses.replace(
                    base,
                    n_elements=n,
                    quant_bits=bits,
                    gamma_srd_bar=db_to_linear(db),
                )
                points.append((cfg, methods, db))
    else:
        raise ValueError(f"unknown preset {name!r}; choose fig2 or fig3")
    return points


def run_preset(name: str, mc_config: McConfig, out_path=None) -> List[SweepRow]:
    rows = _run_points(preset_points(name), mc_config)
    if out_path is not None:
        write_sweep_csv(rows, out_path)
    return rows


def _parse_sweep_values(variable: str, text: str):
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    if not tokens:
        raise ValueError("no sweep values given")
    if variable == "quant_bits":
        return tuple(parse_quant_bits(t) for t in tokens)
    if variable == "n_elements":
        return tuple(int(t) for t in tokens)
    return tuple(float(t) for t in tokens)


def _mc_config_from_args(args) -> McConfig:
    return McConfig(
        trials=args.trials,
        master_seed=args.seed,
        workers=args.workers,
    )


def _add_common_flags(parser, with_mc=True) -> None:
    parser.add_argument("--config", required=True, help="scenario file (key = value)")
    parser.add_argument("--out", help="write results as CSV to this path")
    if with_mc:
        parser.add_argument(
            "--trials",
            type=int,
            default=DEFAULT_TRIALS,
            help="Monte-Carlo trials per point",
        )
        parser.add_argument(
            "--seed", type=int, default=2024, help="master seed for the trial stream"
        )
        parser.add_argument(
            "--workers", type=int, default=1, help="worker-thread budget"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ris-sop",
        description="Secrecy-outage analysis of a reflecting-surface link",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    sweep = sub.add_parser("sweep", help="evaluate methods over a swept parameter")
    _add_common_flags(sweep)
    sweep.add_argument(
        "--variable",
        default="gamma_srd_db",
        choices=SWEEP_VARIABLES,
        help="which parameter to sweep",
    )
    sweep.add_argument(
        "--values",
        help="comma-separated sweep values (default: 0-40 dB in 2 dB steps)",
    )
    sweep.add_argument(
        "--methods",
        default="bound",
        help=f"comma-separated subset of {','.join(METHOD_NAMES)}",
    )

    for verb in ("bound", "exact", "asymptotic"):
        single = sub.add_parser(verb, help=f"single-point {verb} evaluation")
        _add_common_flags(single, with_mc=False)

    mc = sub.add_parser("mc", help="single-point Monte-Carlo estimate")
    _add_common_flags(mc)

    design = sub.add_parser("design", help="surface sizes reaching a target outage")
    _add_common_flags(design, with_mc=False)
    design.add_argument(
        "--target-sop", type=float, required=True, help="outage target in (0, 1)"
    )

    preset = sub.add_parser("preset", help="run a canned reproduction sweep")
    preset.add_argument("name", nargs="?", choices=("fig2", "fig3"))
    preset.add_argument("--preset", dest="preset_name", choices=("fig2", "fig3"))
    preset.add_argument("--out", help="write results as CSV to this path")
    preset.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    preset.add_argument("--seed", type=int, default=2024)
    preset.add_argument("--workers", type=int, default=1)
    return parser


def _exit_code(rows: Sequence[SweepRow]) -> int:
    return 2 if any(row.failed for row in rows) else 0


def _print_rows(rows: Sequence[SweepRow], out) -> None:
    out.write(rows_to_csv_text(rows))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = sys.stdout
    try:
        if args.verb == "sweep":
            base = load_config(args.config)
            values = (
                _parse_sweep_values(args.variable, args.values)
                if args.values
                else _preset_snr_values()
            )
            methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
            spec = SweepSpec(
                base=base,
                sweep_variable=args.variable,
                values=values,
                methods=methods,
                mc_config=_mc_config_from_args(args),
            )
            rows = run_sweep(spec, out_path=args.out)
            if args.out is None:
                _print_rows(rows, out)
            return _exit_code(rows)

        if args.verb in ("bound", "exact", "asymptotic"):
            cfg = load_config(args.config)
            row = evaluate_sweep_point(
                cfg, (args.verb,), McConfig(trials=1, master_seed=0)
            )
            if args.out is not None:
                write_sweep_csv([row], args.out)
            else:
                _print_rows([row], out)
            return _exit_code([row])

        if args.verb == "mc":
            cfg = load_config(args.config)
            row = evaluate_sweep_point(cfg, ("mc",), _mc_config_from_args(args))
            if args.out is not None:
                write_sweep_csv([row], args.out)
            else:
                _print_rows([row], out)
            return _exit_code([row])

        if args.verb == "design":
            cfg = load_config(args.config)
            rec = design_query(args.target_sop, cfg)
            out.write(
                f"n_binary={rec.n_binary}\n"
                f"n_continuous={rec.n_continuous}\n"
                f"ratio={rec.ratio!r}\n"
            )
            return 0

        if args.verb == "preset":
            name = args.name or args.preset_name
            if name is None:
                raise ValueError("preset requires a name (fig2 or fig3)")
            mc_config = McConfig(
                trials=args.trials, master_seed=args.seed, workers=args.workers
            )
            rows = run_preset(name, mc_config, out_path=args.out)
            if args.out is None:
                _print_rows(rows, out)
            return _exit_code(rows)

        raise ValueError(f"unknown verb {args.verb!r}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
