"""Command-line front door: generate, simulate, sweep, uc-check, opt, report.

Reproducibility contract: a command's CSV output is a pure function of
its resolved configuration. Every CSV starts with a '#' comment line
holding the resolved config as sorted-key JSON, floats are written with
repr (shortest round-trip), and newlines are always '\\n', so reruns are
byte-identical and diffs are meaningful.

Config files are JSON mirroring ExperimentConfig:

    {
      "predictor": {"minwidth": 1e-4, "mu": 5.0, "T": 2000,
                    "schedule": {"kind": "arbitrary", "alpha": 0.05}},
      "sequence": {"variant": "phased", "alpha": 0.05, "T": 2000,
                   "K": 4, "eps": 0.1, "i": 4},
      "trials": 1,
      "seed": 7,
      "out": "runs/demo"
    }

Schedule kinds: "arbitrary" (alpha, optional T), "exchangeable" (alpha,
optional C and T), "table" (rates list; give alpha alongside for the
hindsight benchmark). Sequence variants: "phased" (alpha, T, K, eps, i),
"dk_iid" (alpha, eps, K, T), "dk_then_constant" (+ switch_day),
"permutation" / "custom" ({"path": file}). Sweep configs wrap a base
config with a grid of dotted paths:

    {"base": {...}, "grid": {"predictor.mu": [4, 8, 16]},
     "trials": 5, "seed": 3, "out": "runs/sweep"}

Exit codes: 0 success, 2 config or validation failure, 3 bound violation
under --assert-bounds, 1 I/O failure.
"""

from __future__ import annotations

import argparse
import copy
import itertools
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import (
    UcReport,
    mistake_bound_check,
    phase_audit,
    uc_profile,
    volume_cap_check,
)
from .generators import (
    CustomSpec,
    DkIidSpec,
    DkParams,
    DkThenConstantSpec,
    PermutationSpec,
    PhasedSpec,
    SequenceSpec,
    _values_digest,
    derive_seed,
    generate,
    read_sequence,
    spec_from_dict,
    spec_to_dict,
    write_sequence,
)
from .oracle import Metrics, compute_metrics, opt_volume
from .plots import figure_path, render_sweep, render_trace, render_uc_profile
from .predictor import (
    ArbitraryOrderSchedule,
    ExchangeableSchedule,
    PredictorConfig,
    RunTrace,
    Schedule,
    TableSchedule,
    run,
)

_METRIC_COLUMNS = (
    "coverage",
    "mistakes",
    "avg_volume",
    "max_volume",
    "opt_volume",
    "mu_avg",
    "mu_max",
    "resets",
)

_TRACE_COLUMNS = ("day", "played_lo", "played_hi", "y", "covered", "reset")


# ---------------------------------------------------------------------------
# CSV plumbing


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: str, echo: dict, columns: Sequence[str], rows) -> None:
    lines = ["# " + json.dumps(echo, sort_keys=True), ",".join(columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def _read_csv(path: str) -> tuple[str | None, list[str], list[list[str]]]:
    comment: str | None = None
    body: list[list[str]] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        if line.startswith("#"):
            if comment is None:
                comment = line[1:].strip()
            continue
        body.append(line.split(","))
    if not body:
        raise ValueError(f"{path} holds no rows")
    return comment, body[0], body[1:]


def _get(d: dict, key: str, where: str):
    if key not in d:
        raise ValueError(f"{where} is missing {key!r}")
    return d[key]


# ---------------------------------------------------------------------------
# config resolution


def _schedule_from_dict(d: dict, T: int) -> Schedule:
    kind = d.get("kind", "arbitrary")
    if kind == "arbitrary":
        return ArbitraryOrderSchedule(
            alpha=float(_get(d, "alpha", "arbitrary schedule")), T=float(d.get("T", T))
        )
    if kind == "exchangeable":
        return ExchangeableSchedule(
            alpha=float(_get(d, "alpha", "exchangeable schedule")),
            T=float(d.get("T", T)),
            C=float(d.get("C", 1.0)),
        )
    if kind == "table":
        return TableSchedule(tuple(float(r) for r in _get(d, "rates", "table schedule")))
    raise ValueError(f"unknown schedule kind {kind!r}")


def _schedule_echo(s: Schedule) -> dict:
    if isinstance(s, ArbitraryOrderSchedule):
        return {"kind": "arbitrary", "alpha": s.alpha, "T": s.T}
    if isinstance(s, ExchangeableSchedule):
        return {"kind": "exchangeable", "alpha": s.alpha, "T": s.T, "C": s.C}
    return {"kind": "table", "rates": list(s.rates)}


def _sequence_spec(d: dict, seed: int, symmetric: bool) -> SequenceSpec:
    """Build a SequenceSpec from a config sequence entry.

    Permutation/custom entries name a file via "path"; the other
    variants carry their parameters inline. The experiment seed is used
    unless the entry pins its own.
    """
    d = dict(d)
    kind = _get(d, "variant", "sequence entry")
    if kind in ("permutation", "custom") and "path" in d:
        values, _ = read_sequence(d["path"])
        if kind == "permutation":
            variant = PermutationSpec(tuple(sorted(float(v) for v in values)))
        else:
            variant = CustomSpec(tuple(float(v) for v in values))
        return SequenceSpec(variant, seed=int(d.get("seed", seed)), symmetric=symmetric)
    d.setdefault("seed", seed)
    d["symmetric"] = symmetric or d.get("symmetric", False)
    return spec_from_dict(d)


@dataclass(frozen=True)
class ResolvedRun:
    """A fully resolved single run: predictor config, data, and echo."""

    pcfg: PredictorConfig
    values: np.ndarray
    alpha: float
    seed: int
    echo: dict


def _resolve(
    cfg: dict,
    seed: int,
    sequence_path: str | None = None,
    symmetric: bool = False,
) -> ResolvedRun:
    pred = dict(cfg.get("predictor", {}))
    if sequence_path is not None:
        values, fspec = read_sequence(sequence_path)
        if fspec is not None:
            seq_echo = spec_to_dict(fspec)
        else:
            seq_echo = {"variant": "file", "n": len(values), "values_sha256": _values_digest(values)}
    else:
        seq_entry = cfg.get("sequence")
        if not seq_entry:
            raise ValueError("no sequence: pass --sequence FILE or a config with a sequence entry")
        spec = _sequence_spec(seq_entry, seed, symmetric)
        values = generate(spec)
        seq_echo = spec_to_dict(spec)
    T = int(pred.get("T", len(values)))
    if len(values) < T:
        raise ValueError(f"sequence has {len(values)} values but T = {T}")
    values = values[:T]
    schedule = _schedule_from_dict(dict(pred.get("schedule", {})), T)
    pcfg = PredictorConfig(
        minwidth=float(pred.get("minwidth", 1e-4)),
        mu=float(pred.get("mu", 1.0)),
        T=T,
        schedule=schedule,
    )
    alpha = cfg.get("alpha", pred.get("schedule", {}).get("alpha", getattr(schedule, "alpha", None)))
    if alpha is None:
        raise ValueError("hindsight benchmark needs alpha (table schedules: set top-level alpha)")
    echo = {
        "predictor": {
            "minwidth": pcfg.minwidth,
            "mu": pcfg.mu,
            "T": T,
            "schedule": _schedule_echo(schedule),
        },
        "sequence": seq_echo,
        "alpha": float(alpha),
        "seed": seed,
    }
    return ResolvedRun(pcfg=pcfg, values=values, alpha=float(alpha), seed=seed, echo=echo)


def _metric_row(m: Metrics) -> tuple:
    return tuple(getattr(m, c) for c in _METRIC_COLUMNS)


def _load_config(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"config {path} is not valid JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    def need(*names: str) -> None:
        missing = [n for n in names if getattr(args, n) is None]
        if missing:
            flags = ", ".join("--" + m.replace("_", "-") for m in missing)
            raise ValueError(f"generate {args.family} needs {flags}")

    if args.family == "phased":
        need("alpha", "T", "K", "eps", "i")
        variant = PhasedSpec(alpha=args.alpha, T=args.T, K=args.K, eps=args.eps, i=args.i)
    elif args.family == "dk-iid":
        need("alpha", "eps", "K", "T")
        variant = DkIidSpec(DkParams(args.alpha, args.eps, args.K), args.T)
    elif args.family == "dk-const":
        need("alpha", "eps", "K", "T", "switch_day")
        variant = DkThenConstantSpec(DkParams(args.alpha, args.eps, args.K), args.T, args.switch_day)
    else:
        need("multiset")
        values, _ = read_sequence(args.multiset)
        variant = PermutationSpec(tuple(sorted(float(v) for v in values)))
    spec = SequenceSpec(variant, seed=args.seed, symmetric=args.symmetric)
    out = generate(spec)
    write_sequence(args.out, out, spec)
    print(f"wrote {args.out}: {len(out)} values, variant {type(variant).__name__}")
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config) if args.config else {}
    pred = dict(cfg.get("predictor", {}))
    sched = dict(pred.get("schedule", {}))
    if args.minwidth is not None:
        pred["minwidth"] = args.minwidth
    if args.mu is not None:
        pred["mu"] = args.mu
    if args.T is not None:
        pred["T"] = args.T
    if args.schedule is not None:
        sched["kind"] = args.schedule
    if args.alpha is not None:
        sched["alpha"] = args.alpha
    if args.C is not None:
        sched["C"] = args.C
    if args.rates is not None:
        sched["rates"] = [float(r) for r in args.rates.split(",")]
    if sched:
        pred["schedule"] = sched
    cfg["predictor"] = pred
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    out = args.out if args.out is not None else cfg.get("out")

    r = _resolve(cfg, seed, sequence_path=args.sequence, symmetric=args.symmetric)
    trace = run(r.pcfg, r.values)
    metrics = compute_metrics(trace, r.values, r.alpha, r.pcfg)
    if out:
        _write_csv(
            f"{out}_trace.csv",
            r.echo,
            _TRACE_COLUMNS,
            zip(
                range(1, r.pcfg.T + 1),
                trace.played_lo,
                trace.played_hi,
                trace.observed,
                trace.covered,
                trace.reset,
            ),
        )
        _write_csv(f"{out}_metrics.csv", r.echo, ("seed",) + _METRIC_COLUMNS, [(seed,) + _metric_row(metrics)])
    print(
        f"T={r.pcfg.T} coverage={metrics.coverage:.4f} mistakes={metrics.mistakes} "
        f"avg_volume={metrics.avg_volume:.6g} max_volume={metrics.max_volume:.6g} "
        f"opt_volume={metrics.opt_volume:.6g} resets={metrics.resets}"
    )
    if args.assert_bounds:
        return _assert_bounds(trace, r)
    return 0


def _assert_bounds(trace: RunTrace, r: ResolvedRun) -> int:
    """Deterministic worst-case checks; 3 on any violation."""
    failures: list[str] = []
    cap = volume_cap_check(trace, r.values, r.pcfg)
    if not cap.ok:
        failures.append(
            f"volume cap violated: max played volume {cap.max_played_volume!r} > cap {cap.cap!r} "
            f"(always-feasible misses {cap.always_feasible_misses})"
        )
    if isinstance(r.pcfg.schedule, ArbitraryOrderSchedule) and r.pcfg.mu > 3.0:
        audit = phase_audit(trace, r.pcfg)
        if not audit.growth_ok:
            failures.append("reset growth violated: consecutive late resets grew by < (mu-1)/2")
        if not audit.reset_count_ok:
            failures.append(
                f"late reset count exceeds bound {audit.reset_count_bound} "
                f"(epoch start day {audit.epoch_start})"
            )
        if not mistake_bound_check(trace, r.pcfg, r.alpha):
            failures.append(f"mistake count {trace.mistakes} exceeds the explicit bound")
    for f in failures:
        print(f"assert-bounds: {f}", file=sys.stderr)
    return 3 if failures else 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    base = _get(cfg, "base", "sweep config")
    grid: dict = cfg.get("grid", {})
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("sweep grid is empty")
    trials = args.trials if args.trials is not None else int(cfg.get("trials", 1))
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    out = args.out if args.out is not None else cfg.get("out")
    keys = list(grid)
    cells = list(itertools.product(*(grid[k] for k in keys)))
    columns = ("cell", "trial", *keys, "seed", *_METRIC_COLUMNS)
    rows: list[tuple] = []
    for ci, cell in enumerate(cells):
        d = copy.deepcopy(base)
        for k, v in zip(keys, cell):
            _set_dotted(d, k, v)
        block = np.empty((trials, len(_METRIC_COLUMNS)))
        for trial in range(trials):
            s = derive_seed(seed, ci, trial)
            r = _resolve(d, s)
            metrics = compute_metrics(run(r.pcfg, r.values), r.values, r.alpha, r.pcfg)
            row = _metric_row(metrics)
            block[trial] = row
            rows.append((ci, trial, *cell, s, *row))
        rows.append((ci, "mean", *cell, "", *(float(x) for x in block.mean(axis=0))))
        rows.append((ci, "std", *cell, "", *(float(x) for x in block.std(axis=0))))
    echo = {"base": base, "grid": grid, "trials": trials, "seed": seed}
    if out:
        _write_csv(f"{out}_sweep.csv", echo, columns, rows)
        print(f"wrote {out}_sweep.csv: {len(cells)} cells x {trials} trials")
    else:
        print(",".join(columns))
        for row in rows:
            print(",".join(_fmt(v) for v in row))
    return 0


def _set_dotted(d: dict, dotted: str, value) -> None:
    node = d
    parts = dotted.split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value


def cmd_uc_check(args) -> int:
    values, _ = read_sequence(args.multiset)
    T = len(values)
    lens = [int(x) for x in args.prefix_lens.split(",")]
    reports = uc_profile(values, T, lens, args.trials, args.C, args.seed)
    echo = {
        "multiset_sha256": _values_digest(values),
        "T": T,
        "prefix_lens": lens,
        "trials": args.trials,
        "C": args.C,
        "seed": args.seed,
    }
    columns = ("prefix_len", "max_deviation", "bound", "within")
    rows = [(rep.prefix_len, rep.max_deviation, rep.bound, rep.within) for rep in reports]
    if args.out:
        _write_csv(f"{args.out}_uc.csv", echo, columns, rows)
        print(f"wrote {args.out}_uc.csv")
    for rep in reports:
        flag = "ok" if rep.within else "EXCEEDED"
        print(
            f"t={rep.prefix_len} q95 deviation={rep.max_deviation:.6g} "
            f"bound={rep.bound:.6g} {flag}"
        )
    if args.assert_bounds and not all(rep.within for rep in reports):
        return 3
    return 0


def cmd_opt(args) -> int:
    values, _ = read_sequence(args.sequence)
    vol, witness = opt_volume(values, args.alpha)
    print(
        f"n={len(values)} alpha={_fmt(args.alpha)} volume={_fmt(vol)} "
        f"witness=[{_fmt(witness.lo)}, {_fmt(witness.hi)}]"
    )
    return 0


def cmd_report(args) -> int:
    wrote: list[str] = []
    if args.trace:
        _, cols, rows = _read_csv(args.trace)
        if cols != list(_TRACE_COLUMNS):
            raise ValueError(f"{args.trace} is not a trace CSV (columns {cols})")
        data = np.array(rows, dtype=float)
        wrote.append(
            render_trace(
                figure_path(args.out_dir, Path(args.trace).stem),
                data[:, 0],
                data[:, 1],
                data[:, 2],
                data[:, 3],
                data[:, 4],
                data[:, 5],
            )
        )
    if args.sweep:
        wrote.append(_render_sweep_csv(args.sweep, args.out_dir))
    if args.uc:
        _, cols, rows = _read_csv(args.uc)
        if cols[:3] != ["prefix_len", "max_deviation", "bound"]:
            raise ValueError(f"{args.uc} is not a uc-check CSV (columns {cols})")
        reports = [
            UcReport(int(row[0]), float(row[1]), float(row[2]), row[3] == "1") for row in rows
        ]
        wrote.append(render_uc_profile(figure_path(args.out_dir, Path(args.uc).stem), reports))
    if not wrote:
        raise ValueError("report needs at least one of --trace, --sweep, --uc")
    for path in wrote:
        print(f"wrote {path}")
    return 0


def _render_sweep_csv(path: str, out_dir: str) -> str:
    _, cols, rows = _read_csv(path)
    if cols[:2] != ["cell", "trial"] or "seed" not in cols:
        raise ValueError(f"{path} is not a sweep CSV (columns {cols})")
    seed_at = cols.index("seed")
    grid_keys = cols[2:seed_at]
    cov_at = cols.index("coverage")
    vol_at = cols.index("avg_volume")
    means = {row[0]: row for row in rows if row[1] == "mean"}
    stds = {row[0]: row for row in rows if row[1] == "std"}
    labels, cm, cs, vm, vs = [], [], [], [], []
    for cell, row in means.items():
        srow = stds.get(cell)
        labels.append(",".join(f"{k.split('.')[-1]}={v}" for k, v in zip(grid_keys, row[2:seed_at])))
        cm.append(float(row[cov_at]))
        vm.append(float(row[vol_at]))
        cs.append(float(srow[cov_at]) if srow else 0.0)
        vs.append(float(srow[vol_at]) if srow else 0.0)
    return render_sweep(
        figure_path(out_dir, Path(path).stem),
        labels,
        np.array(cm),
        np.array(cs),
        np.array(vm),
        np.array(vs),
    )


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tightband",
        description="Volume-efficient online interval prediction over [0, 1].",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded sequence file")
    g.add_argument("family", choices=["phased", "dk-iid", "dk-const", "permutation"])
    g.add_argument("--alpha", type=float)
    g.add_argument("--T", type=int)
    g.add_argument("--K", type=int)
    g.add_argument("--eps", type=float)
    g.add_argument("--i", type=int, help="ladder height actually climbed (phased)")
    g.add_argument("--switch-day", type=int, dest="switch_day")
    g.add_argument("--multiset", help="sequence file holding the multiset (permutation)")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--symmetric", action="store_true", help="recenter the sequence around 1/2")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("simulate", help="run the predictor over one sequence")
    s.add_argument("--config", help="JSON experiment config")
    s.add_argument("--sequence", help="sequence file (overrides the config's sequence entry)")
    s.add_argument("--minwidth", type=float)
    s.add_argument("--mu", type=float)
    s.add_argument("--T", type=int)
    s.add_argument("--schedule", choices=["arbitrary", "exchangeable", "table"])
    s.add_argument("--alpha", type=float)
    s.add_argument("--C", type=float)
    s.add_argument("--rates", help="comma-separated per-day rates (table schedule)")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", help="output prefix: writes PREFIX_trace.csv and PREFIX_metrics.csv")
    s.add_argument("--assert-bounds", action="store_true", dest="assert_bounds")
    s.add_argument("--symmetric", action="store_true")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="cartesian grid of simulate runs")
    w.add_argument("--config", required=True, help="JSON with base, grid, trials, seed, out")
    w.add_argument("--trials", type=int)
    w.add_argument("--seed", type=int)
    w.add_argument("--out", help="output prefix: writes PREFIX_sweep.csv")
    w.set_defaults(func=cmd_sweep)

    u = sub.add_parser("uc-check", help="interval deviation profile over permutations")
    u.add_argument("--multiset", required=True, help="sequence file holding the multiset")
    u.add_argument("--prefix-lens", required=True, dest="prefix_lens", help="e.g. 100,1000,5000")
    u.add_argument("--trials", type=int, default=100)
    u.add_argument("--C", type=float, default=1.0)
    u.add_argument("--seed", type=int, default=0)
    u.add_argument("--out", help="output prefix: writes PREFIX_uc.csv")
    u.add_argument("--assert-bounds", action="store_true", dest="assert_bounds")
    u.set_defaults(func=cmd_uc_check)

    o = sub.add_parser("opt", help="hindsight optimum for a sequence file")
    o.add_argument("--sequence", required=True)
    o.add_argument("--alpha", type=float, required=True)
    o.set_defaults(func=cmd_opt)

    r = sub.add_parser("report", help="render figures from CSV outputs")
    r.add_argument("--trace", help="trace CSV from simulate")
    r.add_argument("--sweep", help="sweep CSV")
    r.add_argument("--uc", help="uc-check CSV")
    r.add_argument("--out-dir", default=".", dest="out_dir")
    r.set_defaults(func=cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
