"""Command-line entry point: ``ampmask {region,binary,memdef,gaussian,check}``.

Exit codes: 0 success, 2 validation failure, 3 precondition failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np

from . import binary, gaussian, memdef
from .channel import check_degraded, load_channel, save_channel
from .errors import PreconditionError, UsageError, ValidationError
from .info import Frontier
from .regions import Bound, CdResult, SearchConfig, sweep_region

EXIT_OK, EXIT_VALIDATION, EXIT_PRECONDITION = 0, 2, 3
DMC_HEADER = ["bound", "kind", "u_card", "r_a_bits", "r_l_bits", "r_u_bits", "feasible"]
MODEL_HEADER = ["model", "region", "kind", "r_a_bits", "r_l_bits", "param"]


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _num(x: float) -> str:
    # 12 significant digits keeps rows re-evaluable to 1e-9 for rates above 1 bit
    return f"{x:.12g}"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _param_text(policy) -> str:
    # full precision so rows can be re-evaluated exactly
    if isinstance(policy, tuple):
        return ";".join(repr(float(v)) for v in policy)
    if isinstance(policy, float):
        return repr(policy)
    return ""


def _policy_json(policy):
    if isinstance(policy, np.ndarray):
        return policy.tolist()
    if isinstance(policy, tuple):
        return list(policy)
    return policy


def _point_records(frontiers: dict[str, Frontier]) -> list[dict]:
    out = []
    for name, f in frontiers.items():
        for p in f:
            out.append({
                "region": name, "kind": f.kind, "u_card": p.u_card,
                "r_a_bits": p.r_a, "r_l_bits": p.r_l, "r_u_bits": p.r_u,
                "policy": _policy_json(p.policy),
            })
    return out


class Output:
    """Collects result files and the run manifest for one invocation."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.start = time.perf_counter()
        self.counts: dict[str, int] = {}
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def finish(self, config: dict) -> None:
        out = self.args.out
        if out is None:
            for text in self.files.values():
                sys.stdout.write(text)
            return
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        for name, text in self.files.items():
            (d / name).write_text(text)
        manifest = {
            "command": self.argv,
            "seed": getattr(self.args, "seed", None),
            "config": config,
            "version": _version(),
            "point_counts": self.counts,
            "files": sorted(self.files),
        }
        (d / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        # wall-clock data lives apart so the manifest stays byte-reproducible
        timing = {
            "started_utc": datetime.now(timezone.utc).isoformat(),
            "duration_s": time.perf_counter() - self.start,
        }
        (d / "timing.json").write_text(json.dumps(timing, indent=2) + "\n")


def _gnuplot(csv_name: str, column: int, values: list, col_ra: int, col_rl: int) -> str:
    """Script plotting one series per distinct value of a CSV column."""
    lines = [
        "set datafile separator ','",
        "set xlabel 'R_l (bits)'",
        "set ylabel 'R_a (bits)'",
        "set key bottom right",
    ]
    plots = [
        f"'{csv_name}' using (strcol({column}) eq '{v}' ? ${col_rl} : 1/0):{col_ra} "
        f"every ::1 with linespoints title '{v}'"
        for v in values
    ]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def _model_rows(model: str, frontiers: dict[str, Frontier]):
    return [
        [model, name, f.kind, _num(p.r_a), _num(p.r_l), _param_text(p.policy)]
        for name, f in frontiers.items()
        for p in f
    ]


def _emit_model(out: Output, model: str, frontiers: dict[str, Frontier]) -> None:
    for name, f in frontiers.items():
        out.counts[name] = len(f)
    if out.args.format == "json":
        out.add(f"{model}.json", json.dumps(_point_records(frontiers), indent=1) + "\n")
    else:
        out.add(f"{model}.csv", _csv_text(MODEL_HEADER, _model_rows(model, frontiers)))
        if out.args.gnuplot:
            out.add(f"{model}.gp", _gnuplot(f"{model}.csv", 2, list(frontiers), 4, 5))


def _print_cd(result) -> None:
    d = {"c_d": result.c_d, "method": result.method}
    print(json.dumps(d))


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _search_config(args) -> SearchConfig:
    return SearchConfig(
        u_cardinalities=tuple(args.u_card),
        grid_resolution=args.grid,
        random_samples=args.samples,
        seed=args.seed,
        refine_iters=args.refine,
        apply_hull=args.hull,
    )


def cmd_region(args, out: Output) -> int:
    ch = load_channel(args.spec)
    bound = Bound.parse(args.bound)
    cfg = _search_config(args)
    frontiers = {}
    for u in cfg.u_cardinalities:
        sub = SearchConfig(
            u_cardinalities=(u,), grid_resolution=cfg.grid_resolution,
            random_samples=cfg.random_samples, seed=cfg.seed,
            refine_iters=cfg.refine_iters, apply_hull=cfg.apply_hull,
        )
        frontiers[f"{bound.value}_u{u}"] = sweep_region(ch, bound, sub)
    if all(len(f) == 0 for f in frontiers.values()):
        print(f"warning: {bound.value} has an empty feasible set", file=sys.stderr)
    for name, f in frontiers.items():
        out.counts[name] = len(f)
    if args.format == "json":
        out.add("points.json", json.dumps(_point_records(frontiers), indent=1) + "\n")
    else:
        rows = [
            [bound.value, f.kind, p.u_card, _num(p.r_a), _num(p.r_l), _num(p.r_u), "true"]
            for f in frontiers.values()
            for p in f
        ]
        out.add("points.csv", _csv_text(DMC_HEADER, rows))
        if args.gnuplot:
            out.add("points.gp", _gnuplot("points.csv", 3, list(cfg.u_cardinalities), 4, 5))
    out.finish({
        "spec": str(args.spec), "bound": bound.value,
        "u_card": list(cfg.u_cardinalities), "grid": cfg.grid_resolution,
        "samples": cfg.random_samples, "refine": cfg.refine_iters, "hull": cfg.apply_hull,
    })
    return EXIT_OK


def cmd_binary(args, out: Output) -> int:
    bp = binary.BinaryParams(args.ps, args.pn, args.pnz)
    ch = binary.build_binary_channel(bp)
    if args.emit_spec:
        save_channel(ch, args.emit_spec)
    if args.cd:
        _print_cd(binary.binary_cd(bp))
        if args.out is None:
            return EXIT_OK
    frontiers = {"sc": binary.sc_region(bp, args.grid)}
    # |U| = 1 corners dominate every larger |U| for both converses
    cfg = SearchConfig(u_cardinalities=(1,), grid_resolution=args.grid,
                       random_samples=args.samples, seed=args.seed, refine_iters=0,
                       apply_hull=args.hull)
    outer_bound = Bound.ROUT2 if check_degraded(ch, "forward").degraded else Bound.ROUT1
    frontiers["outer"] = sweep_region(ch, outer_bound, cfg)
    _emit_model(out, "binary", frontiers)
    out.finish({"ps": args.ps, "pn": args.pn, "pnz": args.pnz, "grid": args.grid,
                "outer_bound": outer_bound.value})
    return EXIT_OK


def cmd_memdef(args, out: Output) -> int:
    mp = memdef.MemdefParams(args.p, args.q, args.r, args.n)
    if args.emit_spec:
        save_channel(memdef.build_memdef_channel(mp), args.emit_spec)
    frontiers = memdef.memdef_regions(args.p, args.q, args.r, args.n, grid=args.grid,
                                      general=args.general, hull=args.hull)
    if args.cd:
        best = max(frontiers["uncoded"].max_difference(), frontiers["coded"].max_difference())
        _print_cd(CdResult(best, None, "sweep"))
        if args.out is None:
            return EXIT_OK
    _emit_model(out, "memdef", frontiers)
    out.finish({"p": args.p, "q": args.q, "r": args.r, "n": args.n, "grid": args.grid,
                "general": args.general})
    return EXIT_OK


def cmd_gaussian(args, out: Output) -> int:
    gp = gaussian.GaussianParams(args.ss2, args.sn2, args.snz2, args.power)
    if args.cd:
        _print_cd(gaussian.cd_gaussian(gp))
        if args.out is None and args.cd_curve is None:
            return EXIT_OK
    if args.cd_curve is not None:
        lo, hi, steps = args.cd_curve
        rows = gaussian.cd_curve(args.ss2, args.sn2, args.snz2, np.linspace(lo, hi, int(steps)))
        out.add("cd_curve.csv", _csv_text(
            ["sigma_s2", "power_db", "power", "c_d_bits"],
            [[_num(args.ss2), _num(db), _num(p), _num(c)] for db, p, c in rows]))
        out.counts["cd_curve"] = len(rows)
    frontiers = {
        "uncoded": gaussian.uncoded_region(gp, args.grid, hull=args.hull),
        "outer": gaussian.outer_region(gp, args.grid, hull=args.hull),
    }
    _emit_model(out, "gaussian", frontiers)
    out.finish({"ss2": args.ss2, "sn2": args.sn2, "snz2": args.snz2, "power": args.power,
                "grid": args.grid})
    return EXIT_OK


def cmd_check(args, out: Output) -> int:
    ch = load_channel(args.spec)
    print(json.dumps(check_degraded(ch, "both").to_dict()))
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _triple(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected DB_MIN,DB_MAX,STEPS")
    return float(parts[0]), float(parts[1]), float(parts[2])


def _common(p: argparse.ArgumentParser, grid: int) -> None:
    p.add_argument("--out", metavar="DIR", default=None,
                   help="write result files and manifest here (default: print to stdout)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--grid", type=int, default=grid)
    p.add_argument("--samples", type=int, default=200, help="random Dirichlet policies per |U|")
    p.add_argument("--hull", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--gnuplot", action="store_true", help="also emit a gnuplot script")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ampmask", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("region", help="sweep a bound on a channel spec file")
    p.add_argument("spec", help="channel JSON file")
    p.add_argument("--bound", required=True, choices=[b.value.lower() for b in Bound])
    p.add_argument("--u-card", type=_int_list, default=[1, 2], metavar="LIST")
    p.add_argument("--refine", type=int, default=20, help="local refinement rounds")
    _common(p, grid=6)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("binary", help="modulo-additive binary model")
    p.add_argument("--ps", type=float, required=True)
    p.add_argument("--pn", type=float, required=True)
    p.add_argument("--pnz", type=float, required=True)
    p.add_argument("--cd", action="store_true", help="print C_d as JSON")
    p.add_argument("--emit-spec", metavar="PATH", help="also write the channel JSON")
    _common(p, grid=101)
    p.set_defaults(func=cmd_binary)

    p = sub.add_parser("memdef", help="memory with defective cells")
    for name in ("p", "q", "r", "n"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--general", action="store_true", help="sweep p(x|s) per state")
    p.add_argument("--cd", action="store_true", help="print the best swept R_a - R_l as JSON")
    p.add_argument("--emit-spec", metavar="PATH", help="also write the channel JSON")
    _common(p, grid=101)
    p.set_defaults(func=cmd_memdef)

    p = sub.add_parser("gaussian", help="Gaussian model, closed forms")
    p.add_argument("--ss2", type=float, required=True, help="state variance")
    p.add_argument("--sn2", type=float, required=True, help="Bob noise variance")
    p.add_argument("--snz2", type=float, required=True, help="Eve noise variance")
    p.add_argument("--power", type=float, required=True, help="input power budget P")
    p.add_argument("--cd", action="store_true", help="print C_d as JSON")
    p.add_argument("--cd-curve", type=_triple, metavar="DB_MIN,DB_MAX,STEPS",
                   help="write C_d versus power (dB) to cd_curve.csv")
    _common(p, grid=101)
    p.set_defaults(func=cmd_gaussian)

    p = sub.add_parser("check", help="report (reverse) degradedness of a channel spec")
    p.add_argument("spec")
    p.set_defaults(func=cmd_check, out=None)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Output(args, argv)
    try:
        return args.func(args, out)
    except (ValidationError, UsageError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except PreconditionError as e:
        print(f"precondition failed: {e}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
