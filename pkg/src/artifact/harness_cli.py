"""Command-line entry point: ``artifact <command> [options]``.

Commands: scatter, theta, val, trop, check, render.  Seeds come from a JSON
file ``{"P": ..., "Qbullet": ..., "D": ...}`` or a fixture name (a2,
kronecker, three-wall, torus, kronecker-extension).  Exit codes: 0 success,
1 a check failed, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import seed_data as sd
from .broken_lines import enumerate_broken_lines, line_trace_json
from .lattice_core import DEFAULT_EPS1, DEFAULT_EPS2, GenericityError, PerturbedPoint
from .scattering import ChamberError
from .series_ring import Specialization
from .tropical import rational_rays, tropicalize, val_theta, valuation_table_csv
from .verify_harness import (
    CheckReport,
    Side,
    adjunction_check,
    box_points,
    extension_check,
    newton_monic_check,
    random_vit_suite,
    reciprocity_check,
    render_svg,
    side_setup,
    specialization_independence_check,
    stable_theta,
    tautness_check,
)

FIXTURES = {
    "a2": sd.a2_seed,
    "kronecker": sd.kronecker_seed,
    "three-wall": sd.three_wall_seed,
    "torus": sd.torus_seed,
    "kronecker-extension": sd.kronecker_extension_seed,
}

CHECKS = ("vit", "reciprocity", "extension", "newton", "specialize", "adjunction", "tautness")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    seed_file: str
    order: int = 6
    box: tuple = (-3, 3)
    rays: int = 24
    out: str | None = None
    chamber: str = "+"
    eps: tuple = (DEFAULT_EPS1, DEFAULT_EPS2)
    margin: int = 4
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.order < 2:
            raise UsageError("--order must be at least 2")
        if self.box[0] > self.box[1]:
            raise UsageError(f"empty box {self.box}")

    def seed(self) -> sd.SeedDatum:
        if os.path.exists(self.seed_file):
            return sd.load_seed(self.seed_file)
        if self.seed_file in FIXTURES:
            return FIXTURES[self.seed_file]()
        raise UsageError(f"no seed file or fixture named {self.seed_file!r}")

    def side(self, seed=None) -> Side:
        s = seed or self.seed()
        chamber = -1 if self.chamber == "-" else 1
        return Side(s, self.order + self.margin, self.order, chamber, None, self.eps)


def parse_vec(text: str) -> tuple:
    try:
        return tuple(Fraction(x) if "/" in x else int(x) for x in text.replace(" ", "").split(","))
    except ValueError:
        raise UsageError(f"cannot read vector {text!r}")


def parse_box(text: str) -> tuple:
    if ":" in text:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    b = int(text)
    return -b, b


def parse_perturb(text: str) -> tuple:
    parts = text.split(";")
    if len(parts) != 2:
        raise UsageError("--perturb takes 'a,b;c,d'")
    e1, e2 = parse_vec(parts[0]), parse_vec(parts[1])
    if len(e1) != 2 or len(e2) != 2:
        raise UsageError("perturbation vectors must have two entries")
    return e1, e2


def _emit(cfg: RunConfig, suffix: str, text: str) -> None:
    if cfg.out:
        path = cfg.out + suffix
        with open(path, "w") as fh:
            fh.write(text)
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)


def _basepoint(cfg: RunConfig, side: Side):
    """Diagram and basepoint; ``--chamber`` also accepts a point ``x,y``."""
    if cfg.chamber in ("+", "-"):
        return side_setup(side)
    d, _ = side_setup(Side(side.seed, side.order, side.cert, 1, None, side.eps))
    return d, PerturbedPoint(parse_vec(cfg.chamber), *cfg.eps)


# --- commands -------------------------------------------------------------------------


def cmd_scatter(cfg: RunConfig) -> int:
    s = cfg.seed()
    d = sd.seed_diagram(s, cfg.order)
    _emit(cfg, ".json", json.dumps(d.to_json(), indent=2, sort_keys=True) + "\n")
    if cfg.out:
        _emit(cfg, ".svg", render_svg(d, shade=1 if sd.has_positive_chamber(s) else None))
    return 0


def cmd_theta(cfg: RunConfig) -> int:
    side = cfg.side()
    d, p = _basepoint(cfg, side)
    u = parse_vec(cfg.options["u"])
    th = stable_theta(d, u, p, cfg.order)
    stabilized = th is not None
    lines = enumerate_broken_lines(d, u, p) if th is None else th.lines
    acc: dict = {}
    for bl in lines:
        if bl.final.degree < cfg.order:
            acc[bl.final.key] = acc.get(bl.final.key, 0) + bl.coefficient
    series = [{"m": list(k[:2]), "q": list(k[2:]), "c": c if isinstance(c, int) else str(c)}
              for k, c in sorted(acc.items(), key=lambda kc: (kc[0][2:], kc[0][:2]))]
    out = {"index": list(u), "order": cfg.order, "diagram_order": d.order, "basepoint": p.to_json(),
           "stabilized": stabilized, "series": series}
    _emit(cfg, ".json", json.dumps(out, indent=2, sort_keys=True) + "\n")
    if cfg.out:
        _emit(cfg, ".lines.json", json.dumps(line_trace_json(lines), indent=1, sort_keys=True) + "\n")
    return 0


def cmd_val(cfg: RunConfig) -> int:
    side = cfg.side()
    d, p = _basepoint(cfg, side)
    u = parse_vec(cfg.options["u"])
    if cfg.options.get("v"):
        vs = [parse_vec(cfg.options["v"])]
    else:
        vs = box_points(cfg.box)
    lines = enumerate_broken_lines(d, u, p)
    rows = [(u, v, val_theta(d, u, v, p, cfg.order, lines)) for v in vs]
    _emit(cfg, ".csv", valuation_table_csv(rows))
    return 0


def cmd_trop(cfg: RunConfig) -> int:
    side = cfg.side()
    d, p = _basepoint(cfg, side)
    u = parse_vec(cfg.options["u"])
    samples = tropicalize(d, u, rational_rays(cfg.rays), p, cfg.order)
    rows = [(u, tuple(x * s for x in smp.ray), r) for smp in samples for s, r in smp.values]
    _emit(cfg, ".csv", valuation_table_csv(rows))
    return 0


def cmd_render(cfg: RunConfig) -> int:
    side = cfg.side()
    d, p = _basepoint(cfg, side)
    lines = []
    if cfg.options.get("u"):
        lines = enumerate_broken_lines(d, parse_vec(cfg.options["u"]), p)
    b = max(abs(cfg.box[0]), abs(cfg.box[1])) + 2
    shade = {"+": 1, "-": -1}.get(cfg.chamber) if cfg.options.get("shade") else None
    _emit(cfg, ".svg", render_svg(d, lines, (-b, b, -b, b), shade))
    return 0


def run_check(cfg: RunConfig, which: str) -> CheckReport:
    s = cfg.seed()
    k, margin, eps = cfg.order, cfg.margin, cfg.eps
    box = cfg.box
    if which == "vit":
        return random_vit_suite(s, cfg.options.get("combos", 50), cfg.rays, k, margin, eps=eps)
    if which == "reciprocity":
        return reciprocity_check(s, box, k, cfg.options.get("variant", "chiral"), margin,
                                 workers=cfg.options.get("workers", 1), eps=eps)
    if which == "tautness":
        return tautness_check(cfg.side(s), box_points(box), rational_rays(cfg.rays))
    if which == "extension":
        s2 = sd.load_seed(cfg.options["extension"]) if cfg.options.get("extension") \
            else sd.kronecker_extension_seed()
        idx = box_points(box)
        return extension_check(s, s2, idx, None, k, margin)
    if which in ("newton", "specialize"):
        d, p = side_setup(cfg.side(s))
        thetas = [t for t in (stable_theta(d, u, p, k) for u in box_points(box)) if t is not None]
        if which == "newton":
            rep = CheckReport("newton", {"order": k, "thetas": len(thetas)})
            for th in thetas:
                newton_monic_check(th, rep)
            return rep
        return specialization_independence_check(thetas, Specialization.unit(s.r), rational_rays(cfg.rays))
    if which == "adjunction":
        A = json.loads(cfg.options["matrix"]) if cfg.options.get("matrix") else [[1, 0], [0, 1]]
        t = sd.load_seed(cfg.options["target"]) if cfg.options.get("target") else s
        phi = sd.check_linear_morphism(A, s, t)
        pts = box_points(box)
        return adjunction_check(phi, pts, pts, k, margin, eps=eps)
    raise UsageError(f"unknown check {which!r}")


def cmd_check(cfg: RunConfig) -> int:
    rep = run_check(cfg, cfg.options["which"])
    print(rep.summary())
    if cfg.out:
        _emit(cfg, ".report.json", rep.dumps() + "\n")
    return 0 if rep.ok else 1


COMMANDS = {"scatter": cmd_scatter, "theta": cmd_theta, "val": cmd_val, "trop": cmd_trop,
            "check": cmd_check, "render": cmd_render}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", required=True, help="seed JSON file or fixture name")
    common.add_argument("--order", type=int, default=6, help="truncation order k (default 6)")
    common.add_argument("--box", default="3", help="lattice box: 'b' for [-b,b] or 'lo:hi'")
    common.add_argument("--rays", type=int, default=24, help="number of sampled covector rays")
    common.add_argument("--out", help="output path prefix (default: stdout)")
    common.add_argument("--chamber", default="+", help="'+', '-' or a basepoint 'x,y'")
    common.add_argument("--perturb", help="perturbation vectors 'a,b;c,d' (default '1,7;3,1')")
    common.add_argument("--margin", type=int, default=4,
                        help="extra orders used to certify values at --order (default 4)")

    parser = argparse.ArgumentParser(prog="artifact",
                                     description="Scattering diagrams, theta functions and checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("scatter", parents=[common], help="complete a seed's scattering diagram")
    p = sub.add_parser("theta", parents=[common], help="theta function as a series")
    p.add_argument("--u", required=True, help="index m as 'a,b'")
    p = sub.add_parser("val", parents=[common], help="valuations of a theta function")
    p.add_argument("--u", required=True)
    p.add_argument("--v", help="one covector 'a,b' (default: every point of --box)")
    p = sub.add_parser("trop", parents=[common], help="tropicalization sampled on rays")
    p.add_argument("--u", required=True)
    p = sub.add_parser("render", parents=[common], help="SVG of the diagram")
    p.add_argument("--u", help="also draw the broken lines for this index")
    p.add_argument("--shade", action="store_true", help="fill the chosen chamber")
    p = sub.add_parser("check", parents=[common], help="run a verification suite")
    p.add_argument("which", choices=CHECKS)
    p.add_argument("--variant", default="chiral", choices=("chiral", "chiral_langlands", "langlands"))
    p.add_argument("--combos", type=int, default=50)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--extension", help="seed file of the extension (extension check)")
    p.add_argument("--target", help="target seed file (adjunction check)")
    p.add_argument("--matrix", help="morphism matrix as JSON (adjunction check)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    known = {"command", "seed", "order", "box", "rays", "out", "chamber", "perturb", "margin"}
    options = {k: v for k, v in vars(args).items() if k not in known}
    try:
        eps = parse_perturb(args.perturb) if args.perturb else (DEFAULT_EPS1, DEFAULT_EPS2)
        cfg = RunConfig(args.seed, args.order, parse_box(args.box), args.rays, args.out,
                        args.chamber, eps, args.margin, options)
        return COMMANDS[args.command](cfg)
    except (UsageError, sd.SeedValidationError, sd.MorphismError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GenericityError as exc:
        print(f"error: {exc}\nhint: retry with a different --perturb (e.g. '2,9;5,1')", file=sys.stderr)
        return 2
    except ChamberError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
