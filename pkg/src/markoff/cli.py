"""Command-line front end: ``markoff <subcommand> [options]``.

Complex numbers are written ``re,im`` (``3`` alone means ``3,0``).  A JSON
file given with ``--config`` supplies the same keys as the long options
(dashes replaced by underscores) and overrides them.

Exit codes: 0 success / Satisfied, 2 Violated, 3 Inconclusive or not
converged, 64 bad configuration, 65 non-hyperbolic monodromy.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

EXIT_OK, EXIT_VIOLATED, EXIT_INCONCLUSIVE = 0, 2, 3
EXIT_CONFIG, EXIT_NOT_HYPERBOLIC = 64, 65


class ConfigError(ValueError):
    pass


def parse_complex(text) -> complex:
    if isinstance(text, (int, float, complex)):
        return complex(text)
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return complex(float(text[0]), float(text[1]))
    parts = str(text).split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ConfigError(f"cannot read {text!r} as re,im")


def _pair(z: complex) -> list[float]:
    return [z.real, z.imag]


# -- configuration ---------------------------------------------------------------


def _apply_config(args: argparse.Namespace) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    try:
        data = json.loads(Path(args.config).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    for key, value in data.items():
        key = key.replace("-", "_")
        if not hasattr(args, key):
            raise ConfigError(f"unknown config key {key!r}")
        setattr(args, key, value)
    return args


def _validate(args: argparse.Namespace) -> None:
    if getattr(args, "tol", 1.0) is not None and not float(args.tol) > 0:
        raise ConfigError("tolerance must be positive")
    if getattr(args, "budget", 1) is not None and int(args.budget) < 1:
        raise ConfigError("budget must be at least 1")
    if hasattr(args, "monodromy") and args.command in ("bundle-sum", "longitude") and not args.monodromy:
        raise ConfigError("a nonempty monodromy word is required")


def _seed(args, required: bool = True):
    """(x, y, z) from --triple, or from --x, --y, --mu with the chosen root."""
    from .markoff_engine import third_root

    if getattr(args, "triple", None):
        vals = args.triple
        if isinstance(vals, str):
            vals = vals.split()
        if len(vals) != 3:
            raise ConfigError("--triple takes three values")
        return tuple(parse_complex(v) for v in vals)
    x, y, mu = getattr(args, "x", None), getattr(args, "y", None), getattr(args, "mu", None)
    if x is not None and y is not None and mu is not None:
        x, y, mu = parse_complex(x), parse_complex(y), parse_complex(mu)
        small, big = third_root(x, y, mu)
        return x, y, (big if getattr(args, "root", "small") == "big" else small)
    if required:
        raise ConfigError("give --triple X Y Z or --x, --y and --mu")
    return None


def _map(args):
    from .markoff_engine import MarkoffMap, load_cached

    seed = _seed(args)
    if not args.no_cache:
        m = load_cached(seed, int(args.budget))
        if m is not None:
            return m
    return MarkoffMap(*seed)


def _store(args, m) -> None:
    from .markoff_engine import store_cached

    if args.no_cache:
        return
    try:
        store_cached(m, int(args.budget))
    except OSError:
        pass  # an unwritable cache is not an error


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _meta(args) -> dict:
    return {"threads_requested": args.threads, "threads_used": 1}


# -- subcommands -------------------------------------------------------------------


def cmd_check_bq(args) -> int:
    from .bq_analyzer import check_bq

    m = _map(args)
    verdict = check_bq(m, t=float(args.t), budget=int(args.budget))
    _store(args, m)
    out = verdict.to_json()
    out["seed"] = [_pair(v) for v in m.seed.as_tuple()]
    out["mu"] = _pair(m.mu)
    out.update(_meta(args))
    _emit(args, out)
    return verdict.exit_code


def cmd_mcshane_sum(args) -> int:
    from .bq_analyzer import check_bq
    from .identity_evaluator import mcshane_sum

    m = _map(args)
    verdict = check_bq(m, t=float(args.t), budget=int(args.budget))
    out = {"bq": verdict.to_json()}
    if verdict.status != "Satisfied":
        out.update(_meta(args))
        _emit(args, out)
        return verdict.exit_code
    rep = mcshane_sum(m, tol=float(args.tol), budget=int(args.budget))
    _store(args, m)
    out.update(rep.to_json())
    out.update(_meta(args))
    _emit(args, out)
    return EXIT_OK if rep.converged else EXIT_INCONCLUSIVE


def cmd_branch_sum(args) -> int:
    from .farey_tree import are_neighbors, parse_slope
    from .identity_evaluator import branch_sum

    try:
        X, Y = (parse_slope(s) for s in args.edge)
        head = parse_slope(args.head)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not (are_neighbors(X, Y) and are_neighbors(X, head) and are_neighbors(Y, head)):
        raise ConfigError("edge and head must be pairwise Farey neighbours")
    m = _map(args)
    rep = branch_sum(m, X, Y, head, tol=float(args.tol), budget=int(args.budget))
    _store(args, m)
    out = rep.to_json()
    out["edge"] = [str(X), str(Y)]
    out["head"] = str(head)
    out.update(_meta(args))
    _emit(args, out)
    return EXIT_OK if rep.converged else EXIT_INCONCLUSIVE


def _invariant_map(args):
    """The invariant map: solved by Newton (--solve) or the given seed, checked for invariance."""
    from .bundle_mode import NoConvergence, continue_invariant, solve_invariant
    from .markoff_engine import MarkoffMap

    H = args.monodromy
    if args.solve:
        if args.tau is not None:
            mu = parse_complex(args.tau) + 2.0
        elif args.mu is not None:
            mu = parse_complex(args.mu)
        else:
            mu = 0j
        try:
            return solve_invariant(H, mu, seed=int(args.seed))
        except NoConvergence:
            # Deform from the type-preserving solution instead.
            base = solve_invariant(H, 0j, seed=int(args.seed))
            return continue_invariant(H, base, mu, steps=int(args.steps))
    return MarkoffMap(*_seed(args))


def cmd_bundle_sum(args) -> int:
    from .bundle_mode import bundle_sum, check_relative_bq

    m = _invariant_map(args)
    verdict = check_relative_bq(m, args.monodromy, t=float(args.t))
    out = {"bq": verdict.to_json(), "seed": [_pair(v) for v in m.seed.as_tuple()]}
    if verdict.status != "Satisfied":
        _emit(args, out)
        return verdict.exit_code
    rep = bundle_sum(m, args.monodromy, tol=float(args.tol), budget=int(args.budget))
    out.update(rep.to_json())
    out.update(_meta(args))
    _emit(args, out)
    return EXIT_OK if rep.converged else EXIT_INCONCLUSIVE


def cmd_longitude(args) -> int:
    from .bundle_mode import longitude_sum

    m = _invariant_map(args)
    rep = longitude_sum(m, args.monodromy, tol=float(args.tol), budget=int(args.budget))
    out = rep.to_json()
    out["seed"] = [_pair(v) for v in m.seed.as_tuple()]
    out.update(_meta(args))
    _emit(args, out)
    return EXIT_OK if rep.tail_bound < float(args.tol) else EXIT_INCONCLUSIVE


def _index_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in str(text).split(":"))
    except ValueError as exc:
        raise ConfigError(f"index range must look like LO:HI, got {text!r}") from exc
    if hi < lo:
        raise ConfigError("empty index range")
    return lo, hi


def cmd_draw_gaps(args) -> int:
    from . import gap_drawer as gd
    from .markoff_engine import reconstruct_representation

    if args.format not in ("json", "svg"):
        raise gd.UnsupportedFormat(f"format {args.format!r} is not one of json, svg")
    if args.preset == "appendixB":
        rep = gd.parabolic_example()
        C = gd.evaluate(gd.C_WORD, rep)
        x, y = complex(rep[0][0, 0] + rep[0][1, 1]), complex(rep[1][0, 0] + rep[1][1, 1])
        AB = rep[0] @ rep[1]
        z = complex(AB[0, 0] + AB[1, 1])
    elif args.preset:
        raise ConfigError(f"unknown preset {args.preset!r}")
    else:
        x, y, z = _seed(args)
        rep = reconstruct_representation(x, y, z)
        C = gd.evaluate(gd.C_WORD, rep)
    lo, hi = _index_range(args.indices)
    if args.depth is None:
        idx = gd.indices(lo, hi, int(args.max_den))
    else:
        idx = gd.stern_brocot_indices(lo, hi, int(args.depth))
    diagnostics: list = []
    segs = gd.gap_segments(rep, idx, args.normalization, diagnostics)
    mu = x * x + y * y + z * z - x * y * z
    meta = {
        "mu": _pair(mu),
        "x": _pair(x),
        "y": _pair(y),
        "z": _pair(z),
        "normalization": gd.normalizer(C, args.normalization)[1],
        "skipped": [str(d) for d in diagnostics],
    }
    data = gd.render(segs, args.format, meta)
    if args.out:
        out = Path(args.out)
        out.write_bytes(data)
        if not args.no_png:
            shown = complex(round(mu.real, 10) + 0.0, round(mu.imag, 10) + 0.0)
            gd.render_png(segs, out.with_suffix(".png"), title=f"gaps, mu = {shown:.4g}")
    else:
        sys.stdout.buffer.write(data)
    return EXIT_OK


def cmd_orbit(args) -> int:
    from .farey_tree import matmul, word_matrix
    from .markoff_engine import apply_matrix

    m = _map(args)
    if args.words:
        letters = args.words if isinstance(args.words, str) else "".join(args.words)
        rng_seed = None
    else:
        rng = random.Random(int(args.seed))
        letters = "".join(rng.choice("LR") for _ in range(int(args.length)))
        rng_seed = int(args.seed)
    if any(ch not in "LRlr" for ch in letters):
        raise ConfigError("orbit words use the letters L, R (lowercase for inverses)")
    trace = []
    H = ((1, 0), (0, 1))
    for i in range(len(letters) + 1):
        if i:
            H = matmul(H, word_matrix(letters[i - 1]))
        img = apply_matrix(m, H)
        vals = img.seed.as_tuple()
        trace.append({"step": i, "prefix": letters[:i], "max_abs": max(abs(v) for v in vals), "triple": [_pair(v) for v in vals]})
    # Last index after which the maximum modulus keeps strictly increasing.
    grow_from = len(trace) - 1
    while grow_from > 0 and trace[grow_from - 1]["max_abs"] < trace[grow_from]["max_abs"]:
        grow_from -= 1
    out = {
        "seed": [_pair(v) for v in m.seed.as_tuple()],
        "mu": _pair(m.mu),
        "word": letters,
        "rng_seed": rng_seed,
        "increasing_from": grow_from,
        "trace": trace,
    }
    out.update(_meta(args))
    _emit(args, out)
    return EXIT_OK


def cmd_hexagon_check(args) -> int:
    from .branch_kernel import mod_distance
    from .geometry_verify import hexagon_report

    x, y, z = _seed(args)
    rep = hexagon_report(x, y, z)
    kappa_err = abs(rep.kappa ** 2 - 4.0 / rep.mu)
    sum_err = mod_distance(rep.turning_sum, rep.nu)
    out = rep.to_json()
    out["kappa_squared_residual"] = kappa_err
    out["turning_sum_residual"] = sum_err
    ok = kappa_err < 1e-8 and sum_err < 1e-7 and rep.factor_residual < 1e-8
    out["ok"] = ok
    _emit(args, out)
    return EXIT_OK if ok else EXIT_INCONCLUSIVE


# -- parser ----------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, seed: bool = True) -> None:
    if seed:
        p.add_argument("--triple", nargs=3, metavar=("X", "Y", "Z"), help="seed values as re,im")
        p.add_argument("--x", help="value at 1/0 (with --y and --mu)")
        p.add_argument("--y", help="value at 0/1")
        p.add_argument("--mu", help="mu; the value at 1/1 is a root of the vertex relation")
        p.add_argument("--root", choices=("small", "big"), default="small", help="which root to take for the value at 1/1")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--budget", type=int, default=1_000_000, help="maximum number of regions")
    p.add_argument("--t", type=float, default=2.0, help="attracting-tree parameter")
    p.add_argument("--threads", type=int, default=1, help="accepted for compatibility; runs use one worker")
    p.add_argument("--no-cache", action="store_true", help="bypass the enumeration cache")
    p.add_argument("--config", help="JSON file overriding the options")
    p.add_argument("--out", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="markoff", description="Markoff maps, their gap sums and geometry.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-bq", help="decide the BQ conditions")
    _common(p)
    p.set_defaults(func=cmd_check_bq)

    p = sub.add_parser("mcshane-sum", help="sum of the gap function over every region")
    _common(p)
    p.set_defaults(func=cmd_mcshane_sum)

    p = sub.add_parser("branch-sum", help="half gaps on an edge plus gaps behind it")
    _common(p)
    p.add_argument("--edge", nargs=2, default=["1/0", "0/1"], metavar=("X", "Y"))
    p.add_argument("--head", default="1/1", help="the branch is on the far side from this region")
    p.set_defaults(func=cmd_branch_sum)

    for name, func, text in (
        ("bundle-sum", cmd_bundle_sum, "gap sum over the quotient by a monodromy"),
        ("longitude", cmd_longitude, "left-side sum against the telescoped edge weights"),
    ):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("--monodromy", help="word in L and R")
        p.add_argument("--solve", action="store_true", help="solve for an invariant triple by Newton's method")
        p.add_argument("--tau", help="commutator trace; mu = tau + 2")
        p.add_argument("--seed", type=int, default=0, help="seed for the random Newton starts")
        p.add_argument("--steps", type=int, default=10, help="continuation steps when deforming in mu")
        p.set_defaults(func=func)

    p = sub.add_parser("draw-gaps", help="gap segments of the word pairs")
    _common(p)
    p.add_argument("--preset", help="'appendixB' for the built-in parabolic example")
    p.add_argument("--indices", default="0:4", help="index range LO:HI")
    p.add_argument("--max-den", type=int, default=4, help="largest index denominator")
    p.add_argument("--depth", type=int, help="use Stern-Brocot depth instead of --max-den")
    p.add_argument("--normalization", default="auto", choices=("auto", "parabolic", "loxodromic", "none"))
    p.add_argument("--format", default="json", help="json or svg")
    p.add_argument("--no-png", action="store_true", help="skip the PNG written next to --out")
    p.set_defaults(func=cmd_draw_gaps)

    p = sub.add_parser("orbit", help="moduli of the seed along a mapping-class word")
    _common(p)
    p.add_argument("--words", help="word in L, R (lowercase for inverses)")
    p.add_argument("--length", type=int, default=20, help="length of a random word")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("hexagon-check", help="right-angled hexagon identities for a triple")
    _common(p)
    p.set_defaults(func=cmd_hexagon_check)
    return parser


def main(argv=None) -> int:
    from .bq_analyzer import BudgetExceeded as ScanBudgetExceeded
    from .branch_kernel import DomainError
    from .bundle_mode import NoConvergence, NotInvariant
    from .farey_tree import NotHyperbolic
    from .gap_drawer import UnsupportedFormat
    from .geometry_verify import DegenerateConfiguration
    from .markoff_engine import BudgetExceeded

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        args = _apply_config(args)
        _validate(args)
        return args.func(args)
    except (ConfigError, UnsupportedFormat) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotHyperbolic as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_HYPERBOLIC
    except (NotInvariant, DegenerateConfiguration) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        # A value in [-2, 2] met during a sum: the seed violates BQ.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATED
    except (NoConvergence, BudgetExceeded, ScanBudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
