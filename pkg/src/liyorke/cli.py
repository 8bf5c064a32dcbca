"""Command-line front end.

One self-describing record per line, then a single ``#summary`` line that
embeds the fully resolved configuration (re-running from it reproduces the
output byte for byte).  Exit status: 0 success, 2 input error, 3 precision
error.  LIYORKE_PRECISION_BITS sets the default mantissa size; all other
configuration comes from flags or a ``key = value`` config file (flags win).
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor

from . import algebra, dynamics, enumscale, kneading, pairlab, tower
from .errors import InputError, LiYorkeError, PrecisionError

_FLOAT_DIGITS = 17


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.{_FLOAT_DIGITS}g}"
    return str(x)


def _summary(cmd: str, resolved: dict) -> str:
    parts = [f"#summary cmd={cmd}"]
    for k in sorted(resolved):
        v = resolved[k]
        if isinstance(v, str) and (" " in v or v == ""):
            parts.append(f'{k}="{v}"')
        else:
            parts.append(f"{k}={_fmt(v)}")
    return " ".join(parts)


def _emit(out, lines, summary):
    text = "\n".join(list(lines) + [summary]) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _default_bits() -> int:
    return int(os.environ.get("LIYORKE_PRECISION_BITS", "53"))


def _load_config(path):
    cfg = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"config line without '=': {raw.rstrip()!r}")
            k, v = line.split("=", 1)
            cfg[k.strip().replace("-", "_")] = v.strip()
    return cfg


def _apply_config(args, parser):
    """File values fill any argument still at its parser default."""
    if not getattr(args, "config", None):
        return args
    cfg = _load_config(args.config)
    for key, val in cfg.items():
        if not hasattr(args, key):
            raise InputError(f"unknown config key {key!r}")
        if getattr(args, key) == parser.get_default(key):
            default = parser.get_default(key)
            conv = type(default) if default is not None and not isinstance(default, bool) else str
            if isinstance(default, bool):
                setattr(args, key, val.lower() in ("1", "true", "yes"))
            elif default is None:
                setattr(args, key, val)
            else:
                setattr(args, key, conv(val))
    return args


# ---------------------------------------------------------------------------
# subcommand implementations

def _cmd_cutting_times(args):
    rule = kneading.rule_by_name(args.q)
    kd = kneading.cutting_times(rule, args.depth)
    lines = kneading.to_text(kd).rstrip("\n").splitlines()
    renorm = kneading.is_renormalizable(kd, min(args.horizon, kd.depth))
    resolved = dict(q=args.q, depth=args.depth, horizon=args.horizon,
                    renormalizable=str(renorm), max_gap=kneading.max_gap(kd))
    return lines, resolved


def _cmd_enumscale(args):
    rule = kneading.rule_by_name(args.q)
    kd = kneading.cutting_times(rule, args.depth, name=args.q)
    lines = []
    resolved = dict(q=args.q, depth=args.depth)
    if args.encode is not None:
        e = enumscale.encode(args.encode, kd)
        lines.append(f"encode {args.encode} {e}")
        lines.append(f"decode {enumscale.decode(e)} {e}")
        resolved["encode"] = args.encode
    if args.add_one is not None:
        e = enumscale.from_text(args.add_one, kd)
        e2 = enumscale.add_one(e)
        lines.append(f"add_one {e} {e2} {enumscale.decode(e2)}")
        resolved["add_one"] = args.add_one
    if args.project is not None:
        e = enumscale.from_text(args.project, kd)
        root = algebra.leading_root(args.rho_d, 1e-40)
        prec = kd.S(min(args.trunc, kd.depth)).bit_length() + 64
        if args.prec_bits and args.prec_bits < prec:
            raise PrecisionError(
                f"--prec-bits {args.prec_bits} below required {prec}")
        res = enumscale.project(e, root.to_mpf(prec), trunc=args.trunc)
        lines.append(f"project {e} {_fmt(res.value)}")
        resolved.update(project=args.project, rho_d=args.rho_d, trunc=args.trunc)
    if not lines:
        raise InputError("enumscale: pass --encode, --add-one, or --project")
    return lines, resolved


def _cmd_pisot(args):
    if args.poly:
        coeffs = [int(t) for t in args.poly.split(",")]
    else:
        coeffs = algebra.recursion_poly(args.d)
    report = algebra.is_pisot_driven(coeffs, margin=args.margin)
    lines = [f"poly {','.join(str(c) for c in coeffs)}"]
    quot, rem = algebra.poly_divmod(coeffs, [1, -1, 1])
    if not rem:
        lines.append(
            "factor 1,-1,1 quotient "
            + ",".join(str(c) for c in quot)
            + "  # unit-circle pair present"
        )
    for mmod, r in report.moduli:
        lines.append(f"conjugate_modulus {_fmt(mmod)} radius {_fmt(r)}")
    resolved = dict(d=args.d if not args.poly else "",
                    poly=args.poly or "", margin=args.margin,
                    pisot_driven=report.pisot, leading=report.leading)
    return lines, resolved


def _cmd_tune(args):
    rule = kneading.rule_by_name(args.q)
    kd = kneading.cutting_times(rule, args.depth, name=args.q)
    res = dynamics.tune_parameter(args.family, args.ell, kd, args.depth,
                                  args.bits)
    emp = dynamics.empirical_cutting_times(res.map, args.depth,
                                           n_cap=kd.S(args.depth) + 2)
    lines = [f"bracket {res.lo} {res.hi}",
             f"parameter {res.mid}",
             f"iterations {res.iterations}"]
    for k, s in enumerate(emp.kd.cutting_times):
        lines.append(f"S {k} {s}")
    resolved = dict(family=args.family, ell=args.ell, q=args.q,
                    depth=args.depth, bits=args.bits,
                    matched=list(emp.kd.cutting_times)
                    == list(kd.cutting_times[: args.depth + 1]))
    return lines, resolved


def _cmd_tower(args):
    m = dynamics.parse_map_spec(args.map)
    levels = tower.build_levels(m, args.n_max)
    if args.x is not None:
        x = float(args.x)
    else:
        x = _uniform_point(m, args.seed, 0)
    tr = tower.lift(m, levels, x, args.steps, verify=args.verify)
    lines = tr.lines()
    resolved = dict(map=m.spec_string(), n_max=args.n_max, steps=args.steps,
                    x=_fmt(float(x)), seed=args.seed, verify=args.verify,
                    ties=len(tr.ties), cutting_count=levels.kd.depth + 1)
    return lines, resolved


def _uniform_point(m, seed, index):
    lo, hi = m.domain
    rng = random.Random(seed * 1_000_003 + index)
    return lo + (hi - lo) * rng.random()


def _cmd_drift(args):
    m = dynamics.parse_map_spec(args.map)
    levels = tower.build_levels(m, args.n_max)
    report = tower.drift(m, levels, args.samples, args.steps, seed=args.seed)
    resolved = dict(map=m.spec_string(), n_max=args.n_max, steps=args.steps,
                    samples=args.samples, seed=args.seed,
                    verdict=report.verdict,
                    mean=report.mean if report.mean is not None else "",
                    ci_half_width=report.ci_half_width
                    if report.ci_half_width is not None else "")
    return report.lines(), resolved


def _cmd_loops(args):
    rule = kneading.rule_by_name(args.q)
    kd = kneading.cutting_times(rule, args.depth, name=args.q)
    pair = tower.synthesize_loops(kd, args.kappa, args.kappa_hat)
    lines = []
    for name, loop in (("A", pair.loop_a), ("B", pair.loop_b)):
        for e in loop:
            lines.append(f"{name} {e.kind} {e.src} {e.dst} {e.cost}")
    resolved = dict(q=args.q, depth=args.depth, kappa=args.kappa,
                    kappa_hat=args.kappa_hat, length_a=pair.length_a,
                    length_b=pair.length_b)
    return lines, resolved


def _classify_chunk(payload):
    spec, idx_lo, idx_hi, seed, window, burn_in, eps, delta_min = payload
    m = dynamics.parse_map_spec(spec)
    pairs = pairlab.sample_pairs(m, idx_hi, seed)[idx_lo:idx_hi]
    verdicts = pairlab.classify_batch(m, pairs, window, burn_in, eps, delta_min)
    return idx_lo, [(v.label, v.min_gap, v.max_gap) for v in verdicts]


def _cmd_classify_pairs(args):
    m = dynamics.parse_map_spec(args.map)
    eps = args.eps if args.eps is not None else 0.45 * m.diam
    spec = m.spec_string()
    jobs = max(args.jobs, 1)
    results = [None] * args.pairs
    if jobs == 1 or args.pairs < 4 * jobs:
        _, rows = _classify_chunk((spec, 0, args.pairs, args.seed, args.window,
                                   args.burn_in, eps, args.delta_min))
        results = rows
    else:
        bounds = [args.pairs * i // jobs for i in range(jobs + 1)]
        payloads = [(spec, bounds[i], bounds[i + 1], args.seed, args.window,
                     args.burn_in, eps, args.delta_min) for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for lo, rows in sorted(pool.map(_classify_chunk, payloads)):
                results[lo:lo + len(rows)] = rows
    lines = [f"{lab} {_fmt(mn)} {_fmt(mx)} {i}"
             for i, (lab, mn, mx) in enumerate(results)]
    counts = {}
    for lab, _, _ in results:
        counts[lab] = counts.get(lab, 0) + 1
    resolved = dict(map=spec, pairs=args.pairs, seed=args.seed,
                    window=args.window, burn_in=args.burn_in, eps=eps,
                    delta_min=args.delta_min, jobs=args.jobs)
    for lab in pairlab.LABELS:
        c = counts.get(lab, 0)
        lo, hi = pairlab.wilson_interval(c, args.pairs)
        resolved[f"frac_{lab.replace('-like', '')}"] = c / args.pairs
        resolved[f"wilson_{lab.replace('-like', '')}"] = f"{lo:.6f},{hi:.6f}"
    return lines, resolved


def _parse_set(text):
    out = []
    for part in text.split(","):
        a, _, b = part.partition(":")
        out.append((float(a), float(b)))
    return out


def _cmd_limsup_full(args):
    m = dynamics.parse_map_spec(args.map)
    A = _parse_set(args.set)
    rep = pairlab.limsup_full_estimate(m, A, args.n_max, cap=args.cap)
    resolved = dict(map=m.spec_string(), set=args.set, n_max=args.n_max,
                    cap=args.cap, running_max_lower=rep.running_max_lower)
    return rep.lines(), resolved


def _cmd_entry_map(args):
    m = dynamics.parse_map_spec(args.map)
    U = _parse_set(args.set)
    if args.xs:
        xs = [float(t) for t in args.xs.split(",")]
    else:
        xs = [_uniform_point(m, args.seed, i) for i in range(args.points)]
    rep = tower.first_entry_map(m, U, xs, args.horizon)
    lines = []
    branch_ids = {}
    for rec in rep.records:
        if rec.time is None:
            lines.append(f"point {_fmt(rec.x)} no-entry - -")
            continue
        bid = branch_ids.setdefault(rec.branch, len(branch_ids))
        lines.append(f"point {_fmt(rec.x)} {rec.time} {_fmt(rec.image)} {bid}")
    for key, bid in branch_ids.items():
        st = rep.branches[key]
        lines.append(f"branch {bid} {st.count} {_fmt(st.distortion)}")
    resolved = dict(map=m.spec_string(), set=args.set, horizon=args.horizon,
                    seed=args.seed, points=len(xs),
                    boundary_reentries=rep.boundary_reentries)
    return lines, resolved


# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="liyorke",
                                description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--out", default="-", help="output path (default stdout)")
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("cutting-times", help="run the cutting-time recursion")
    sp.add_argument("--q", required=True, help="fib | feigenbaum | doubled-example | gap:<d> | table:...")
    sp.add_argument("--depth", type=int, default=20)
    sp.add_argument("--horizon", type=int, default=50)
    sp.set_defaults(fn=_cmd_cutting_times)

    sp = sub.add_parser("enumscale", help="odometer representations")
    sp.add_argument("--q", required=True)
    sp.add_argument("--depth", type=int, default=40)
    sp.add_argument("--encode", type=int)
    sp.add_argument("--add-one", dest="add_one")
    sp.add_argument("--project", dest="project")
    sp.add_argument("--rho-d", dest="rho_d", type=int, default=2)
    sp.add_argument("--trunc", type=int, default=40)
    sp.add_argument("--prec-bits", dest="prec_bits", type=int, default=0)
    sp.set_defaults(fn=_cmd_enumscale)

    sp = sub.add_parser("pisot", help="recursion-polynomial root portrait")
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--poly", help="comma-separated integer coefficients, descending")
    sp.add_argument("--margin", type=float, default=1e-9)
    sp.set_defaults(fn=_cmd_pisot)

    sp = sub.add_parser("tune", help="bisect the family parameter to a kneading target")
    sp.add_argument("--family", choices=("logistic", "symmetric"), default="logistic")
    sp.add_argument("--ell", type=float, default=2.0)
    sp.add_argument("--q", required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--bits", type=int, default=256)
    sp.set_defaults(fn=_cmd_tune)

    sp = sub.add_parser("tower", help="lift an orbit through the level structure")
    sp.add_argument("--map", required=True)
    sp.add_argument("--n-max", dest="n_max", type=int, default=2000)
    sp.add_argument("--steps", type=int, default=1000)
    sp.add_argument("--x", help="initial point (default: seeded random)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--verify", action="store_true")
    sp.set_defaults(fn=_cmd_tower)

    sp = sub.add_parser("drift", help="induced-walk increment statistics")
    sp.add_argument("--map", required=True)
    sp.add_argument("--n-max", dest="n_max", type=int, default=2000)
    sp.add_argument("--steps", type=int, default=1000)
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=_cmd_drift)

    sp = sub.add_parser("loops", help="equal-length loop pair through two states")
    sp.add_argument("--q", required=True)
    sp.add_argument("--depth", type=int, default=30)
    sp.add_argument("--kappa", type=int, required=True)
    sp.add_argument("--kappa-hat", dest="kappa_hat", type=int, required=True)
    sp.set_defaults(fn=_cmd_loops)

    sp = sub.add_parser("classify-pairs", help="Monte-Carlo pair classification")
    sp.add_argument("--map", required=True)
    sp.add_argument("--pairs", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--window", type=int, default=100_000)
    sp.add_argument("--burn-in", dest="burn_in", type=int, default=1_000)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--delta-min", dest="delta_min", type=float, default=1e-3)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(fn=_cmd_classify_pairs)

    sp = sub.add_parser("limsup-full", help="exact pushforward mass of a set")
    sp.add_argument("--map", required=True)
    sp.add_argument("--set", required=True, help="lo:hi[,lo:hi...]")
    sp.add_argument("--n-max", dest="n_max", type=int, default=30)
    sp.add_argument("--cap", type=int, default=10_000)
    sp.set_defaults(fn=_cmd_limsup_full)

    sp = sub.add_parser("entry-map", help="first entry times into a set")
    sp.add_argument("--map", required=True)
    sp.add_argument("--set", required=True)
    sp.add_argument("--points", type=int, default=100)
    sp.add_argument("--xs", help="explicit comma-separated sample points")
    sp.add_argument("--horizon", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=_cmd_entry_map)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(args, parser)
        lines, resolved = args.fn(args)
        _emit(args.out, lines, _summary(args.cmd, resolved))
    except PrecisionError as exc:
        print(f"precision error: {exc}", file=sys.stderr)
        return 3
    except (InputError, LiYorkeError, ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
