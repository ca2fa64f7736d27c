"""Command-line interface: ``symcap <command> [options]``.

Exit codes: 0 success, 1 numeric or bracket failure, 2 usage or schema error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import secrets
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .basis import BasisError, SpanningBasis, choose_spanning_states
from .channel import FAMILY_ALIASES, FAMILY_RANGES, ChannelFamily
from .coherent_info import (
    NumericError,
    Precomputation,
    SymmetricInput,
    block_decomposition,
    evaluate_ci,
    evaluate_ci_extended,
    precompute,
)
from .rep_core import enumerate_partitions, specht_dim

log = logging.getLogger(__name__)

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2

DEFAULT_BRACKETS = {
    "depolarizing": (0.055, 0.07),
    "independent_xz": (0.10, 0.13),
    "two_pauli": (0.10, 0.13),
}

STATE_SCHEMA = {
    "type": "object",
    "required": ["n", "alpha0", "alpha1"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "alpha0": {"$ref": "#/$defs/row"},
        "alpha1": {"$ref": "#/$defs/row"},
    },
    "$defs": {
        "row": {
            "type": "array",
            "minItems": 2,
            "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}},
        }
    },
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def metadata(seed: int, config: dict) -> dict:
    return {"version": __version__, "seed": seed, "config_hash": config_hash(config)}


def atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_npz(path: Path, arrays: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, **arrays)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def family_kind(name: str) -> str:
    kind = FAMILY_ALIASES.get(name)
    if kind is None:
        raise UsageError(f"unknown channel {name!r}")
    return kind


def checked_family(args) -> ChannelFamily:
    if args.p is None:
        raise UsageError("--p is required")
    try:
        return ChannelFamily(family_kind(args.channel), args.p)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def resolve_seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(31)
        log.info("no --seed given, using %d", args.seed)
    return args.seed


def parse_n_range(text: str) -> list[int]:
    """Comma-separated items, each a single n or an inclusive range 'a-b' / 'a:b'."""
    out: list[int] = []
    try:
        for item in text.split(","):
            item = item.strip()
            sep = ":" if ":" in item else ("-" if "-" in item.lstrip("-") else None)
            if sep is None:
                out.append(int(item))
            else:
                a, b = (int(t) for t in item.split(sep))
                out.extend(range(a, b + 1))
    except ValueError as exc:
        raise UsageError(f"bad --n-range {text!r}") from exc
    out = sorted(set(out))
    if not out or min(out) < 1:
        raise UsageError(f"--n-range {text!r} is empty or contains n < 1")
    return out


def load_state(path: str) -> SymmetricInput:
    import jsonschema

    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not valid JSON ({exc})") from exc
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    try:
        jsonschema.validate(data, STATE_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"{path}: schema error at {where}: {exc.message}") from exc
    n = data["n"]
    for key in ("alpha0", "alpha1"):
        if len(data[key]) != n + 1:
            raise UsageError(f"{path}: schema error at {key}: expected {n + 1} entries, got {len(data[key])}")
    try:
        return SymmetricInput.from_json(data)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# precomputation cache


def cache_paths(cache_dir: str, fam: ChannelFamily, n: int, basis_seed: int) -> tuple[Path, Path]:
    stem = f"pre_{fam.kind}_p{fam.p!r}_n{n}_b{basis_seed}"
    base = Path(cache_dir)
    return base / f"{stem}.npz", base / f"{stem}.json"


def _lam_key(lam) -> str:
    return "ND_" + "_".join(str(x) for x in lam)


def save_precomputation(pre: Precomputation, fam: ChannelFamily, cache_dir: str, basis_seed: int) -> Path:
    npz, meta = cache_paths(cache_dir, fam, pre.n, basis_seed)
    arrays = {_lam_key(lam): pre.ND[lam] for lam in pre.partitions}
    arrays["basis_states"] = pre.basis.states
    atomic_write_npz(npz, arrays)
    cfg = {"channel": fam.to_json(), "n": pre.n, "basis_seed": basis_seed}
    info = {
        "metadata": metadata(basis_seed, cfg),
        "channel": fam.to_json(),
        "n": pre.n,
        "partitions": [list(lam) for lam in pre.partitions],
        "basis": pre.basis.to_json(),
    }
    atomic_write(meta, dump_json(info))
    return npz


def load_precomputation(fam: ChannelFamily, n: int, cache_dir: str, basis_seed: int) -> Precomputation | None:
    npz, meta = cache_paths(cache_dir, fam, n, basis_seed)
    if not (npz.exists() and meta.exists()):
        return None
    with np.load(npz) as data:
        states = data["basis_states"]
        basis = SpanningBasis.from_states(n, states, basis_seed)
        partitions = enumerate_partitions(n, 2)
        ND = {lam: data[_lam_key(lam)] for lam in partitions}
    dims = {lam: specht_dim(lam) for lam in partitions}
    return Precomputation(fam.channel(), n, basis, partitions, ND, None, dims)


def get_precomputation(fam: ChannelFamily, n: int, cache_dir: str | None, basis_seed: int = 0) -> Precomputation:
    if cache_dir:
        pre = load_precomputation(fam, n, cache_dir, basis_seed)
        if pre is not None:
            log.info("cache hit: %s", cache_paths(cache_dir, fam, n, basis_seed)[0])
            return pre
        log.info("cache miss: building precomputation for %s p=%r n=%d", fam.kind, fam.p, n)
    pre = precompute(fam.channel(), n, choose_spanning_states(n, basis_seed), keep_q=False)
    if cache_dir:
        save_precomputation(pre, fam, cache_dir, basis_seed)
    return pre


# ---------------------------------------------------------------------------
# commands


def cmd_precompute(args) -> int:
    fam = checked_family(args)
    if args.n is None:
        raise UsageError("--n is required")
    cache = args.cache or args.out or "."
    pre = get_precomputation(fam, args.n, cache, args.basis_seed)
    npz, meta = cache_paths(cache, fam, args.n, args.basis_seed)
    print(f"precomputation {npz} (condition number {pre.basis.condition_number:.4g})")
    return EXIT_OK


def cmd_ci(args) -> int:
    fam = checked_family(args)
    if not args.state:
        raise UsageError("--state is required")
    inp = load_state(args.state)
    if args.n is not None and args.n != inp.n:
        raise UsageError(f"state has n={inp.n} but --n {args.n} was given")
    pre = get_precomputation(fam, inp.n, args.cache, args.basis_seed)
    if pre.n != inp.n:
        raise UsageError(f"cache has n={pre.n}, state has n={inp.n}")
    dec = block_decomposition(inp, pre)
    ci = evaluate_ci(inp, pre)
    result = {
        "channel": fam.to_json(),
        "n": inp.n,
        "ci": ci,
        "rate": ci / inp.n,
        "blocks": [
            {"lambda": list(b.lam), "c": b.c, "S_sigma": b.S_sigma, "S_omega": b.S_omega} for b in dec.blocks
        ],
    }
    if args.precision == "extended":
        result["ci_extended"] = float(evaluate_ci_extended(inp, fam.channel(), pre.basis))
    cfg = {"cmd": "ci", "channel": fam.to_json(), "state": inp.to_json(), "precision": args.precision}
    result["metadata"] = metadata(args.seed, cfg)
    print(f"CI  {ci:.12e}  bits over n={inp.n}   rate {ci / inp.n:.12e}")
    if "ci_extended" in result:
        print(f"CI (extended precision)  {result['ci_extended']:.12e}")
    print(f"{'lambda':>12} {'c':>14} {'S(sigma)':>14} {'S(omega)':>14}")
    for b in dec.blocks:
        print(f"{str(tuple(b.lam)):>12} {b.c:14.6e} {b.S_sigma:14.8f} {b.S_omega:14.8f}")
    if args.out:
        atomic_write(args.out, dump_json(result))
    return EXIT_OK


def optimizer_config(args, **extra):
    from .optimizer import OptimizerConfig

    kw = dict(seed=args.seed, basis_seed=args.basis_seed)
    if args.restarts is not None:
        kw["restarts"] = args.restarts
    if args.iters is not None:
        kw["max_iterations"] = args.iters
    kw.update(extra)
    try:
        return OptimizerConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_optimize(args) -> int:
    from .optimizer import maximize_ci

    fam = checked_family(args)
    if args.n is None:
        raise UsageError("--n is required")
    resolve_seed(args)
    cfg = optimizer_config(args)
    warm = load_state(args.warm_start) if args.warm_start else None
    pre = get_precomputation(fam, args.n, args.cache, args.basis_seed)
    res = maximize_ci(pre.channel, args.n, cfg, warm_start=warm, pre=pre)
    out = res.input.to_json()
    out.update(
        {
            "channel": fam.to_json(),
            "ci": res.ci,
            "rate": res.ci / args.n,
            "converged": res.converged,
            "best_restart": res.best_label,
            "metadata": metadata(args.seed, {"cmd": "optimize", "channel": fam.to_json(), "n": args.n, **cfg.to_json()}),
        }
    )
    print(f"best CI {res.ci:.12e} (rate {res.ci / args.n:.6e}) from {res.best_label}")
    if args.out:
        atomic_write(args.out, dump_json(out))
    return EXIT_OK


def _bracket(args, kind):
    lo, hi = DEFAULT_BRACKETS[kind]
    lo = args.p_lo if args.p_lo is not None else lo
    hi = args.p_hi if args.p_hi is not None else hi
    rlo, rhi = FAMILY_RANGES[kind]
    if not (rlo <= lo < hi <= rhi):
        raise UsageError(f"bracket [{lo}, {hi}] not inside [{rlo}, {rhi:.6g}] for {kind}")
    return lo, hi


def cmd_threshold(args) -> int:
    from .optimizer import BracketError, threshold_search

    kind = family_kind(args.channel)
    if args.n is None:
        raise UsageError("--n is required")
    resolve_seed(args)
    cfg = optimizer_config(args)
    bracket = _bracket(args, kind)
    warm = load_state(args.warm_start) if args.warm_start else None
    try:
        rec = threshold_search(kind, args.n, cfg, bracket, warm_start=warm)
    except BracketError as exc:
        print(f"bracket failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = rec.to_json()
    out["metadata"] = metadata(args.seed, {"cmd": "threshold", "family": kind, "n": args.n, "bracket": bracket, **cfg.to_json()})
    print(f"{kind} n={args.n}: p* = {rec.p_star:.7f}  (CI {rec.ci_at_bracket[0]:.3e} / {rec.ci_at_bracket[1]:.3e})")
    if args.out:
        atomic_write(args.out, dump_json(out))
    return EXIT_OK


def _read_sweep(path: Path):
    """(header comment, rows) of an existing sweep CSV, or (None, [])."""
    if not path.exists():
        return None, []
    text = path.read_text()
    lines = text.splitlines()
    header = lines[0] if lines and lines[0].startswith("#") else None
    body = "\n".join(lines[1:] if header else lines)
    rows = list(csv.DictReader(io.StringIO(body))) if body.strip() else []
    return header, rows


def cmd_sweep(args) -> int:
    from .optimizer import CSV_COLUMNS, BracketError, threshold_search

    kind = family_kind(args.channel)
    if not args.n_range:
        raise UsageError("--n-range is required")
    if not args.out:
        raise UsageError("--out is required for sweep")
    ns = parse_n_range(args.n_range)
    resolve_seed(args)
    cfg = optimizer_config(args)
    bracket = _bracket(args, kind)
    meta = metadata(args.seed, {"cmd": "sweep", "family": kind, "bracket": bracket, **cfg.to_json()})
    header = "# " + json.dumps(meta, sort_keys=True)
    path = Path(args.out)
    old_header, rows = _read_sweep(path)
    if old_header is not None and old_header != header:
        raise UsageError(f"{path} was written with a different configuration; refusing to resume into it")
    done = {(r["family"], int(r["n"]), int(r["seed"])) for r in rows}
    failures = 0

    def flush():
        buf = io.StringIO()
        buf.write(header + "\n")
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in sorted(rows, key=lambda r: int(r["n"])):
            w.writerow(r)
        atomic_write(path, buf.getvalue())

    for n in ns:
        if (kind, n, args.seed) in done:
            log.info("skipping n=%d (already in %s)", n, path)
            continue
        try:
            rec = threshold_search(kind, n, cfg, bracket)
            row = rec.csv_row()
            print(f"{kind} n={n}: p* = {rec.p_star:.7f}")
        except BracketError as exc:
            failures += 1
            print(f"{kind} n={n}: bracket failure: {exc}", file=sys.stderr)
            row = {"family": kind, "n": n, "p_star": "nan", "ci_lo": "nan", "ci_hi": "nan",
                   "seed": args.seed, "restarts": cfg.restarts, "wall_time_s": "nan"}
        rows.append({k: str(v) for k, v in row.items()})
        flush()
    if not path.exists():
        flush()
    return EXIT_NUMERIC if failures else EXIT_OK


def cmd_degeneracy_report(args) -> int:
    from . import degeneracy as dg

    fam = checked_family(args)
    if args.n is None:
        raise UsageError("--n is required")
    if args.delta is None or args.delta <= 0:
        raise UsageError("--delta must be positive")
    if not args.out:
        raise UsageError("--out is required")
    ch = fam.channel()
    n = args.n
    dist = dg.irrep_measurement_distribution(ch, n)
    total, non_ann = dg.annihilation_counts(ch, n, delta=args.delta)
    st = dg.typical_set_stats(ch, n, args.delta)
    cfg = {"cmd": "degeneracy-report", "channel": fam.to_json(), "n": n, "delta": args.delta}
    report = {
        "channel": fam.to_json(),
        "n": n,
        "delta": args.delta,
        "distribution": [{"lambda": list(lam), "probability": pr} for lam, pr in dist.items()],
        "two_row_prob": float(sum(pr for lam, pr in dist.items() if dg.is_two_row(lam))),
        "annihilation_counts": {"total": total, "non_annihilating": non_ann,
                                "ratio": (non_ann / total) if total else None},
        "typicality_stats": {"mass": st.mass, "count": st.count, "min_prob": st.min_prob, "max_prob": st.max_prob},
        "metadata": metadata(args.seed, cfg),
    }
    out = Path(args.out)
    atomic_write(out, dump_json(report))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda", "probability"])
    for lam, pr in dist.items():
        w.writerow([" ".join(str(x) for x in lam), repr(pr)])
    atomic_write(out.with_suffix(".csv"), buf.getvalue())
    print(f"two-row probability {report['two_row_prob']:.6e}; non-annihilating {non_ann} of {total}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    from .oracle import MAX_SUITE_QUBITS, equivalence_suite

    if args.n_range:
        ns = parse_n_range(args.n_range)
    else:
        ns = list(range(1, (args.n or MAX_SUITE_QUBITS) + 1))
    if max(ns) > MAX_SUITE_QUBITS:
        raise UsageError(f"oracle check limited to n <= {MAX_SUITE_QUBITS} (dense 2^(n+1) matrices); got n={max(ns)}")
    seed = args.seed if args.seed is not None else 0
    worst = equivalence_suite(ns, samples=args.samples, seed=seed)
    ok = worst["max_diff"] <= args.tol
    print(
        f"{'PASS' if ok else 'FAIL'}: {worst['cases']} cases, max |fast - brute| = {worst['max_diff']:.3e}"
        + ("" if ok else f" at n={worst['n']} {worst['family']} p={worst['p']} sample {worst['sample']}")
    )
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {
    "precompute": cmd_precompute,
    "ci": cmd_ci,
    "optimize": cmd_optimize,
    "threshold": cmd_threshold,
    "sweep": cmd_sweep,
    "degeneracy-report": cmd_degeneracy_report,
    "oracle-check": cmd_oracle_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--channel", choices=["dep", "xz", "2pauli"], default="dep")
    common.add_argument("--p", type=float)
    common.add_argument("--n", type=int)
    common.add_argument("--n-range")
    common.add_argument("--delta", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--restarts", type=int)
    common.add_argument("--iters", type=int)
    common.add_argument("--out")
    common.add_argument("--cache")
    common.add_argument("--precision", choices=["double", "extended"], default="double")
    common.add_argument("--basis-seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="symcap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"symcap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("precompute", parents=[common], help="build and cache irrep blocks")
    p = sub.add_parser("ci", parents=[common], help="coherent information of a stored state")
    p.add_argument("--state")
    p = sub.add_parser("optimize", parents=[common], help="maximise CI at fixed p")
    p.add_argument("--warm-start")
    for name in ("threshold", "sweep"):
        p = sub.add_parser(name, parents=[common], help="bisect for the threshold p*")
        p.add_argument("--p-lo", type=float)
        p.add_argument("--p-hi", type=float)
        if name == "threshold":
            p.add_argument("--warm-start")
    sub.add_parser("degeneracy-report", parents=[common], help="Schur-basis degeneracy statistics")
    p = sub.add_parser("oracle-check", parents=[common], help="fast path vs dense oracle")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-8)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"symcap {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, BasisError, ArithmeticError) as exc:
        print(f"symcap {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
