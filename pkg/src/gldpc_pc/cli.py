"""Command-line front end.

Subcommands: construct | encode | decode | simulate | baseline | complexity.
Exit codes: 0 ok, 1 usage error, 2 runtime failure. ``GLDPC_THREADS``
overrides ``--workers``. TOML config files mirror the flag names; explicit
flags win over file values.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .channel import (
    SimConfig,
    SimResult,
    SnrPoint,
    complexity_gldpc,
    complexity_ldpc,
    frame_generator,
    run_bler,
    sigma_for,
    transmit,
    write_csv,
)
from .errors import CodingError
from .gf2 import load_alist
from .gldpc import artifact_sha256, build_gldpc, gldpc_encode, load_artifact, save_artifact
from .mpa import mpa_decode
from .polar import construct_frozen_set, crc_attach, crc_select, polar_encode, scl_decode

_SISO_NAMES = {
    "soscl": "so-scl",
    "so-scl": "so-scl",
    "pyndiah": "pyndiah",
    "exact": "exact",
    "spc": "spc",
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parse_ebn0(spec: str):
    """Either a comma list '2.5,3.0' or a range 'start:stop:step'."""
    if ":" in spec:
        parts = [float(x) for x in spec.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise _UsageError(f"bad Eb/N0 range {spec!r}, want start:stop:step")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise _UsageError(f"empty Eb/N0 range {spec!r}")
        return tuple(round(start + i * step, 10) for i in range(count))
    return tuple(float(x) for x in spec.split(","))


def _read_bits(path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        text = fh.read()
    bits = [c for c in text if c in "01"]
    return np.array([int(c) for c in bits], dtype=np.uint8)


def _write_bits(path, bits) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("".join(str(int(b)) for b in bits) + "\n")


def _load_toml(path) -> dict:
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


# ---------------------------------------------------------------------------
# SVG plotting (polyline + log ticks, no plotting dependency)


def write_svg_plot(path, xs, ys, *, title="BLER vs Eb/N0") -> None:
    """Log-y BLER curve; zero-BLER points are dropped from the line."""
    width, height = 640, 480
    ml, mr, mt, mb = 70, 20, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    pts = [(x, y) for x, y in zip(xs, ys) if y > 0]
    if not pts:
        pts = [(min(xs), 1.0), (max(xs), 1.0)]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    y_lo = 10.0 ** math.floor(math.log10(min(p[1] for p in pts)))
    y_hi = 1.0

    def sx(x):
        return ml + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return mt + (math.log10(y_hi) - math.log10(y)) / (
            math.log10(y_hi) - math.log10(y_lo) or 1.0
        ) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width/2:.0f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    decade = y_hi
    while decade >= y_lo:
        y = sy(decade)
        out.append(
            f'<line x1="{ml}" y1="{y:.1f}" x2="{ml+pw}" y2="{y:.1f}" '
            'stroke="lightgray" stroke-dasharray="3,3"/>'
        )
        out.append(
            f'<text x="{ml-8}" y="{y+4:.1f}" text-anchor="end" font-size="11">'
            f"1e{int(round(math.log10(decade)))}</text>"
        )
        decade /= 10.0
    for x in sorted(set(xs)):
        px = sx(x)
        out.append(
            f'<line x1="{px:.1f}" y1="{mt+ph}" x2="{px:.1f}" y2="{mt+ph+5}" stroke="black"/>'
        )
        out.append(
            f'<text x="{px:.1f}" y="{mt+ph+20}" text-anchor="middle" font-size="11">{x:g}</text>'
        )
    poly = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in pts)
    out.append(f'<polyline points="{poly}" fill="none" stroke="steelblue" stroke-width="2"/>')
    for x, y in pts:
        out.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" fill="steelblue"/>')
    out.append(
        f'<text x="{ml+pw/2:.0f}" y="{height-12}" text-anchor="middle" font-size="12">'
        "Eb/N0 (dB)</text>"
    )
    out.append("</svg>")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_construct(args) -> int:
    code = build_gldpc(
        args.n,
        args.k,
        args.m,
        frozen_method={"ga": "gaussian-approx", "bhatt": "bhattacharyya", "file": "reliability-file"}[
            args.frozen
        ],
        design_ebn0_db=args.design_ebn0,
        design_erasure=args.design_erasure,
        reliability_file=args.frozen_file,
        perm_seed=args.seed,
        identity_perms=args.identity_perms,
    )
    save_artifact(code, args.out)
    d = code.dims
    flag = "  (dependent checks dropped)" if d["rank_deficient"] else ""
    print(f"N={d['N']} K={d['K']} rate={code.rate:.4f} checks={d['checks']} rank={d['rank']}{flag}")
    print(f"wrote {args.out}")
    return 0


def _cmd_encode(args) -> int:
    code = load_artifact(args.code)
    if args.random:
        rng = frame_generator(args.seed, 0, 0)
        msg = rng.integers(0, 2, size=code.k_bits, dtype=np.uint8)
    else:
        if args.msg is None:
            raise _UsageError("encode needs --msg FILE or --random")
        msg = _read_bits(args.msg)
    word = gldpc_encode(code, msg)
    _write_bits(args.out, word)
    print(f"encoded K={code.k_bits} -> N={code.n_bits}, wrote {args.out}")
    return 0


def _cmd_decode(args) -> int:
    code = load_artifact(args.code)
    with open(args.llr, "r", encoding="ascii") as fh:
        llr = np.array([float(tok) for tok in fh.read().split()])
    res = mpa_decode(
        code,
        llr,
        max_iter=args.max_iter,
        siso=_SISO_NAMES[args.siso],
        list_size=args.list,
        beta=args.beta,
        alpha=args.alpha,
    )
    _write_bits(args.out, res.codeword)
    print(f"converged={res.converged} iterations={res.iterations}, wrote {args.out}")
    return 0


def _resolved_sim_config(args) -> dict:
    cfg = {
        "code_artifact": args.code,
        "ebn0_db": list(_parse_ebn0(args.ebn0)),
        "max_frames": args.max_frames,
        "max_errors": args.max_errors,
        "siso": _SISO_NAMES[args.siso],
        "list_size": args.list,
        "beta": args.beta,
        "alpha": args.alpha,
        "max_iter": args.max_iter,
        "min_sum": args.min_sum,
        "seed": args.seed,
        "workers": args.workers,
        "all_zero": args.all_zero,
        "timing": args.timing,
    }
    return cfg


def _apply_config_file(args, parser_defaults: dict) -> None:
    """TOML values replace defaults; explicit flags keep their values."""
    file_cfg = _load_toml(args.config)
    for key, value in file_cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise _UsageError(f"unknown config key {key!r}")
        if getattr(args, attr) == parser_defaults.get(attr):
            setattr(args, attr, value)


def _run_sim_from_dict(cfg: dict) -> SimResult:
    code = load_artifact(cfg["code_artifact"])
    workers = int(os.environ.get("GLDPC_THREADS", cfg["workers"]))
    sim = SimConfig(
        code=code,
        ebn0_db=tuple(cfg["ebn0_db"]),
        max_frames=cfg["max_frames"],
        max_errors=cfg["max_errors"],
        siso=cfg["siso"],
        list_size=cfg["list_size"],
        beta=cfg["beta"],
        alpha=cfg["alpha"],
        max_iter=cfg["max_iter"],
        min_sum=cfg.get("min_sum", False),
        seed=cfg["seed"],
        workers=workers,
        all_zero=cfg["all_zero"],
        timing=cfg["timing"],
    )
    return run_bler(sim)


def _cmd_simulate(args, parser_defaults) -> int:
    if args.manifest_in:
        with open(args.manifest_in, "r", encoding="ascii") as fh:
            manifest = json.load(fh)
        cfg = manifest["config"]
        if args.code:
            cfg["code_artifact"] = args.code
    else:
        if args.config:
            _apply_config_file(args, parser_defaults)
        if not args.code:
            raise _UsageError("simulate needs --code ARTIFACT (or --manifest)")
        cfg = _resolved_sim_config(args)
    result = _run_sim_from_dict(cfg)
    write_csv(args.out, result)
    manifest = {
        "tool": "gldpc",
        "version": __version__,
        "config": cfg,
        "artifact_sha256": artifact_sha256(cfg["code_artifact"]),
        "csv": str(args.out),
    }
    manifest_path = str(args.out) + ".manifest.json"
    with open(manifest_path, "w", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for p in result.points:
        print(
            f"Eb/N0={p.ebn0_db:g} dB: frames={p.frames} errors={p.errors} "
            f"BLER={p.bler:.3e} iters={p.avg_iterations:.2f} "
            f"[{p.measured_wall_s:.1f}s]",
            file=sys.stderr,
        )
    if args.plot:
        write_svg_plot(
            args.plot,
            [p.ebn0_db for p in result.points],
            [p.bler for p in result.points],
        )
        print(f"wrote {args.plot}")
    print(f"wrote {args.out} and {manifest_path}")
    return 0


def _cmd_baseline(args, parser_defaults) -> int:
    if args.config:
        _apply_config_file(args, parser_defaults)
    ebn0 = _parse_ebn0(args.ebn0)
    if args.kind == "ldpc-alist":
        if not args.alist:
            raise _UsageError("ldpc-alist baseline needs --alist FILE")
        pcm = load_alist(args.alist)
        print(f"ldpc-alist: {pcm.rows}x{pcm.cols}, max_iter={args.max_iter}")
        sim = SimConfig(
            code=pcm,
            ebn0_db=ebn0,
            max_frames=args.max_frames,
            max_errors=args.max_errors,
            siso="spc",
            max_iter=args.max_iter,
            seed=args.seed,
            workers=int(os.environ.get("GLDPC_THREADS", args.workers)),
            timing=args.timing,
        )
        result = run_bler(sim)
    elif args.kind == "polar-cascl":
        print(f"polar-cascl: n={args.n} k={args.k} crc={args.crc_width}, L={args.list}")
        result = _polar_cascl_sweep(args, ebn0)
    else:
        raise _UsageError(f"unknown baseline kind {args.kind!r}")
    write_csv(args.out, result)
    for p in result.points:
        print(
            f"Eb/N0={p.ebn0_db:g} dB: frames={p.frames} errors={p.errors} BLER={p.bler:.3e}",
            file=sys.stderr,
        )
    print(f"wrote {args.out}")
    return 0


def _polar_cascl_sweep(args, ebn0) -> SimResult:
    """CRC-aided list decoding of a plain polar code, one frame at a time."""
    poly, width = 0x1021, args.crc_width
    code = construct_frozen_set(args.n, args.k + width, design_ebn0_db=args.design_ebn0)
    rate = args.k / args.n  # energy per payload bit; the CRC is overhead
    result = SimResult(seed=args.seed)
    for snr_index, point_db in enumerate(ebn0):
        sigma = sigma_for(point_db, rate)
        frames = errors = 0
        while frames < args.max_frames and errors < args.max_errors:
            rng = frame_generator(args.seed, snr_index, frames)
            msg = rng.integers(0, 2, size=args.k, dtype=np.uint8)
            sent = polar_encode(code, crc_attach(msg, poly, width))
            llr = transmit(sent, sigma, rng)
            outcome = scl_decode(code, llr, args.list)
            word, _ok = crc_select(code, outcome, poly, width)
            errors += int(not np.array_equal(word, sent))
            frames += 1
        result.points.append(
            SnrPoint(
                ebn0_db=point_db,
                frames=frames,
                errors=errors,
                bler=errors / frames,
                avg_iterations=1.0,
                converged_frames=frames - errors,
                cn_ops=0.0,
                wall_s=0.0,
                measured_wall_s=0.0,
            )
        )
    return result


def _cmd_complexity(args) -> int:
    printed = False
    eq_ldpc = eq_gldpc = None
    if args.dv is not None and args.dc is not None and args.m is not None:
        eq_ldpc = complexity_ldpc(args.i_avg_ldpc, args.n, args.m, args.dv, args.dc)
        print(f"ldpc_ops={eq_ldpc:.6g}")
        printed = True
    if args.component_n is not None:
        lengths = [args.component_n] * args.num_components
        eq_gldpc = complexity_gldpc(
            args.i_avg_gldpc, args.n, args.dv_gldpc, args.list, lengths
        )
        print(f"gldpc_ops={eq_gldpc:.6g}")
        printed = True
    if eq_ldpc and eq_gldpc:
        print(f"ratio={eq_gldpc / eq_ldpc:.4f}")
    if not printed:
        raise _UsageError("complexity needs LDPC (--m --dv --dc) or GLDPC (--component-n) inputs")
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_sweep_flags(p: _Parser) -> None:
    p.add_argument("--ebn0", default="2.5:3.5:0.5", help="comma list or start:stop:step (dB)")
    p.add_argument("--max-frames", type=int, default=10000)
    p.add_argument("--max-errors", type=int, default=100)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="measured wall time in CSV")
    p.add_argument("--config", help="TOML file with flag defaults")
    p.add_argument("--out", default="results.csv")


def build_parser() -> _Parser:
    top = _Parser(prog="gldpc", description=__doc__)
    top.add_argument("--version", action="version", version=f"gldpc {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a code and write its artifact")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--frozen", choices=("ga", "bhatt", "file"), default="ga")
    p.add_argument("--design-ebn0", type=float, default=3.0)
    p.add_argument("--design-erasure", type=float, default=0.5)
    p.add_argument("--frozen-file")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--identity-perms", action="store_true")
    p.add_argument("--out", default="code.json")

    p = sub.add_parser("encode", help="one-shot encode")
    p.add_argument("--code", required=True)
    p.add_argument("--msg")
    p.add_argument("--random", action="store_true")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default="codeword.txt")

    p = sub.add_parser("decode", help="one-shot decode of channel LLRs")
    p.add_argument("--code", required=True)
    p.add_argument("--llr", required=True)
    p.add_argument("--siso", choices=sorted(_SISO_NAMES), default="soscl")
    p.add_argument("--list", type=int, default=4)
    p.add_argument("--beta", type=float, default=3.0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=20)
    p.add_argument("--out", default="decoded.txt")

    p = sub.add_parser("simulate", help="Monte Carlo BLER sweep")
    p.add_argument("--code")
    p.add_argument("--siso", choices=sorted(_SISO_NAMES), default="soscl")
    p.add_argument("--list", type=int, default=4)
    p.add_argument("--beta", type=float, default=3.0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=20)
    p.add_argument("--min-sum", action="store_true")
    p.add_argument("--all-zero", action="store_true")
    p.add_argument("--plot", help="write an SVG BLER curve here")
    p.add_argument("--manifest", dest="manifest_in", help="re-run a stored manifest")
    _add_sweep_flags(p)

    p = sub.add_parser("baseline", help="reference decoders over the same channel")
    p.add_argument("--kind", choices=("ldpc-alist", "polar-cascl"), required=True)
    p.add_argument("--alist")
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--k", type=int, default=512)
    p.add_argument("--crc-width", type=int, default=16)
    p.add_argument("--list", type=int, default=16)
    p.add_argument("--design-ebn0", type=float, default=3.0)
    _add_sweep_flags(p)

    p = sub.add_parser("complexity", help="decoder operation counts")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--i-avg-ldpc", type=float, default=1.0)
    p.add_argument("--i-avg-gldpc", type=float, default=1.0)
    p.add_argument("--m", type=int)
    p.add_argument("--dv", type=float)
    p.add_argument("--dc", type=float)
    p.add_argument("--dv-gldpc", type=float, default=2.0)
    p.add_argument("--list", type=int, default=4)
    p.add_argument("--component-n", type=int)
    p.add_argument("--num-components", type=int, default=1)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        defaults = _defaults_for(parser, args.command)
        if args.command == "construct":
            return _cmd_construct(args)
        if args.command == "encode":
            return _cmd_encode(args)
        if args.command == "decode":
            return _cmd_decode(args)
        if args.command == "simulate":
            return _cmd_simulate(args, defaults)
        if args.command == "baseline":
            return _cmd_baseline(args, defaults)
        if args.command == "complexity":
            return _cmd_complexity(args)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (CodingError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _defaults_for(parser: _Parser, command: str) -> dict:
    for action in parser._subparsers._group_actions:
        if command in action.choices:
            sub = action.choices[command]
            return {a.dest: a.default for a in sub._actions}
    return {}


if __name__ == "__main__":
    sys.exit(main())
