"""Command-line front end.

Subcommands: mindet, member, energy, rate, simulate, profile, dmt,
decode-trace.  One-shot queries take flags; simulations take a JSON
config file.  Every command is a pure function of its arguments, config
contents, and seed, and reproduces its output byte for byte.  Exit
codes: 0 success, 2 validation error, 3 runtime error.

Report-path commands (simulate, profile, dmt, energy) render a PNG
figure next to the CSV when an output path is given; --no-plot disables
the figure.  The environment variable STLC_SEED overrides the config
seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import channel, decoder, lattices

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


class ConfigError(ValueError):
    pass


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        if math.isinf(v) or math.isnan(v):
            return str(v)
        return f"{v:.6g}"
    return str(v)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _print_record(record: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(record, sort_keys=True))
    else:
        print(",".join(str(k) for k in record))
        print(",".join(_fmt(v) for v in record.values()))


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------


def load_sim_config(path: str) -> channel.SimConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(
            f"config schema_version must be {SCHEMA_VERSION}, got {raw.get('schema_version')!r}"
        )
    required = {"lattice", "Q", "snr_db_grid", "trials_per_point", "seed"}
    missing = required - raw.keys()
    if missing:
        raise ConfigError(f"config missing fields: {sorted(missing)}")
    seed = int(raw["seed"])
    env_seed = os.environ.get("STLC_SEED")
    if env_seed is not None:
        seed = int(env_seed)
    cfg = channel.SimConfig(
        lattice=str(raw["lattice"]),
        q=int(raw["Q"]),
        snr_db_grid=tuple(float(v) for v in raw["snr_db_grid"]),
        trials_per_point=int(raw["trials_per_point"]),
        seed=seed,
        normalize_mindet=bool(raw.get("normalize_mindet", True)),
        max_trials=None if raw.get("max_trials") is None else int(raw["max_trials"]),
        target_errors=(
            None if raw.get("target_errors") is None else int(raw["target_errors"])
        ),
        code_size=None if raw.get("code_size") is None else int(raw["code_size"]),
        coset_offset=(
            None if raw.get("coset_offset") is None else bool(raw["coset_offset"])
        ),
    )
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _sim_metadata(cfg: channel.SimConfig, extra: dict) -> str:
    tag = lattices.normalize_tag(cfg.lattice)
    scale_per_point = {
        _fmt(s): channel.scale_factor(cfg, s) for s in cfg.snr_db_grid
    }
    e_code = channel.code_mean_energy(cfg)
    code_desc = (
        {"construction": "symbol box", "Q": cfg.q}
        if cfg.code_size is None
        else {
            "construction": "shortest vectors",
            "size": cfg.code_size,
            "coset_offset": channel.shortest_vector_code(
                tag, cfg.code_size, cfg.coset_offset
            )[2],
        }
    )
    meta = {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "lattice": tag,
            "Q": cfg.q,
            "snr_db_grid": list(cfg.snr_db_grid),
            "trials_per_point": cfg.trials_per_point,
            "seed": cfg.seed,
            "normalize_mindet": cfg.normalize_mindet,
            "max_trials": cfg.max_trials,
            "target_errors": cfg.target_errors,
            "code_size": cfg.code_size,
            "coset_offset": cfg.coset_offset,
        },
        "code": code_desc,
        "snr_convention": (
            "snr_db = 10 log10(avg transmit energy per channel use / noise "
            "variance per complex dimension); codes compared at equal "
            "normalized minimum determinant"
            if cfg.normalize_mindet
            else "raw amplitude: entry scale s = 10^(snr_db/20), unit noise"
        ),
        "noise": "i.i.d. complex Gaussian, unit variance per complex dimension",
        "channel": "i.i.d. complex Gaussian entries, unit variance (Rayleigh)",
        "scale_factor_per_point": scale_per_point,
        "mean_coefficient_energy": e_code,
        "avg_tx_block_energy_per_point": {
            k: 4.0 * e_code * s * s for k, s in scale_per_point.items()
        },
        "min_det": lattices.MIN_DET.get(tag, 1),
        "rng": "numpy default_rng seeded by [seed, snr_index, trial_index]",
    }
    meta.update(extra)
    return json.dumps(meta, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_mindet(args) -> int:
    value, witness = lattices.min_det_search(args.lattice, args.box)
    _print_record(
        {
            "lattice": lattices.normalize_tag(args.lattice),
            "box": args.box,
            "min_det": value,
            "witness": " ".join(str(v) for v in witness),
        },
        args.format,
    )
    return EXIT_OK


def cmd_member(args) -> int:
    x = [int(v) for v in args.x.split(",")]
    ok = lattices.member(args.lattice, x)
    _print_record(
        {"lattice": lattices.normalize_tag(args.lattice), "x": args.x, "member": ok},
        args.format,
    )
    return EXIT_OK


def cmd_rate(args) -> int:
    r = lattices.rate_bpcu(args.q, args.lattice)
    _print_record(
        {"lattice": lattices.normalize_tag(args.lattice), "Q": args.q, "rate_bpcu": r},
        args.format,
    )
    return EXIT_OK


def cmd_energy(args) -> int:
    sizes = [int(v) for v in args.k.split(",")]
    if any(k < 1 for k in sizes):
        raise ConfigError("K values must be positive")
    rows = [
        (args.lattice.upper(), k, args.offset, lattices.average_energy(args.lattice, k, args.offset))
        for k in sizes
    ]
    header = "lattice,K,offset,avg_energy"
    lines = [header] + [
        f"{t},{k},{_fmt(off)},{_fmt(e)}" for t, k, off, e in rows
    ]
    text = "\n".join(lines) + "\n"
    if args.output:
        out = Path(args.output)
        _atomic_write(out, text)
        if not args.no_plot:
            from . import plotting

            plotting.save_energy_figure(
                [r[1] for r in rows], [r[3] for r in rows], rows[0][0],
                out.with_suffix(".png"),
            )
        print(f"wrote {out}")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_dmt(args) -> int:
    if args.r is None and args.grid is None:
        raise ConfigError("dmt requires --r or --grid")
    if args.r is not None:
        d = channel.dmt_bound(args.family, args.r)
        _print_record({"family": args.family, "r": args.r, "d": d}, args.format)
        return EXIT_OK
    try:
        start, stop, step = (float(v) for v in args.grid.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad --grid {args.grid!r}; expected start:stop:step") from exc
    if step <= 0 or stop < start:
        raise ConfigError("grid must satisfy start <= stop, step > 0")
    r_values = []
    r = start
    while r <= stop + 1e-12:
        r_values.append(round(r, 12))
        r += step
    d_values = [channel.dmt_bound(args.family, r) for r in r_values]
    lines = ["family,r,d"] + [
        f"{args.family},{_fmt(r)},{_fmt(d)}" for r, d in zip(r_values, d_values)
    ]
    text = "\n".join(lines) + "\n"
    if args.output:
        out = Path(args.output)
        _atomic_write(out, text)
        if not args.no_plot:
            from . import plotting

            plotting.save_dmt_figure(r_values, d_values, args.family, out.with_suffix(".png"))
        print(f"wrote {out}")
    else:
        print(text, end="")
    return EXIT_OK


def _bler_csv(points) -> str:
    lines = ["snr_db,trials,block_errors,bler,avg_nodes,p95_nodes"]
    for p in points:
        lines.append(
            f"{_fmt(p.snr_db)},{p.trials},{p.block_errors},"
            f"{_fmt(p.bler)},{_fmt(p.avg_nodes)},{_fmt(p.p95_nodes)}"
        )
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    cfg = load_sim_config(args.config)
    points = channel.run_bler(cfg, workers=args.threads)
    out = Path(args.output)
    _atomic_write(out, _bler_csv(points))
    _atomic_write(out.with_suffix(".meta.json"), _sim_metadata(cfg, {"command": "simulate"}))
    if not args.no_plot:
        from . import plotting

        title = f"{lattices.normalize_tag(cfg.lattice)}  Q={cfg.q}"
        plotting.save_bler_figure(points, title, out.with_suffix(".png"))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_profile(args) -> int:
    cfg = load_sim_config(args.config)
    result = channel.complexity_profile(cfg, bins=args.bins, workers=args.threads)
    lines = ["bin,sens_lo,sens_hi,count,mean_nodes,p95_nodes"]
    for i, b in enumerate(result.bins):
        lines.append(
            f"{i},{_fmt(b.lo)},{_fmt(b.hi)},{b.count},{_fmt(b.mean_nodes)},{_fmt(b.p95_nodes)}"
        )
    text = "\n".join(lines) + "\n"
    out = Path(args.output)
    _atomic_write(out, text)
    _atomic_write(
        out.with_suffix(".meta.json"),
        _sim_metadata(cfg, {"command": "profile", "bins": args.bins,
                            "overall_p95_nodes": result.p95_nodes()}),
    )
    if not args.no_plot:
        from . import plotting

        title = f"{lattices.normalize_tag(cfg.lattice)}  Q={cfg.q}  complexity vs sensitivity"
        plotting.save_profile_figure(result, title, out.with_suffix(".png"))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_decode_trace(args) -> int:
    try:
        raw = json.loads(Path(args.instance).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read instance {args.instance}: {exc}") from exc
    for key in ("h", "y", "Q", "lattice"):
        if key not in raw:
            raise ConfigError(f"instance missing field {key!r}")
    h = np.array([complex(re, im) for re, im in raw["h"]])
    y = np.array([complex(re, im) for re, im in raw["y"]])
    q_size = int(raw["Q"])
    tag = lattices.normalize_tag(raw["lattice"])
    c0 = float(raw["c0"]) if raw.get("c0") is not None else math.inf
    B = channel.effective_channel(h, tag)
    B2, y2 = decoder.pam_absorb(B, np.concatenate([y.real, y.imag]), q_size)
    ch = decoder.qr_preprocess(B2)
    trace: list[str] = []
    res = decoder.sphere_decode(ch, ch.y_prime(y2), q_size, lattice=tag, c0=c0, trace=trace)
    print("level,value,partial_dist,action")
    for line in trace:
        print(line)
    print(
        f"# q_hat={' '.join(str(v) for v in res.q_hat)} "
        f"distance_sq={_fmt(res.distance_sq)} nodes={res.nodes_visited} found={res.found}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="stlc",
        description="Nested quaternionic space-time lattice codes: exact checks, "
        "decoding, and Rayleigh-fading simulation.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_format(sp):
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("mindet", help="exhaustive minimum determinant over a box")
    sp.add_argument("--lattice", required=True)
    sp.add_argument("--box", type=int, default=2)
    add_format(sp)
    sp.set_defaults(func=cmd_mindet)

    sp = sub.add_parser("member", help="sublattice membership of a coefficient vector")
    sp.add_argument("--lattice", required=True)
    sp.add_argument("--x", required=True, help="8 comma-separated integers")
    add_format(sp)
    sp.set_defaults(func=cmd_member)

    sp = sub.add_parser("energy", help="average energy of the K shortest members")
    sp.add_argument("--lattice", required=True)
    sp.add_argument("--K", dest="k", required=True, help="code size(s), comma-separated")
    sp.add_argument("--offset", action="store_true", help="use the half-integer coset")
    sp.add_argument("--output", default=None)
    sp.add_argument("--no-plot", action="store_true")
    sp.set_defaults(func=cmd_energy)

    sp = sub.add_parser("rate", help="data rate in bits per channel use")
    sp.add_argument("--lattice", required=True)
    sp.add_argument("--Q", dest="q", type=int, required=True)
    add_format(sp)
    sp.set_defaults(func=cmd_rate)

    sp = sub.add_parser("simulate", help="Monte-Carlo BLER sweep from a JSON config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--output", required=True, help="CSV path; metadata written alongside")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--no-plot", action="store_true")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("profile", help="decoder complexity vs channel sensitivity")
    sp.add_argument("--config", required=True)
    sp.add_argument("--output", required=True)
    sp.add_argument("--bins", type=int, default=10)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--no-plot", action="store_true")
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("dmt", help="diversity-multiplexing tradeoff bound")
    sp.add_argument("--family", required=True)
    sp.add_argument("--r", type=float, default=None)
    sp.add_argument("--grid", default=None, help="start:stop:step")
    sp.add_argument("--output", default=None)
    sp.add_argument("--no-plot", action="store_true")
    add_format(sp)
    sp.set_defaults(func=cmd_dmt)

    sp = sub.add_parser("decode-trace", help="sphere-decode one instance with a search trace")
    sp.add_argument("--instance", required=True, help="JSON instance file")
    sp.set_defaults(func=cmd_decode_trace)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) is not None and getattr(args, "threads", 1) < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
