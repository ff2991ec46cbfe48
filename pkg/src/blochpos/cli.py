"""Command-line front end: sweeps and figure-ready CSV/JSON artifacts.

Subcommands
    bands        diagonalize over the zone grid, write the band-table file
    lambda       Lambda(z) columns for a list of cosine couplings
    supp-sweep   sup P_+ over a coupling sweep with both asymptotics
    ppos         P_+(t) time series for a configured packet
    oracle-check independent real-space recomputation of P_+
    convergence  full truncation check (M vs 2M) for the configured run

Every output file starts with one JSON metadata line carrying the tool
version, the config hash and the numerical conventions (step convention at
z = 0, eigenvector gauge), followed by a CSV header and data rows. Floats
are written with repr, so identical configs produce byte-identical files.

Exit codes: 0 success, 2 config error, 3 precondition violation,
4 numerical failure, 5 self-check disagreement.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ._version import __version__
from .bands import (
    GAUGE_RULE,
    BrillouinGrid,
    check_convergence,
    compute_bands,
    save_band_table,
)
from .config import RunConfig, load_config
from .errors import BlochPosError, ConfigError, SelfCheckError
from .oracle import direct_p_plus
from .positivity import (
    asympt_strong,
    asympt_weak,
    cosine_sup_report,
    lambda_table,
    p_plus_multiband,
    sup_at_first_positive_z,
)
from .potential import cosine_for_strength
from .wavepacket import amplitude_from_config, amplitude_from_csv

CONVENTIONS = {
    "theta_at_zero": "right limit: the z=0 row stores Lambda(0+)",
    "gauge": GAUGE_RULE,
    "units": "dimensionless: z = kappa/q, energies in units of (hbar q)^2/(2 mu)",
}


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def _metadata(command: str, cfg: RunConfig, columns, extra=None) -> dict:
    meta = {
        "tool": "blochpos",
        "version": __version__,
        "command": command,
        "config_sha256": cfg.config_sha256,
        "conventions": CONVENTIONS,
        "columns": list(columns),
    }
    if extra:
        meta.update(extra)
    return meta


def _write_rows(path: str, meta: dict, columns, rows):
    lines = [json.dumps(meta, sort_keys=True, separators=(",", ":"))]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _out_dir(args, cfg: RunConfig) -> str:
    out = args.out or cfg.output_dir or "."
    os.makedirs(out, exist_ok=True)
    return out


def _sweep_map(fn, items, workers: int):
    """Map a worker over sweep elements, results in input order."""
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _build_amplitude(cfg: RunConfig, grid: BrillouinGrid):
    block = cfg.require("amplitude")
    if "csv" in block:
        return amplitude_from_csv(grid, block["csv"])
    return amplitude_from_config(grid, block)


def _table_for_packet(cfg: RunConfig, amp):
    j_max = max(cfg.solver.j_max, max(amp.bands))
    return compute_bands(cfg.require("potential"), cfg.grid, j_max, cfg.solver.M)


# --- workers (module level so process pools can pickle them) ---------------


def _lambda_point(args):
    alpha, count, delta_z, M = args
    grid = BrillouinGrid(count=count, delta_z=delta_z)
    bt = compute_bands(cosine_for_strength(alpha), grid, 0, M)
    return (
        lambda_table(bt, 0),
        bool(sup_at_first_positive_z(bt, 0)),
    )


def _supp_point(args):
    alpha, M = args
    rep = cosine_sup_report(alpha, M)
    return (
        rep.alpha,
        rep.value,
        asympt_strong(rep.alpha),
        asympt_weak(rep.alpha),
        rep.f00,
        rep.symmetry_residual,
    )


# --- subcommands ------------------------------------------------------------


def cmd_bands(args, cfg: RunConfig) -> int:
    p = cfg.require("potential")
    bt = compute_bands(p, cfg.grid, cfg.solver.j_max, cfg.solver.M, workers=args.workers)
    out = args.bands_out or os.path.join(_out_dir(args, cfg), "bands.csv")
    save_band_table(bt, out)
    # quick truncation summary on a thinned grid; the `convergence`
    # subcommand runs the full-grid version
    sub = BrillouinGrid(count=min(41, cfg.grid.count), delta_z=cfg.grid.delta_z)
    report = check_convergence(p, sub, cfg.solver.j_max, cfg.solver.M)
    print(f"wrote {out}")
    print(report.summary() + " (thinned grid)")
    return 0


def cmd_lambda(args, cfg: RunConfig) -> int:
    alphas = cfg.require("sweep")
    jobs = [(float(a), cfg.grid.count, cfg.grid.delta_z, cfg.solver.M) for a in alphas]
    results = _sweep_map(_lambda_point, jobs, args.workers)
    columns = ["alpha", "z", "lambda"]
    rows = []
    flags = {}
    for (alpha, *_), (lam, flag) in zip(jobs, results):
        flags[repr(alpha)] = flag
        for z, lv in zip(cfg.grid.z_values, lam):
            rows.append((alpha, z, lv))
    out = os.path.join(_out_dir(args, cfg), "lambda.csv")
    meta = _metadata("lambda", cfg, columns, extra={"sup_at_first_positive_z": flags})
    _write_rows(out, meta, columns, rows)
    print(f"wrote {out}")
    return 0


def cmd_supp(args, cfg: RunConfig) -> int:
    alphas = cfg.require("sweep")
    jobs = [(float(a), cfg.solver.M) for a in alphas]
    rows = _sweep_map(_supp_point, jobs, args.workers)
    columns = ["alpha", "sup_p", "asympt_strong", "asympt_weak", "f00", "symmetry_residual"]
    out = os.path.join(_out_dir(args, cfg), "supp.csv")
    _write_rows(out, _metadata("supp-sweep", cfg, columns), columns, rows)
    print(f"wrote {out}")
    return 0


def cmd_ppos(args, cfg: RunConfig) -> int:
    times = cfg.require("times")
    amp = _build_amplitude(cfg, cfg.grid)
    bt = _table_for_packet(cfg, amp)
    report = p_plus_multiband(bt, amp, times)
    columns = ["t", "p_plus", "p_bar", "p_tilde"]
    rows = [
        (t, pp, report.p_bar, pt)
        for t, pp, pt in zip(report.times, report.p_plus, report.p_tilde)
    ]
    out = os.path.join(_out_dir(args, cfg), "ppos.csv")
    extra = {"lambda_max": report.lambda_max, "lambda_argmax": report.lambda_argmax}
    _write_rows(out, _metadata("ppos", cfg, columns, extra=extra), columns, rows)
    print(f"wrote {out}")
    if args.self_check:
        picks = sorted(set([0, len(times) // 2, len(times) - 1]))
        for i in picks:
            ocfg = cfg.oracle
            ocfg = type(ocfg)(window=ocfg.window, samples_log2=ocfg.samples_log2, t=float(times[i]))
            orep = direct_p_plus(bt, amp, ocfg)
            if abs(orep.p_direct - report.p_plus[i]) > 1e-4:
                raise SelfCheckError(
                    f"oracle disagrees at t={times[i]!r}: direct {orep.p_direct!r} "
                    f"vs spectral {report.p_plus[i]!r}"
                )
        print(f"self-check passed at {len(picks)} times")
    return 0


def cmd_oracle_check(args, cfg: RunConfig) -> int:
    amp = _build_amplitude(cfg, cfg.grid)
    bt = _table_for_packet(cfg, amp)
    rep = direct_p_plus(bt, amp, cfg.oracle)
    payload = {
        "p_direct": rep.p_direct,
        "p_spectral": rep.p_spectral,
        "abs_diff": rep.abs_diff,
        "window": rep.window,
        "samples": rep.samples,
        "deficit": rep.deficit,
        "t": rep.t,
    }
    text = json.dumps(payload, sort_keys=True)
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "oracle.json"), "w", newline="\n") as fh:
            fh.write(text + "\n")
    return 0


def cmd_convergence(args, cfg: RunConfig) -> int:
    report = check_convergence(
        cfg.require("potential"),
        cfg.grid,
        cfg.solver.j_max,
        cfg.solver.M,
        workers=args.workers,
    )
    print(report.summary())
    return 0


_COMMANDS = {
    "bands": cmd_bands,
    "lambda": cmd_lambda,
    "supp-sweep": cmd_supp,
    "ppos": cmd_ppos,
    "oracle-check": cmd_oracle_check,
    "convergence": cmd_convergence,
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blochpos",
        description="Band structure and momentum positivity of Bloch wave packets",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="TOML or JSON config path, '-' for stdin")
        sp.add_argument("--out", default=None, help="output directory (default '.')")
        sp.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
        if name == "ppos":
            sp.add_argument("--self-check", action="store_true", dest="self_check")
        if name == "bands":
            sp.add_argument("--bands-out", default=None, dest="bands_out")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {args.workers}")
        return _COMMANDS[args.command](args, cfg)
    except BlochPosError as exc:
        print(f"error[{exc.slug}]: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
