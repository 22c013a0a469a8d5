"""Command line entry point: ``galton-dnp {board,sweep,map,ratchet,oracle-check}``.

Exit codes: 0 success, 1 invalid input, 2 a numerical check failed.  The
whole config is validated before anything is computed or written, and output
files are replaced atomically, so a failed run never leaves partial output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import replace
from typing import Optional

import numpy as np

from . import _kernels
from .analytic import (
    BinomialParams,
    RatchetParams,
    binomial_forward,
    binomial_polarization,
    binomial_reverse,
    ratchet_net,
    ratchet_single_sweep,
    ratchet_step,
)
from .checkerboard import (
    TunnelingTable,
    board_records,
    build_checkerboard,
    tunneling_table,
    uniform_table,
    verify_symmetries,
)
from .config import FORMATS, ConfigError, RunConfig, load_config
from .oracle import MAX_ORACLE_NUCLEI, brute_force_traversal, max_deviation
from .spectral_map import dos_records, place_levels_by_dos, profile_records, scan_profile, symmetric_centers
from .traversal import (
    DIRECTIONS,
    DegenerateBoardError,
    accumulate,
    mixed_state,
    polarization,
    population_records,
    propagate,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CHECK = 2

ORACLE_TOLERANCE = 1e-10
DEFAULT_ORACLE_TABLES = 20
DEFAULT_BINOMIAL_NUCLEI = 4


class CheckFailed(RuntimeError):
    """A numerical self-check failed; carries the records computed so far."""

    def __init__(self, message: str, records: list, summary: dict):
        super().__init__(message)
        self.records = records
        self.summary = summary


def _format_value(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return value


def render(records: list, summary: dict, fmt: str, command: str) -> str:
    if fmt == "json":
        def clean(v):
            return None if isinstance(v, float) and not math.isfinite(v) else v

        payload = {
            "command": command,
            "records": [{k: clean(v) for k, v in r.items()} for r in records],
            "summary": {k: clean(v) for k, v in summary.items()},
        }
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    if records:
        writer = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
        writer.writeheader()
        for row in records:
            writer.writerow({k: _format_value(v) for k, v in row.items()})
    return buf.getvalue()


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".galton_dnp-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _require_system(cfg: RunConfig, command: str):
    if cfg.system is None:
        raise ConfigError(f"system: the {command} command needs a system group")
    return cfg.system


def _table_for(board, cfg: RunConfig, required: bool = True) -> Optional[TunnelingTable]:
    settings = cfg.sweep
    if settings.eta is not None:
        return uniform_table(board, settings.eta, settings.large_gap)
    if settings.spec.rate is not None:
        return tunneling_table(board, settings.spec.rate)
    if required:
        raise ConfigError("sweep.eta: give sweep.eta (uniform table) or sweep.rate (Landau-Zener table)")
    return None


def cmd_board(cfg: RunConfig, args) -> tuple:
    board = build_checkerboard(_require_system(cfg, "board"))
    table = _table_for(board, cfg, required=False)
    report = verify_symmetries(board)
    summary = {
        "size": board.size,
        "center_frequency": float(board.center[0]),
        "coord_violation": report.coord_violation,
        "gap_violation": report.gap_violation,
        "symmetry_ok": report.ok,
    }
    records = board_records(board, table)
    if not report.ok:
        raise CheckFailed(f"board symmetry violated by {report.max_violation:.3e}", records, summary)
    return records, summary


def cmd_sweep(cfg: RunConfig, args) -> tuple:
    system = _require_system(cfg, "sweep")
    board = build_checkerboard(system)
    table = _table_for(board, cfg)
    spec = cfg.sweep.spec
    initial = mixed_state(board)
    if spec.n_sweeps > 1 or spec.t_total is not None:
        pops = accumulate(board, table, spec, initial)
    else:
        pops = propagate(board, table, spec, initial)
    sign = "a_par_negative" if system.a_par and system.a_par[0] < 0 else "a_par_positive"
    summary = {
        "direction": spec.direction,
        "total_population": pops.total,
        # unit population per nuclear state, as in the single-nucleus closed form
        "polarization": polarization(pops, sign) * board.size / pops.total,
        "polarization_fraction": polarization(pops, sign) / pops.total,
        "backend": _kernels.BACKEND,
    }
    return population_records(pops, system.n_nuclei), summary


def _map_board(cfg: RunConfig):
    system = _require_system(cfg, "map")
    p_exp = system.model.p_exp if system.model is not None else 1.1
    return place_levels_by_dos(system.n_nuclei, cfg.dos, p_exp)


def cmd_map(cfg: RunConfig, args) -> tuple:
    board = _map_board(cfg)
    scan = cfg.scan
    bandwidths = scan.bandwidths or ((cfg.sweep.spec.bandwidth,) if cfg.sweep.spec.bandwidth else ())
    if not bandwidths:
        raise ConfigError("scan.bandwidths: give scan.bandwidths or sweep.bandwidth")
    mid = 0.5 * (scan.center_min + scan.center_max)
    half = 0.5 * (scan.center_max - scan.center_min)
    centers = symmetric_centers(mid, half, scan.n_centers)
    records = []
    for bandwidth in bandwidths:
        profile = scan_profile(board, bandwidth, centers, DIRECTIONS, eta=scan.eta, threads=args.threads)
        records.extend(profile_records(profile))
    summary = {"size": board.size, "n_centers": scan.n_centers, "bandwidths": len(bandwidths)}
    if args.dos_out:
        _write_atomic(args.dos_out, render(dos_records(board, cfg.dos), {}, args.format, "dos"))
    return records, summary


def cmd_ratchet(cfg: RunConfig, args) -> tuple:
    settings = cfg.ratchet
    spec = cfg.sweep.spec
    sign = 1
    n_nuclei = DEFAULT_BINOMIAL_NUCLEI
    if cfg.system is not None:
        sign = -1 if cfg.system.a_par[0] < 0 else 1
        n_nuclei = cfg.system.n_nuclei
    params = RatchetParams(
        settings.eta_small,
        settings.eta_large,
        w_l=spec.w_l if spec.w_l is not None else math.inf,
        omega_r=spec.omega_r if spec.omega_r is not None else 1.0,
        t_total=spec.t_total if spec.t_total is not None else 1.0,
        a_par_sign=sign,
    )
    records = [
        {"quantity": "single_sweep_polarization", "n": 0, "value": ratchet_single_sweep(params)},
        {"quantity": "net_polarization", "n": 0, "value": ratchet_net(params)},
    ]
    if sign > 0:
        down_to_down, _ = ratchet_step(params, 1.0, 0.0)
        up_to_down, _ = ratchet_step(params, 0.0, 1.0)
        records.append({"quantity": "step_down_to_down", "n": 0, "value": down_to_down})
        records.append({"quantity": "step_up_to_down", "n": 0, "value": up_to_down})
    binomial = BinomialParams(n_nuclei, settings.p_down, 1.0 - settings.p_down)
    forward = binomial_forward(binomial)
    reverse = binomial_reverse(binomial)
    for name, pops in (("binomial_forward", forward), ("binomial_reverse", reverse)):
        for n, value in enumerate(pops):
            records.append({"quantity": name, "n": n + 1, "value": float(value)})
    summary = {
        "n_nuclei": n_nuclei,
        "binomial_polarization_forward": binomial_polarization(forward),
        "binomial_polarization_reverse": binomial_polarization(reverse),
    }
    return records, summary


def cmd_oracle_check(cfg: RunConfig, args) -> tuple:
    system = _require_system(cfg, "oracle-check")
    if system.n_nuclei > MAX_ORACLE_NUCLEI:
        raise ConfigError(
            f"system.n_nuclei: oracle-check enumerates every path and is limited to "
            f"{MAX_ORACLE_NUCLEI} nuclei, got {system.n_nuclei}"
        )
    board = build_checkerboard(system)
    rng = np.random.default_rng(args.seed if args.seed is not None else cfg.seed)
    initial = mixed_state(board)
    records = []
    worst = 0.0
    for index in range(args.tables):
        table = TunnelingTable(rng.uniform(0.0, 1.0, (board.size, board.size)))
        engine_table = table
        if args.corrupt_eta:
            eta = table.eta.copy()
            eta[0, 0] = 1.0 - eta[0, 0]
            engine_table = TunnelingTable(eta)
        for direction in DIRECTIONS:
            spec = replace(cfg.sweep.spec, direction=direction)
            fast = propagate(board, engine_table, spec, initial, allow_degenerate=True)
            slow = brute_force_traversal(board, table, initial, spec)
            deviation = max_deviation(fast, slow)
            worst = max(worst, deviation)
            records.append({"table": index, "direction": direction, "max_deviation": deviation})
    summary = {"tables": args.tables, "max_deviation": worst, "tolerance": ORACLE_TOLERANCE}
    if not worst <= ORACLE_TOLERANCE:
        raise CheckFailed(f"engine and oracle differ by {worst:.3e}", records, summary)
    return records, summary


COMMANDS = {
    "board": cmd_board,
    "sweep": cmd_sweep,
    "map": cmd_map,
    "ratchet": cmd_ratchet,
    "oracle-check": cmd_oracle_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=FORMATS, help="output format (default: config or csv)")
    common.add_argument("--seed", type=int, help="overrides the config seed")
    common.add_argument("--threads", type=int, default=1, help="worker threads for independent scan points")

    parser = argparse.ArgumentParser(prog="galton-dnp", description="Landau-Zener crossing board for central-spin DNP")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("board", parents=[common], help="crossing table and symmetry report")
    sub.add_parser("sweep", parents=[common], help="populations after a sweep from the mixed state")
    map_parser = sub.add_parser("map", parents=[common], help="polarisation against window centre")
    map_parser.add_argument("--dos-out", help="also write the placed levels and their DOS here")
    sub.add_parser("ratchet", parents=[common], help="single-nucleus ratchet and binomial closed forms")
    oracle = sub.add_parser("oracle-check", parents=[common], help="compare the engine with path enumeration")
    oracle.add_argument("--tables", type=int, default=DEFAULT_ORACLE_TABLES, help="random eta tables to check")
    # perturbs the engine's copy of eta; used to test that the check can fail
    oracle.add_argument("--corrupt-eta", action="store_true", help=argparse.SUPPRESS)
    return parser


def _emit(records: list, summary: dict, fmt: str, command: str, out: Optional[str]) -> None:
    text = render(records, summary, fmt, command)
    if out:
        _write_atomic(out, text)
        summary_stream = sys.stdout
    else:
        sys.stdout.write(text)
        summary_stream = sys.stderr
    if fmt == "csv":
        for key, value in summary.items():
            print(f"{key}: {_format_value(value)}", file=summary_stream)


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = args.out
    try:
        if args.threads < 1:
            raise ConfigError(f"--threads: must be at least 1, got {args.threads}")
        if getattr(args, "tables", 1) < 1:
            raise ConfigError(f"--tables: must be at least 1, got {args.tables}")
        cfg = load_config(args.config) if args.config else RunConfig()
        fmt = args.format or cfg.output.format
        args.format = fmt
        out = args.out or cfg.output.path
        records, summary = COMMANDS[args.command](cfg, args)
    except CheckFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        _emit(exc.records, exc.summary, args.format or "csv", args.command, out)
        return EXIT_CHECK
    except (ConfigError, DegenerateBoardError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(records, summary, fmt, args.command, out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
