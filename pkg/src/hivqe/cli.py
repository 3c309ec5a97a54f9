"""Command-line entry point: run, fci, sweep and report subcommands.

Heavy imports happen inside main() so that HIVQE_THREADS can cap the BLAS
thread pools before numpy initializes them.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

ERROR_FLOOR = 1e-16  # log-scale display floor for exact-method errors


def _apply_thread_cap() -> None:
    threads = os.environ.get("HIVQE_THREADS")
    if threads:
        for var in (
            "OMP_NUM_THREADS",
            "OPENBLAS_NUM_THREADS",
            "MKL_NUM_THREADS",
            "NUMEXPR_NUM_THREADS",
        ):
            os.environ.setdefault(var, threads)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hivqe",
        description="Selected CI driven by a simulated symmetry-sector sampler",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full iteration loop")
    run.add_argument("--fcidump", required=True, help="FCIDUMP integral file")
    run.add_argument("--config", help="flat JSON file with run options")
    run.add_argument("--dipole", help="dipole-integral sidecar file")
    run.add_argument("--out", default=".", help="output directory")
    run.add_argument("--seed", type=int, help="master seed override")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="config override (repeatable)")

    fci = sub.add_parser("fci", help="exact full-sector diagonalization")
    fci.add_argument("--fcidump", required=True)
    fci.add_argument("--count-only", action="store_true",
                     help="print the sector size without solving")
    fci.add_argument("--limit", type=int, default=None,
                     help="largest sector the oracle will solve")

    sweep = sub.add_parser("sweep", help="run one geometry per manifest line")
    sweep.add_argument("--manifest", required=True,
                       help="text file: label fcidump_path [reference_energy]")
    sweep.add_argument("--config", help="flat JSON file with run options")
    sweep.add_argument("--out", default=".", help="output directory")
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE")

    report = sub.add_parser("report", help="aggregate result.json files")
    report.add_argument("results", nargs="+", help="result.json paths")
    report.add_argument("--ref", type=float, default=None,
                        help="reference energy for the error column")
    report.add_argument("--out", default=".", help="output directory")
    return parser


def _coerce(field_name: str, raw: str, field_types: dict):
    kind = field_types.get(field_name)
    if kind is None:
        raise ValueError(f"unknown config key {field_name!r}")
    if kind is bool:
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ValueError(f"{field_name} expects a boolean, got {raw!r}")
    return kind(raw)


def _load_config(args):
    """Defaults < config file < --seed < --set, in that order."""
    from .driver import RunConfig

    data = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_data = json.load(fh)
        if not isinstance(file_data, dict):
            raise ValueError("config file must hold a JSON object")
        data.update(file_data)
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    field_types = {
        name: f.type if isinstance(f.type, type) else {
            "int": int, "float": float, "str": str, "bool": bool
        }[f.type]
        for name, f in RunConfig.__dataclass_fields__.items()
    }
    for item in getattr(args, "overrides", []):
        if "=" not in item:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        data[key] = _coerce(key, raw, field_types)
    return RunConfig.from_dict(data)


def _read_integrals(path: str):
    from .integrals import parse_fcidump

    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"FCIDUMP file not found: {path}")
    return parse_fcidump(p.read_text())


def _fmt(value: float) -> str:
    import math

    return "nan" if not math.isfinite(value) else f"{value:.8f}"


def _write_run_outputs(result, out_dir: Path) -> None:
    from .subspace import Subspace, dump_subspace

    out_dir.mkdir(parents=True, exist_ok=True)
    doc = json.dumps(result.result_dict(), indent=2, sort_keys=True) + "\n"
    (out_dir / "result.json").write_text(doc)

    lines = [
        "iter,E_cum,E_iter,n_dets_sampled,n_dets_valid,n_dets_cum,"
        "n_dets_post_screen,wall_ms_sample,wall_ms_diag,theta_norm,e_plus,e_minus"
    ]
    for r in result.trace:
        lines.append(
            f"{r.iteration},{_fmt(r.e_cum)},{_fmt(r.e_iter)},{r.n_dets_sampled},"
            f"{r.n_dets_valid},{r.n_dets_cum},{r.n_dets_post_screen},"
            f"{r.wall_ms_sample:.3f},{r.wall_ms_diag:.3f},"
            f"{_fmt(r.theta_norm)},{_fmt(r.e_plus)},{_fmt(r.e_minus)}"
        )
    (out_dir / "trace.csv").write_text("\n".join(lines) + "\n")

    if result.dets:
        sub = Subspace(result.dets, result.sector)
        (out_dir / "subspace.txt").write_text(dump_subspace(sub))
    else:
        (out_dir / "subspace.txt").write_text("")


def _cmd_run(args) -> int:
    from .driver import run_hivqe
    from .integrals import parse_dipole_file

    cfg = _load_config(args)
    integrals = _read_integrals(args.fcidump)
    dipole = None
    if args.dipole:
        p = Path(args.dipole)
        if not p.exists():
            raise FileNotFoundError(f"dipole file not found: {args.dipole}")
        dipole = parse_dipole_file(p.read_text(), integrals.n_orb)

    result = run_hivqe(cfg, integrals, dipole)
    _write_run_outputs(result, Path(args.out))
    if result.energy is None:
        print(f"status {result.status} after {result.iterations} iterations")
    else:
        print(
            f"status {result.status}  energy {_fmt(result.energy)} Ha  "
            f"e_corr {_fmt(result.e_corr)} Ha  n_dets {result.n_dets}  "
            f"iterations {result.iterations}"
        )
    return 0 if result.converged else 2


def _cmd_fci(args) -> int:
    from .oracle import ORACLE_SECTOR_LIMIT, fci_ground
    from .sampler import sector_size

    integrals = _read_integrals(args.fcidump)
    size = sector_size(integrals.n_orb, integrals.n_alpha, integrals.n_beta)
    if args.count_only:
        print(json.dumps({"sector_size": size}))
        return 0
    limit = args.limit if args.limit is not None else ORACLE_SECTOR_LIMIT
    if size > limit:
        print(
            f"sector of {size} determinants exceeds the solver limit {limit}; "
            f"use --count-only or raise --limit",
            file=sys.stderr,
        )
        return 1
    res = fci_ground(integrals, limit)
    print(json.dumps({"sector_size": size, "energy": res.energy}))
    return 0


def _cmd_sweep(args) -> int:
    from .driver import run_pes_sweep

    cfg = _load_config(args)
    manifest_path = Path(args.manifest)
    if not manifest_path.exists():
        raise FileNotFoundError(f"manifest not found: {args.manifest}")
    entries = []
    integrals_by_label = {}
    base = manifest_path.parent
    for line in manifest_path.read_text().splitlines():
        tokens = line.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        if len(tokens) not in (2, 3):
            raise ValueError(f"manifest line needs 'label path [e_ref]': {line!r}")
        label, rel = tokens[0], tokens[1]
        e_ref = float(tokens[2]) if len(tokens) == 3 else None
        path = Path(rel)
        if not path.is_absolute():
            path = base / rel
        integrals_by_label[label] = _read_integrals(str(path))
        entries.append((label, e_ref))
    if not entries:
        print("manifest lists no geometries", file=sys.stderr)
        return 1

    rows = run_pes_sweep(entries, cfg, integrals_by_label)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["label,E_hf,E_hivqe,E_ref,abs_error"]
    for row in rows:
        e_ref = "" if row["e_ref"] is None else repr(row["e_ref"])
        err = "" if row["abs_error"] is None else repr(row["abs_error"])
        lines.append(
            f"{row['label']},{row['e_hf']!r},{row['e_hivqe']!r},{e_ref},{err}"
        )
    (out_dir / "pes.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {out_dir / 'pes.csv'} with {len(rows)} points")
    return 0


def _cmd_report(args) -> int:
    rows = []
    for path in args.results:
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"result file not found: {path}")
        doc = json.loads(p.read_text())
        sector = doc.get("sector", {})
        n_orb = sector.get("n_orb")
        rows.append(
            {
                "label": p.stem if p.stem != "result" else p.parent.name,
                "n_qubits": None if n_orb is None else 2 * n_orb,
                "m": doc.get("config", {}).get("m"),
                "n_dets": doc["n_dets"],
                "energy": doc["energy"],
            }
        )
    rows.sort(key=lambda r: (r["n_qubits"] or 0, r["m"] or 0, r["label"]))
    for row in rows:
        if args.ref is None or row["energy"] is None:
            row["abs_error"] = None
        else:
            row["abs_error"] = abs(row["energy"] - args.ref)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["label,n_qubits,m,n_dets,energy,abs_error"]
    for r in rows:
        err = "" if r["abs_error"] is None else repr(r["abs_error"])
        energy = "" if r["energy"] is None else repr(r["energy"])
        lines.append(
            f"{r['label']},{r['n_qubits']},{r['m']},{r['n_dets']},{energy},{err}"
        )
    (out_dir / "report.csv").write_text("\n".join(lines) + "\n")

    # gnuplot data: errors floored so exact hits stay plottable on a log axis
    dat = ["# m n_dets energy abs_error"]
    for r in rows:
        if r["energy"] is None:
            continue
        err = r["abs_error"]
        shown = "" if err is None else repr(max(err, ERROR_FLOOR))
        dat.append(f"{r['m']} {r['n_dets']} {r['energy']!r} {shown}")
    (out_dir / "report.dat").write_text("\n".join(dat) + "\n")
    print(f"wrote {out_dir / 'report.csv'} ({len(rows)} rows)")
    return 0


def main(argv=None) -> int:
    _apply_thread_cap()
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "fci": _cmd_fci,
        "sweep": _cmd_sweep,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # parse/solver/file failures all exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
