"""Batch command-line interface.

Data goes to standard output or files, diagnostics to standard error.
Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from importlib import resources
from pathlib import Path

from .scale import ScaleIntegrationError
from .scenario import (
    ConfigError,
    StageError,
    SweepSpec,
    emit_figures,
    load_scenario,
    parse_scenario,
    run_scenario,
    run_sweep,
    write_comparison,
)
from .trap import coupling_matrix, critical_scale, mode_spectrum, solve_equilibrium

log = logging.getLogger("phonon_pairs")

#: peak-confinement sweep of the comparison figure, MHz
FIG3_RANGE = "0.3:0.8:11"


def shipped_config(name: str = "mg25_collision"):
    path = resources.files("phonon_pairs") / "configs" / f"{name}.cfg"
    return parse_scenario(path.read_text(), base_dir=Path(str(path)).parent)


def _dump(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=False, default=_json_default)
    sys.stdout.write("\n")


def _json_default(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if hasattr(x, "tolist"):
        return x.tolist()
    raise TypeError(type(x).__name__)


def _equilibrium(s) -> dict:
    chain = solve_equilibrium(s.trap)
    spec = mode_spectrum(coupling_matrix(chain))
    top = float(max(spec.eigenvalues[-1], 0.0))
    b_crit = critical_scale(s.trap, top) if top > 0 else 0.0
    return {
        "name": s.name,
        "n_ions": s.trap.n_ions,
        "positions_um": [float(x) * 1e6 for x in chain.positions],
        "separation_um": chain.separation * 1e6,
        "gamma_m3_per_s2": chain.gamma,
        "omega_kappa_over_2pi_MHz": [float(w) / (2 * math.pi) / 1e6 for w in spec.frequencies],
        "critical_scale": b_crit,
        "critical_distance_um": b_crit * chain.separation * 1e6,
    }


def cmd_equilibrium(args) -> int:
    _dump(_equilibrium(load_scenario(args.config)))
    return 0


def _outdir(args, s) -> Path:
    if args.out is not None:
        return Path(args.out)
    d = s.output_dir
    return d if d.is_absolute() else s.base_dir / d


def cmd_simulate(args) -> int:
    s = load_scenario(args.config)
    r = run_scenario(s)
    for note in r.notes:
        log.warning(note)
    for p in emit_figures(r, _outdir(args, s)):
        log.info("wrote %s", p)
    _dump(r.summary())
    return 0


def cmd_sweep(args) -> int:
    s = load_scenario(args.config)
    spec = SweepSpec.from_range(args.param, args.range)
    table = run_sweep(s, spec, workers=args.workers)
    for i, row in enumerate(table.rows):
        if row["error"]:
            log.warning("row %d (%s = %g): %s", i, args.param, row["value"], row["error"])
    text = table.to_csv()
    if args.out is not None:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text)
    if args.figures is not None and args.param == "pulse.omega_ax_max":
        log.info("wrote %s", write_comparison(table, args.figures))
    return 0


def cmd_entangle(args) -> int:
    s = load_scenario(args.config)
    if args.n_th < 0:
        raise ConfigError("--n-th must be non-negative")
    values = {k: v for k, v in s.values.items() if k != "thermal.temperature"}
    values["thermal.n_th"] = args.n_th
    values["analysis.entanglement"] = True
    values["analysis.bogoliubov"] = True
    from .scenario import build_scenario

    r = run_scenario(build_scenario(values, base_dir=s.base_dir))
    if r.entanglement is None:
        raise ConfigError("; ".join(r.notes) or "entanglement analysis unavailable")
    out = r.summary()["entanglement"]
    out["xi_minus_abs"] = abs(r.modes[1].xi)
    out["beta_sq_minus"] = r.modes[1].beta_sq
    _dump(out)
    return 0


def cmd_reproduce(args) -> int:
    s = shipped_config()
    outdir = Path(args.out)
    if args.target in ("fig1", "fig2"):
        r = run_scenario(s)
        paths = emit_figures(r, outdir)
        keep = "fig_wax.csv" if args.target == "fig1" else "fig_delta_x.csv"
        for p in paths:
            if p.name == keep:
                log.info("wrote %s", p)
            else:
                p.unlink()
        log.info("ramp duration fixed at 0.5 us (cosine ramps on omega_ax^2)")
    elif args.target == "fig3":
        table = run_sweep(s, SweepSpec.from_range("pulse.omega_ax_max", FIG3_RANGE), workers=args.workers)
        for row in table.rows:
            if row["error"]:
                log.warning("omega_ax_max = %g MHz: %s", row["value"], row["error"])
        log.info("wrote %s", write_comparison(table, outdir))
    else:
        r = run_scenario(s)
        _dump(
            {
                "delta_x_eq_um": r.separation * 1e6,
                "beta_sq_minus_numeric": r.beta_sq_numeric,
                "beta_sq_minus_p1p2": r.p1p2_beta_sq,
                "b_min": r.b_min[1],
                "ramp_us": s.values.get("pulse.ramp", 0.5e-6) * 1e6,
            }
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phonon-pairs", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("equilibrium", help="equilibrium positions and mode frequencies")
    e.add_argument("config")
    e.set_defaults(func=cmd_equilibrium)

    s = sub.add_parser("simulate", help="run one scenario and write figure tables")
    s.add_argument("config")
    s.add_argument("--out", help="output directory (default: output.dir of the config)")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="sweep one numeric parameter")
    w.add_argument("config")
    w.add_argument("--param", required=True, help="dotted key, e.g. pulse.omega_ax_max")
    w.add_argument("--range", required=True, help="start:stop:count[:log] in MHz / us / uK")
    w.add_argument("--out", help="write the table here instead of standard output")
    w.add_argument("--figures", help="directory for fig_comparison.csv (omega_ax_max sweeps)")
    w.add_argument("--workers", type=int, default=None, help="parallel processes")
    w.set_defaults(func=cmd_sweep)

    n = sub.add_parser("entangle", help="entanglement verdict at a given thermal occupation")
    n.add_argument("config")
    n.add_argument("--n-th", type=float, required=True, dest="n_th")
    n.set_defaults(func=cmd_entangle)

    r = sub.add_parser("reproduce", help="regenerate a figure table or the headline numbers")
    r.add_argument("target", choices=("fig1", "fig2", "fig3", "headline"))
    r.add_argument("--out", default="out", help="output directory for figure tables")
    r.add_argument("--workers", type=int, default=None)
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        return args.func(args)
    except (StageError, ScaleIntegrationError, ArithmeticError) as exc:
        log.error("numerical failure: %s", exc)
        return 2
    except (ConfigError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1
    except RuntimeError as exc:
        log.error("numerical failure: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
