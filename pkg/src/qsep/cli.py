"""Command-line front end: ``qsep {fig1,fig2,fig3,report,selftest}``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, Optional

from .errors import QsepError
from .selftest import run_selftest
from .experiments import (
    RUNNERS,
    BlochPoint,
    GridResult,
    default_config,
    dump_json,
    run_report,
)

log = logging.getLogger("qsep")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

SCENARIO_OF = {
    "fig1": "fig1_diff",
    "fig2": "fig2_fixedpoint",
    "fig3": "fig3_tauxi",
    "report": "report",
}

# config-file keys, identical to the long flag names without dashes
FILE_KEYS = {
    "xi-pop": "xi_pop", "phi": "phi", "n": "n", "gamma": "gamma", "tau": "tau",
    "rho": "rho", "grid": "grid", "radius-clip": "radius_clip", "out": "out",
    "format": "format", "threads": "threads", "variant-reverse": "variant_reverse",
}


class ConfigError(ValueError):
    pass


def read_config_file(path: str) -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, val = (s.strip() for s in line.split("=", 1))
        else:
            key, _, val = line.partition(" ")
            val = val.strip()
        key = key.lstrip("-")
        if key not in FILE_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[FILE_KEYS[key]] = val
    return values


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on", ""):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--xi-pop", dest="xi_pop", help="<0|xi|0> of the ancilla state")
    common.add_argument("--phi", help="collision angle in radians")
    common.add_argument("--n", help="comma-separated numbers of collisions")
    common.add_argument("--gamma", help="prior Bloch vector x,y,z or 'xi'")
    common.add_argument("--tau", help="reverse input: x,y,z | output | xi")
    common.add_argument("--rho", help="initial Bloch vector x,y,z (report)")
    common.add_argument("--grid", help="points per axis")
    common.add_argument("--radius-clip", dest="radius_clip", help="skip points beyond this Bloch radius")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--threads", help="worker threads for grid evaluation")
    common.add_argument(
        "--variant-reverse", dest="variant_reverse", action="store_const", const="true",
        help="use the rotated reverse factor instead of the Petz one",
    )
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="qsep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("fig1", "difference between the two average definitions"),
        ("fig2", "averages with prior at the fixed point and tau = N^n(rho)"),
        ("fig3", "average with tau = xi and a rotated prior"),
        ("report", "Jarzynski, Crooks and superadditivity for one instance"),
        ("selftest", "randomized identity checks"),
    ):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if name == "selftest":
            sp.add_argument("--seed", type=int, default=0)
    return parser


def _merged(args: argparse.Namespace) -> Dict[str, str]:
    values = read_config_file(args.config) if args.config else {}
    for key in FILE_KEYS.values():
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    return values


def config_from_values(command: str, values: Dict[str, str]):
    overrides = {}
    try:
        if "xi_pop" in values:
            overrides["xi_population"] = float(values["xi_pop"])
        if "phi" in values:
            overrides["phi"] = float(values["phi"])
        if "n" in values:
            overrides["n_values"] = tuple(int(v) for v in str(values["n"]).split(","))
        if "gamma" in values:
            g = values["gamma"].strip()
            overrides["gamma_bloch"] = None if g == "xi" else BlochPoint.parse(g)
        if "tau" in values:
            t = values["tau"].strip()
            if t in ("output", "xi"):
                overrides["tau_mode"], overrides["tau_bloch"] = t, None
            else:
                overrides["tau_mode"], overrides["tau_bloch"] = "explicit", BlochPoint.parse(t)
        if "rho" in values:
            overrides["rho_bloch"] = BlochPoint.parse(values["rho"])
        if "grid" in values:
            overrides["grid_resolution"] = int(values["grid"])
        if "radius_clip" in values:
            overrides["radius_clip"] = float(values["radius_clip"])
        if "threads" in values:
            overrides["threads"] = int(values["threads"])
        if "variant_reverse" in values:
            overrides["variant"] = _bool(values["variant_reverse"])
        return default_config(SCENARIO_OF[command], **overrides)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _write(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _panel_path(out: str, panel: str, many: bool) -> str:
    if not many:
        return out
    p = Path(out)
    return str(p.with_name(f"{p.stem}_{panel}{p.suffix or '.csv'}"))


def write_panels(panels: Dict[str, GridResult], out: Optional[str], fmt: str) -> None:
    if fmt == "json":
        _write(dump_json(panels) + "\n", out)
        return
    many = len(panels) > 1
    for name, grid in panels.items():
        if out:
            _write(grid.to_csv(), _panel_path(out, name, many))
        else:
            if many:
                sys.stdout.write(f"# panel: {name}\n")
            sys.stdout.write(grid.to_csv())


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "selftest":
        return EXIT_OK if run_selftest(args.seed) else EXIT_NUMERIC

    try:
        values = _merged(args)
        config = config_from_values(args.command, values)
        fmt = values.get("format") or ("json" if args.command == "report" else "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {fmt!r}")
    except (ConfigError, QsepError, OSError) as exc:
        print(f"qsep: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = values.get("out")
    if args.command == "report":
        try:
            report = run_report(config)
        except QsepError as exc:
            print(f"qsep: numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        _write(json.dumps(report, indent=1) + "\n", out)
        return EXIT_OK

    log.info("running %s with %s", args.command, config)
    panels = RUNNERS[config.scenario](config)
    write_panels(panels, out, fmt)
    flagged = max(g.flagged for g in panels.values())
    if flagged:
        print(f"qsep: {flagged} singular grid points flagged", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
