"""Collisional-model case studies on the (x, z) plane of the Bloch ball.

Each runner returns a mapping ``panel name -> GridResult``. Rows are ordered
by ``(n, z, x)`` regardless of how many worker threads evaluated them.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .channels import CollisionModel, QuantumChannel, apply, bloch_state, collision_channel
from .entropy import (
    avg_def1,
    avg_def2,
    avg_explicit,
    bs_divergence,
    crooks,
    superadditivity,
    umegaki,
)
from .errors import InvalidParameter, QsepError
from .states import output_operator, q_forward, q_reverse
from . import linalg as la

SCENARIOS = ("fig1_diff", "fig2_fixedpoint", "fig3_tauxi", "report")


class BlochPoint(NamedTuple):
    x: float
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def parse(cls, text: str) -> "BlochPoint":
        parts = [float(v) for v in text.split(",")]
        if len(parts) != 3:
            raise InvalidParameter(f"Bloch vector needs three components, got {text!r}")
        return cls(*parts)

    def state(self) -> np.ndarray:
        return bloch_state(*self)


@dataclass(frozen=True)
class ScenarioConfig:
    """Parameters of one run.

    ``gamma_bloch=None`` means the prior is the ancilla state ``xi``.
    ``tau_mode`` is ``"explicit"`` (use ``tau_bloch``), ``"output"`` (the
    channel output ``E(rho)``) or ``"xi"``.
    """

    scenario: str
    xi_population: float = 0.9
    phi: float = 0.2
    n_values: Tuple[int, ...] = (1,)
    gamma_bloch: Optional[BlochPoint] = None
    tau_mode: str = "output"
    tau_bloch: Optional[BlochPoint] = None
    rho_bloch: Optional[BlochPoint] = None
    grid_resolution: int = 101
    radius_clip: float = 0.999
    variant: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise InvalidParameter(f"unknown scenario {self.scenario!r}")
        if not 0.0 < self.xi_population < 1.0:
            raise InvalidParameter("xi population must lie strictly between 0 and 1")
        if not self.n_values or any(int(n) != n or n < 1 for n in self.n_values):
            raise InvalidParameter("n values must be positive integers")
        if self.tau_mode not in ("explicit", "output", "xi"):
            raise InvalidParameter(f"unknown tau mode {self.tau_mode!r}")
        if self.tau_mode == "explicit" and self.tau_bloch is None:
            raise InvalidParameter("explicit tau mode needs a Bloch vector for tau")
        if self.grid_resolution < 2:
            raise InvalidParameter("grid resolution must be at least 2")
        if not 0.0 < self.radius_clip <= 1.0:
            raise InvalidParameter("radius clip must lie in (0, 1]")
        if self.threads < 1:
            raise InvalidParameter("threads must be positive")
        for p in (self.gamma_bloch, self.tau_bloch, self.rho_bloch):
            if p is not None:
                bloch_state(*p)

    def model(self, n: int) -> CollisionModel:
        return CollisionModel(self.xi_population, self.phi, int(n))

    def gamma(self) -> np.ndarray:
        if self.gamma_bloch is None:
            return self.model(1).xi
        return self.gamma_bloch.state()

    def tau_for(self, channel: QuantumChannel, rho: np.ndarray) -> np.ndarray:
        if self.tau_mode == "explicit":
            return self.tau_bloch.state()
        if self.tau_mode == "xi":
            return self.model(1).xi
        return la.hermitize(apply(channel, rho))


def default_config(scenario: str, **overrides) -> ScenarioConfig:
    """Reference parameters of each scenario, with ``n = 1, 4, 16`` unless overridden."""
    base = {
        "fig1_diff": dict(
            xi_population=0.95, phi=0.4, n_values=(1,),
            gamma_bloch=BlochPoint(0.9, 0.0, 0.0),
            tau_mode="explicit", tau_bloch=BlochPoint(-2 / 3, 0.0, -2 / 3),
        ),
        "fig2_fixedpoint": dict(
            xi_population=0.9, phi=0.2, n_values=(1, 4, 16), gamma_bloch=None, tau_mode="output",
        ),
        "fig3_tauxi": dict(
            xi_population=0.9, phi=0.2, n_values=(1, 4, 16),
            gamma_bloch=BlochPoint(0.8, 0.0, -0.2), tau_mode="xi",
        ),
        "report": dict(
            xi_population=0.9, phi=0.2, n_values=(1,), gamma_bloch=None,
            tau_mode="output", rho_bloch=BlochPoint(0.3, 0.0, 0.4),
        ),
    }[scenario]
    base.update(overrides)
    return ScenarioConfig(scenario=scenario, **base)


class GridRow(NamedTuple):
    x: float
    z: float
    n: int
    value: float
    flags: str = ""


@dataclass
class GridResult:
    rows: List[GridRow] = field(default_factory=list)

    @property
    def flagged(self) -> int:
        return sum(1 for r in self.rows if r.flags)

    def lookup(self) -> Dict[Tuple[float, float, int], GridRow]:
        return {(r.x, r.z, r.n): r for r in self.rows}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "z", "n", "value", "flags"])
        for r in self.rows:
            w.writerow([repr(r.x), repr(r.z), r.n, repr(r.value), r.flags])
        return buf.getvalue()

    def to_records(self) -> list:
        return [r._asdict() for r in self.rows]


def grid_points(resolution: int, radius_clip: float) -> List[Tuple[float, float]]:
    """``(x, z)`` pairs ordered by ``z`` then ``x``, clipped to the given radius."""
    axis = np.linspace(-1.0, 1.0, resolution)
    axis[np.abs(axis) < 1e-15] = 0.0
    return [
        (float(x), float(z))
        for z in axis
        for x in axis
        if math.hypot(x, z) <= radius_clip + 1e-12
    ]


PointFn = Callable[[float, float], Tuple[float, ...]]


def _evaluate(points, fn: PointFn, n_out: int, threads: int) -> List[Tuple[Tuple[float, ...], str]]:
    def one(pt):
        try:
            vals = tuple(float(v) for v in fn(*pt))
        except (QsepError, np.linalg.LinAlgError):
            return (0.0,) * n_out, "singular"
        if not all(math.isfinite(v) for v in vals):
            return (0.0,) * n_out, "singular"
        return vals, ""

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, points, chunksize=64))
    return [one(p) for p in points]


def _sweep(config: ScenarioConfig, panels: Sequence[str], make_fn: Callable[[int], PointFn]):
    points = grid_points(config.grid_resolution, config.radius_clip)
    out = {name: GridResult() for name in panels}
    for n in sorted(config.n_values):
        results = _evaluate(points, make_fn(n), len(panels), config.threads)
        for (x, z), (vals, flags) in zip(points, results):
            for name, v in zip(panels, vals):
                out[name].rows.append(GridRow(x, z, int(n), v, flags))
    return out


def input_term_difference(rho, gamma) -> float:
    return bs_divergence(rho, gamma) - umegaki(rho, gamma)


def output_term_difference(channel, rho, gamma, tau, variant: bool = False) -> float:
    """``Tr[E(rho) log M] - [D(E(rho)||E(gamma)) - D(E(rho)||tau)]`` with ``M`` the reverse factor."""
    e_rho, e_gamma = apply(channel, rho), apply(channel, gamma)
    m = output_operator(channel, gamma, tau, variant)
    t = float(np.trace(e_rho @ la.logm_psd(m)).real)
    return t - (umegaki(e_rho, e_gamma) - umegaki(e_rho, tau))


def run_fig1(config: ScenarioConfig) -> Dict[str, GridResult]:
    """Input-term, output-term and total differences between the two averages."""
    gamma = config.gamma()

    def make(n):
        chan = collision_channel(config.model(n))

        def fn(x, z):
            rho = bloch_state(x, 0.0, z)
            tau = config.tau_for(chan, rho)
            d_in = input_term_difference(rho, gamma)
            d_out = output_term_difference(chan, rho, gamma, tau, config.variant)
            total = avg_explicit(chan, rho, gamma, tau, config.variant) - avg_def1(chan, rho, gamma, tau)
            return d_in, d_out, total

        return fn

    return _sweep(config, ("input", "output", "total"), make)


def run_fig2(config: ScenarioConfig) -> Dict[str, GridResult]:
    """Both averages with the prior at the fixed point and ``tau = N^n(rho)``."""
    gamma = config.gamma()

    def make(n):
        chan = collision_channel(config.model(n))

        def fn(x, z):
            rho = bloch_state(x, 0.0, z)
            tau = config.tau_for(chan, rho)
            return (
                avg_explicit(chan, rho, gamma, tau, config.variant),
                avg_def1(chan, rho, gamma, tau),
            )

        return fn

    return _sweep(config, ("def2", "def1"), make)


def run_fig3(config: ScenarioConfig) -> Dict[str, GridResult]:
    """Operator average with ``tau = xi`` and a prior off the ``xi`` eigenbasis."""
    gamma = config.gamma()

    def make(n):
        chan = collision_channel(config.model(n))

        def fn(x, z):
            rho = bloch_state(x, 0.0, z)
            return (avg_explicit(chan, rho, gamma, config.tau_for(chan, rho), config.variant),)

        return fn

    return _sweep(config, ("def2",), make)


class ReportError(QsepError):
    pass


def instance_report(
    channel: QuantumChannel,
    rho,
    gamma,
    tau,
    second: Optional[QuantumChannel] = None,
    tau1=None,
    variant: bool = False,
) -> dict:
    """Fluctuation statistics for one instance, plus superadditivity when ``second`` is given.

    With ``second``, ``channel`` is the first step, ``tau1`` the reverse input
    after it, and ``tau`` the reverse input after the composed process.
    """
    report = {}
    if second is None:
        qf, qr = q_forward(channel, rho), q_reverse(channel, gamma, tau, variant)
        report.update(crooks(qf, qr).to_dict())
        report["average_def1"] = avg_def1(channel, rho, gamma, tau)
        return report
    from .channels import compose

    total = compose(second, channel)
    qf, qr = q_forward(total, rho), q_reverse(total, gamma, tau, variant)
    report.update(crooks(qf, qr).to_dict())
    report["average_def1"] = avg_def1(total, rho, gamma, tau)
    report["superadditivity"] = superadditivity(
        channel, second, rho, gamma, tau1, tau, variant
    ).to_dict()
    return report


def run_report(config: ScenarioConfig) -> dict:
    if config.rho_bloch is None:
        raise InvalidParameter("report needs an explicit rho")
    rho, gamma = config.rho_bloch.state(), config.gamma()
    try:
        if len(config.n_values) == 1:
            chan = collision_channel(config.model(config.n_values[0]))
            out = instance_report(chan, rho, gamma, config.tau_for(chan, rho), variant=config.variant)
        else:
            n1, n2 = config.n_values[:2]
            e1 = collision_channel(config.model(n1))
            e2 = collision_channel(config.model(n2))
            total = collision_channel(config.model(n1 + n2))
            out = instance_report(
                e1, rho, gamma, config.tau_for(total, rho), second=e2,
                tau1=config.tau_for(e1, rho), variant=config.variant,
            )
    except QsepError as exc:
        raise ReportError(f"{type(exc).__name__} at rho={tuple(config.rho_bloch)}: {exc}") from exc
    out["config"] = {
        "xi_population": config.xi_population,
        "phi": config.phi,
        "n_values": list(config.n_values),
        "rho": list(config.rho_bloch),
        "gamma": list(config.gamma_bloch) if config.gamma_bloch else "xi",
        "tau": list(config.tau_bloch) if config.tau_mode == "explicit" else config.tau_mode,
        "variant_reverse": config.variant,
    }
    return out


RUNNERS = {
    "fig1_diff": run_fig1,
    "fig2_fixedpoint": run_fig2,
    "fig3_tauxi": run_fig3,
}


def dump_json(panels: Dict[str, GridResult]) -> str:
    return json.dumps({k: v.to_records() for k, v in panels.items()}, indent=1)
