"""Fast randomized checks of the core identities, run by ``qsep selftest``."""
from __future__ import annotations

from typing import Callable, List, Tuple

import numpy as np

from . import linalg as la
from .channels import apply, complementary_apply, stinespring, unitary_channel
from .classical import ClassicalProcess, classical_average, embed_as_quantum
from .entropy import (
    avg_def2,
    avg_explicit,
    crooks,
    locality_decomposition,
    sigma_operator,
)
from .retrodiction import petz_apply
from .sampling import haar_unitary, random_channel, random_probability, random_state, random_stochastic
from .states import q_forward, q_reverse


def _instance(rng, d):
    chan = random_channel(d, d, rng)
    rho, gamma, tau = (random_state(d, rng, min_eig=0.02) for _ in range(3))
    return chan, rho, gamma, tau


def _jarzynski_crooks(rng) -> float:
    worst = 0.0
    for d in (2, 3):
        chan, rho, gamma, tau = _instance(rng, d)
        rep = crooks(q_forward(chan, rho), q_reverse(chan, gamma, tau))
        worst = max(worst, abs(rep.jarzynski_value - 1), *(r.ratio_error for r in rep.crooks_rows))
    return worst


def _second_law(rng) -> float:
    chan, rho, gamma, tau = _instance(rng, 2)
    qf, qr = q_forward(chan, rho), q_reverse(chan, gamma, tau)
    v = avg_def2(qf, qr)
    return max(0.0, -v) + abs(v - avg_explicit(chan, rho, gamma, tau))


def _unitary_zero(rng) -> float:
    chan = unitary_channel(haar_unitary(2, rng))
    rho, gamma, tau = (random_state(2, rng) for _ in range(3))
    return abs(avg_def2(q_forward(chan, rho), q_reverse(chan, gamma, tau)))


def _classical(rng) -> float:
    proc = ClassicalProcess(
        random_probability(3, rng, 0.02), random_stochastic(3, 3, rng, 0.02),
        random_probability(3, rng, 0.02), random_probability(3, rng, 0.02),
    )
    chan, rho, gamma, tau = embed_as_quantum(proc)
    return abs(avg_def2(q_forward(chan, rho), q_reverse(chan, gamma, tau)) - classical_average(proc).avg)


def _locality(rng) -> float:
    chan, rho, gamma, tau = _instance(rng, 2)
    op = sigma_operator(q_forward(chan, rho), q_reverse(chan, gamma, tau))
    loc = locality_decomposition(chan, rho, gamma, tau)
    return float(np.max(np.abs(np.sort(op.eigenvalues) - np.linalg.eigvalsh(loc.local_operator()))))


def _dilation(rng) -> float:
    chan, rho, gamma, _ = _instance(rng, 2)
    v = stinespring(chan)
    iso = np.max(np.abs(v.conj().T @ v - np.eye(2)))
    out = la.partial_trace(v @ rho @ v.conj().T, (2, 4), keep=0)
    comp = complementary_apply(chan, rho)
    return float(max(iso, np.max(np.abs(out - apply(chan, rho))),
                     np.max(np.abs(comp - q_forward(chan, rho).matrix.T))))


def _petz_fixed(rng) -> float:
    chan, _, gamma, _ = _instance(rng, 3)
    return float(np.max(np.abs(petz_apply(chan, gamma, apply(chan, gamma)) - gamma)))


CHECKS: List[Tuple[str, Callable, float]] = [
    ("jarzynski and crooks", _jarzynski_crooks, 1e-8),
    ("second law and explicit average", _second_law, 1e-9),
    ("unitary channel produces nothing", _unitary_zero, 1e-9),
    ("classical reduction", _classical, 1e-9),
    ("locality spectrum", _locality, 1e-8),
    ("stinespring dilation", _dilation, 1e-9),
    ("petz fixes the prior", _petz_fixed, 1e-10),
]


def run_selftest(seed: int = 0, repeats: int = 5, echo=print) -> bool:
    rng = np.random.default_rng(seed)
    ok = True
    for name, fn, tol in CHECKS:
        worst = max(fn(rng) for _ in range(repeats))
        passed = worst < tol
        ok &= passed
        echo(f"{'PASS' if passed else 'FAIL'}  {name:34s} worst={worst:.2e} tol={tol:.0e}")
    return ok
