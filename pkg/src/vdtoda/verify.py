"""Residual checks for the matrix identities satisfied along the flow.

Each operation evaluates one proven identity at a state and reports the
largest absolute deviation together with the magnitude of the terms it
was built from.  A residual passes when

    max_abs <= tol * max(1, rel_scale),

which keeps the comparison meaningful both near zero (the floor of 1)
and at states where matrix entries grow exponentially with the momenta
(the scale).

Every operation accepts an optional prebuilt ``LaxBundle`` so a suite
run can construct the matrices once per state, and an optional
``perturb=(name, i, j, amount)`` that corrupts a single entry of the
named bundle matrix before the residual is formed.  Perturbation exists
purely as an anti-vacuity control: a residual that stays small under a
1e-3 corruption is testing nothing.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .core import ModelParams, State, random_state
from .hamiltonian import hamiltonian, xh_q
from .lax import (
    LaxBundle,
    _delta_power,
    build_bundle,
    omega_conjugate,
    strict_lower,
    strict_upper,
)

__all__ = [
    "ResidualReport",
    "lax_triad_residual",
    "lax_equation_residual",
    "omega_relations_residual",
    "band_relations_residual",
    "scalar_identities",
    "run_suite",
    "reports_to_jsonl",
]

# Default tolerances per identity; scale-relative as described above.
TOL_TRIAD = 1e-10
TOL_LAX_EQUATION = 1e-9
TOL_OMEGA_GAUGE = 1e-10
TOL_OMEGA_B = 1e-13
TOL_BAND = 1e-11
TOL_TRACE = 1e-12
TOL_DIAGONAL = 1e-11

_MATRIX_FIELDS = (
    "D",
    "W",
    "L",
    "Dcal",
    "A",
    "B",
    "Acal",
    "g",
    "g_inv",
    "Omega",
    "Hcal",
    "Lcal",
    "Lcal_inv",
    "Ycal",
    "Q",
    "xhw",
)


@dataclass(frozen=True)
class ResidualReport:
    """Outcome of one identity check at one state."""

    name: str
    max_abs: float
    rel_scale: float
    tol: float
    passed: bool = field(init=False)
    n: int | None = None
    beta: float | None = None
    kappa: float | None = None
    seed: int | None = None
    state_index: int | None = None
    blocks: dict | None = None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "passed", bool(self.max_abs <= self.tol * max(1.0, self.rel_scale))
        )


def _materialize(
    state: State,
    params: ModelParams,
    bundle: LaxBundle | None,
    perturb: tuple[str, int, int, float] | None,
) -> tuple[LaxBundle, dict[str, np.ndarray]]:
    if bundle is None:
        bundle = build_bundle(state, params)
    mats = {name: getattr(bundle, name) for name in _MATRIX_FIELDS}
    if perturb is not None:
        name, i, j, amount = perturb
        if name not in mats:
            raise ValueError(f"unknown matrix {name!r}; choose from {_MATRIX_FIELDS}")
        M = mats[name].copy()
        M[int(i), int(j)] += float(amount)
        mats[name] = M
    return bundle, mats


def _xh_of_L(mats: dict[str, np.ndarray]) -> np.ndarray:
    # Leibniz rule on L = D (I + W):  X_H[L] = D (Dcal (I + W) + X_H[W]).
    eye = np.eye(mats["L"].shape[0])
    return mats["D"] @ (mats["Dcal"] @ (eye + mats["W"]) + mats["xhw"])


def _block_maxima(M: np.ndarray) -> dict[str, float]:
    n = M.shape[0] // 2
    return {
        "pp": float(np.max(np.abs(M[:n, :n]))),
        "pm": float(np.max(np.abs(M[:n, n:]))),
        "mp": float(np.max(np.abs(M[n:, :n]))),
        "mm": float(np.max(np.abs(M[n:, n:]))),
    }


def _gauge_rate(bundle: LaxBundle, params: ModelParams) -> np.ndarray:
    """X_H[g] g^{-1}: two symmetric entries astride the block boundary."""
    n = params.n
    coords = bundle.coords
    out = np.zeros((2 * n, 2 * n))
    c = (
        0.5
        * params.beta
        * params.kappa
        * np.sqrt(coords.w[-1])
        * _delta_power(coords.delta, 0.5)
        * coords.upsilon
    )
    out[n - 1, n] = out[n, n - 1] = c
    return out


def lax_triad_residual(
    state: State,
    params: ModelParams,
    bundle: LaxBundle | None = None,
    perturb: tuple[str, int, int, float] | None = None,
) -> ResidualReport:
    """Residual of X_H[L] = Acal L - L B.

    The left side is assembled analytically from the factor derivatives;
    per-block maxima of the D^{-1}-scaled residual are attached for
    debugging, mirroring how the identity splits over the four blocks.
    """
    bundle, mats = _materialize(state, params, bundle, perturb)
    lhs = _xh_of_L(mats)
    grow = mats["Acal"] @ mats["L"]
    shrink = mats["L"] @ mats["B"]
    resid = lhs - grow + shrink
    scale = max(float(np.max(np.abs(lhs))), float(np.max(np.abs(grow))), float(np.max(np.abs(shrink))))
    xi = resid / np.diag(bundle.D)[:, None]
    return ResidualReport(
        name="lax_triad",
        max_abs=float(np.max(np.abs(resid))),
        rel_scale=scale,
        tol=TOL_TRIAD,
        blocks=_block_maxima(xi),
    )


def lax_equation_residual(
    state: State,
    params: ModelParams,
    bundle: LaxBundle | None = None,
    perturb: tuple[str, int, int, float] | None = None,
) -> ResidualReport:
    """Residual of X_H[Lcal] = [Acal, Lcal].

    X_H[Lcal] is assembled by the product rule through Lcal = Hcal g and
    Hcal = L (Omega L Omega^{-1})^{-1}, using X_H[L^{-1}] =
    -L^{-1} X_H[L] L^{-1} and the closed form of X_H[g] g^{-1}.
    """
    bundle, mats = _materialize(state, params, bundle, perturb)
    L, g, Hcal, Acal, Lcal = mats["L"], mats["g"], mats["Hcal"], mats["Acal"], mats["Lcal"]
    xl = _xh_of_L(mats)
    L_inv = np.linalg.solve(L, np.eye(L.shape[0]))
    xh_hcal = xl @ omega_conjugate(L_inv) - L @ omega_conjugate(L_inv @ xl @ L_inv)
    xh_g = _gauge_rate(bundle, params) @ g
    lhs = xh_hcal @ g + Hcal @ xh_g
    grow = Acal @ Lcal
    shrink = Lcal @ Acal
    resid = lhs - grow + shrink
    scale = max(float(np.max(np.abs(lhs))), float(np.max(np.abs(grow))), float(np.max(np.abs(shrink))))
    return ResidualReport(
        name="lax_equation",
        max_abs=float(np.max(np.abs(resid))),
        rel_scale=scale,
        tol=TOL_LAX_EQUATION,
    )


def omega_relations_residual(
    state: State,
    params: ModelParams,
    bundle: LaxBundle | None = None,
    perturb: tuple[str, int, int, float] | None = None,
) -> tuple[ResidualReport, ResidualReport]:
    """Residuals of the Omega conjugation relations.

    First: Omega Acal Omega^{-1} = g Acal g^{-1} + X_H[g] g^{-1} (the
    gauge-twisted skew symmetry of Acal).  Second: Omega B Omega^{-1} = B,
    which is structural and holds to strict rounding.
    """
    bundle, mats = _materialize(state, params, bundle, perturb)
    Acal, B, g, g_inv = mats["Acal"], mats["B"], mats["g"], mats["g_inv"]
    twisted = g @ Acal @ g_inv + _gauge_rate(bundle, params)
    conj = omega_conjugate(Acal)
    lam = conj - twisted
    scale_a = max(float(np.max(np.abs(conj))), float(np.max(np.abs(twisted))))
    first = ResidualReport(
        name="omega_acal_gauge",
        max_abs=float(np.max(np.abs(lam))),
        rel_scale=scale_a,
        tol=TOL_OMEGA_GAUGE,
        blocks=_block_maxima(lam),
    )
    diff = omega_conjugate(B) - B
    second = ResidualReport(
        name="omega_b_symmetry",
        max_abs=float(np.max(np.abs(diff))),
        rel_scale=float(np.max(np.abs(B))),
        tol=TOL_OMEGA_B,
    )
    return first, second


def band_relations_residual(
    state: State,
    params: ModelParams,
    bundle: LaxBundle | None = None,
    perturb: tuple[str, int, int, float] | None = None,
) -> tuple[ResidualReport, ResidualReport]:
    """Band cancellations tying Acal to the Lax matrix and its inverse.

    Strictly-lower part of Acal + (beta/2) Lcal and strictly-upper part
    of Acal + (beta/2) Lcal^{-1} must both vanish.
    """
    _, mats = _materialize(state, params, bundle, perturb)
    half_beta = 0.5 * params.beta
    low_terms = (mats["Acal"], half_beta * mats["Lcal"])
    low = strict_lower(low_terms[0] + low_terms[1])
    lower = ResidualReport(
        name="band_lower",
        max_abs=float(np.max(np.abs(low))),
        rel_scale=max(float(np.max(np.abs(t))) for t in low_terms),
        tol=TOL_BAND,
    )
    up_terms = (mats["Acal"], half_beta * mats["Lcal_inv"])
    up = strict_upper(up_terms[0] + up_terms[1])
    upper = ResidualReport(
        name="band_upper",
        max_abs=float(np.max(np.abs(up))),
        rel_scale=max(float(np.max(np.abs(t))) for t in up_terms),
        tol=TOL_BAND,
    )
    return lower, upper


def scalar_identities(
    state: State,
    params: ModelParams,
    bundle: LaxBundle | None = None,
    perturb: tuple[str, int, int, float] | None = None,
) -> tuple[ResidualReport, ResidualReport]:
    """Scalar consequences of the band relations.

    The energy is half the trace of Lcal, and the diagonal of
    (beta/2)(Lcal - Lcal^{-1}) reproduces the position velocities as
    (xh_q, -reversed(xh_q)).
    """
    _, mats = _materialize(state, params, bundle, perturb)
    H = hamiltonian(state, params)
    half_trace = 0.5 * float(np.trace(mats["Lcal"]))
    trace_rep = ResidualReport(
        name="trace_energy",
        max_abs=abs(half_trace - H),
        rel_scale=abs(H),
        tol=TOL_TRACE,
    )
    dvec = 0.5 * params.beta * np.diag(mats["Lcal"] - mats["Lcal_inv"])
    qdot = xh_q(state, params)
    ref = np.concatenate([qdot, -qdot[::-1]])
    diag_rep = ResidualReport(
        name="diagonal_velocity",
        max_abs=float(np.max(np.abs(dvec - ref))),
        rel_scale=max(float(np.max(np.abs(dvec))), float(np.max(np.abs(ref)))),
        tol=TOL_DIAGONAL,
    )
    return trace_rep, diag_rep


def _state_reports(
    state: State,
    params: ModelParams,
    perturb: tuple[str, int, int, float] | None = None,
) -> list[ResidualReport]:
    bundle = build_bundle(state, params)
    reports = [
        lax_triad_residual(state, params, bundle, perturb),
        lax_equation_residual(state, params, bundle, perturb),
    ]
    reports.extend(omega_relations_residual(state, params, bundle, perturb))
    reports.extend(band_relations_residual(state, params, bundle, perturb))
    reports.extend(scalar_identities(state, params, bundle, perturb))
    return reports


def resolve_threads(threads: int | None) -> int:
    """Thread-count policy: None/1 sequential, 0 = one per CPU."""
    if threads is None:
        threads = int(os.environ.get("VDTODA_THREADS", "1"))
    if threads == 0:
        return os.cpu_count() or 1
    if threads < 0:
        raise ValueError("thread count must be >= 0")
    return threads


def run_suite(
    params: ModelParams,
    num_states: int,
    seed: int,
    box: float = 2.0,
    threads: int | None = None,
    perturb: tuple[str, int, int, float] | None = None,
) -> list[ResidualReport]:
    """All residuals over reproducibly seeded random states.

    States are drawn uniformly with |xi_a|, |eta_a| <= box.  Reports
    come back ordered by state index, then by the fixed operation
    order, regardless of thread count.
    """
    if num_states < 1:
        raise ValueError("num_states must be >= 1")
    rng = np.random.default_rng(seed)
    states = [random_state(params.n, rng, box=box) for _ in range(num_states)]

    def tagged(index: int) -> list[ResidualReport]:
        return [
            replace(
                r,
                n=params.n,
                beta=params.beta,
                kappa=params.kappa,
                seed=seed,
                state_index=index,
            )
            for r in _state_reports(states[index], params, perturb)
        ]

    workers = resolve_threads(threads)
    if workers <= 1:
        batches = [tagged(i) for i in range(num_states)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(tagged, range(num_states)))
    return [report for batch in batches for report in batch]


def reports_to_jsonl(reports: list[ResidualReport]) -> str:
    """One JSON object per line; floats serialize round-trip safe."""
    lines = []
    for r in reports:
        lines.append(
            json.dumps(
                {
                    "name": r.name,
                    "n": r.n,
                    "beta": r.beta,
                    "kappa": r.kappa,
                    "seed": r.seed,
                    "state_index": r.state_index,
                    "max_abs": r.max_abs,
                    "rel_scale": r.rel_scale,
                    "tol": r.tol,
                    "pass": r.passed,
                }
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")
