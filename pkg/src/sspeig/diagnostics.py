"""Convergence-analysis data: angle envelopes and residual curves.

Produces plot-ready tables; no rendering here. The envelope table pairs the
measured tangent-angle sequences of the iterates with their theoretical
geometric bounds and the eigenvalue error, which decays at twice the rate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .generators import ConvectionSpec, generate_convection
from .oracle import oracle_spectrum
from .solvers import (
    AngleDiagnostics,
    SolveConfig,
    angle_diagnostics,
    ssp_solve,
    ssp_solve_many,
)

# measured angles below this are floating-point noise, not convergence data
STAGNATION_FLOOR = 1e-13


@dataclass
class EnvelopeTable:
    """Per-iteration angle errors, envelopes, and solver history."""

    ks: np.ndarray
    rho: np.ndarray
    err: np.ndarray
    mv: np.ndarray
    tan_odd: np.ndarray
    tan_even: np.ndarray
    rho_err: np.ndarray
    env_even: np.ndarray
    env_odd: np.ndarray
    sigma1: float
    sigma2: float
    tan0: float

    @property
    def gamma(self) -> float:
        return self.sigma2 / self.sigma1

    def export(self, path) -> None:
        """CSV with the trace columns plus the angle columns."""
        with open(path, "w", encoding="ascii") as handle:
            handle.write("k,rho,err,mv,tan_odd,tan_even,rho_err,env_even,env_odd\n")
            for row in zip(
                self.ks, self.rho, self.err, self.mv, self.tan_odd,
                self.tan_even, self.rho_err, self.env_even, self.env_odd,
            ):
                k, rho, err, mv = row[0], row[1], row[2], row[3]
                rest = ",".join(f"{x:.17g}" for x in row[4:])
                handle.write(f"{k},{rho:.17g},{err:.17g},{int(mv)},{rest}\n")


def envelope_table(op, config: SolveConfig | None = None,
                   spectrum=None) -> EnvelopeTable:
    """Run one solve with snapshots and tabulate angles against envelopes.

    ``spectrum`` may carry a precomputed oracle decomposition; otherwise the
    operator is assembled densely and decomposed here.
    """
    if spectrum is None:
        spectrum = oracle_spectrum(op.to_dense())
    if config is None:
        config = SolveConfig()
    if not config.snapshot_iterates or config.check_every != 1:
        config = replace(config, check_every=1, snapshot_iterates=True)
    pair, trace = ssp_solve(op, config)
    diag = angle_diagnostics(
        op,
        trace,
        spectrum.U[:, 0],
        spectrum.V[:, 0],
        spectrum.sigmas[0],
        spectrum.sigmas[1],
    )
    return EnvelopeTable(
        ks=diag.ks,
        rho=np.asarray(trace.rhos),
        err=np.asarray(trace.errs),
        mv=np.asarray(trace.mvs),
        tan_odd=diag.tan_odd,
        tan_even=diag.tan_even,
        rho_err=diag.rho_err,
        env_even=diag.env_even,
        env_odd=diag.env_odd,
        sigma1=float(spectrum.sigmas[0]),
        sigma2=float(spectrum.sigmas[1]),
        tan0=diag.tan0,
    )


def figure2_data(spec: ConvectionSpec, config: SolveConfig | None = None) -> EnvelopeTable:
    """Envelope table for the convection instance (small grids only)."""
    op = generate_convection(spec)
    return envelope_table(op, config=config)


def envelope_violation(table: EnvelopeTable, slack: float = 1e-8) -> float:
    """Worst measured/envelope ratio over the pre-stagnation range.

    Values <= 1 + slack mean the geometric bounds hold; angles below the
    rounding floor are excluded since the bounds are exact-arithmetic
    statements.
    """
    worst = 0.0
    for measured, envelope in (
        (table.tan_even, table.env_even),
        (table.tan_odd, table.env_odd),
    ):
        live = measured >= STAGNATION_FLOOR
        if np.any(live):
            worst = max(worst, float(np.max(measured[live] / envelope[live])))
    return worst


def rate_doubling_slope(table: EnvelopeTable, rho_floor_rel: float = 1e-12,
                        tan_ceiling: float = 0.5) -> float:
    """Least-squares slope of log(rho error) against log(tan angle).

    The eigenvalue error decays at twice the angle rate, so the slope is 2
    in exact arithmetic. The fit skips the pre-asymptotic head (tan above
    ``tan_ceiling``) and the stagnated tail where the rho error reaches the
    rounding floor rho_floor_rel * sigma1.
    """
    mask = (
        (table.tan_even <= tan_ceiling)
        & (table.tan_even >= STAGNATION_FLOOR)
        & (table.rho_err >= rho_floor_rel * table.sigma1)
    )
    if np.count_nonzero(mask) < 3:
        raise ValueError("not enough pre-stagnation points for a slope fit")
    slope, _ = np.polyfit(np.log(table.tan_even[mask]), np.log(table.rho_err[mask]), 1)
    return float(slope)


def residual_curves(op, s: int, config: SolveConfig | None = None):
    """Per-stage series [(k, err_k), ...] of the multi-pair driver."""
    result = ssp_solve_many(op, s, config)
    curves = [list(zip(t.ks, t.errs)) for t in result.traces]
    return curves, result
