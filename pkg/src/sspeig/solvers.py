"""Power iterations for skew-symmetric eigenproblems.

The classical power method serves as the baseline for general operators.
The structure-preserving solver alternates multiplication by S and
S.T = -S, producing conjugate eigenpair approximations
(+-i*sigma, sqrt(2)/2 (u +- i v)) entirely in real arithmetic. A deflated
driver removes converged pairs through a rank-2i correction and computes
several dominant pairs in sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BreakdownError, DimensionMismatchError
from .operators import DeflatedOperator, DeflationSet, SkewOperator, deflate

_EPS = np.finfo(np.float64).eps


@dataclass
class SolveConfig:
    """Solver knobs.

    Parameters
    ----------
    tol : float
        Relative residual tolerance; must be at least 100 * machine epsilon
        for the stopping rule to be meaningful.
    max_iter : int
        Iteration cap per stage.
    initial_vector : "auto" | "random" | array_like
        "auto" normalizes S @ (1, ..., 1); if that product has norm below
        n * machine epsilon (ones in the null space) a seeded random unit
        vector is used instead and the fallback is recorded on the trace.
    seed : int
        Seed for the random initial vector and the fallback.
    check_every : int
        Evaluate rho and the residual every this many iterations. The
        default 1 matches the reference accounting; raise it for very large
        problems.
    snapshot_iterates : bool
        Keep per-iteration unit iterates on the trace (dense-scale
        diagnostics only).
    deflation_tol_growth : float
        Per-stage tolerance ladder of the multi-pair driver: stage i of s
        stops at tol * growth**(i - s), the final stage exactly at tol.
        Each deflated pair is thereby converged deeper than what the stages
        after it must reach; with a flat tolerance the residual of stage
        i+1 against the original matrix bottoms out at roughly the exit
        residual of stage i and the driver can stall one notch above tol.
        Set to 1.0 to recover the flat rule.
    """

    tol: float = 1e-8
    max_iter: int = 20000
    initial_vector: object = "auto"
    seed: int = 42
    trace: bool = True
    check_every: int = 1
    snapshot_iterates: bool = False
    deflation_tol_growth: float = 1.4

    def __post_init__(self):
        if self.tol < 100.0 * _EPS:
            raise ValueError(
                f"tol = {self.tol:g} is below 100 * machine epsilon = {100 * _EPS:g}"
            )
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.check_every < 1:
            raise ValueError("check_every must be positive")
        if self.deflation_tol_growth < 1.0:
            raise ValueError("deflation_tol_growth must be at least 1.0")


@dataclass
class ConvergenceTrace:
    """Per-iteration history of one solve stage."""

    ks: list = field(default_factory=list)
    rhos: list = field(default_factory=list)
    errs: list = field(default_factory=list)
    mvs: list = field(default_factory=list)
    fallback_used: bool = False
    q0: np.ndarray | None = None
    odd_iterates: list | None = None
    even_iterates: list | None = None
    iterates: list | None = None  # used by the classical power method

    def append(self, k: int, rho: float, err: float, mv: int):
        self.ks.append(int(k))
        self.rhos.append(float(rho))
        self.errs.append(float(err))
        self.mvs.append(int(mv))

    @property
    def entries(self):
        """Rows (k, rho_k, err_k, matvec_count)."""
        return list(zip(self.ks, self.rhos, self.errs, self.mvs))

    def __len__(self) -> int:
        return len(self.ks)


@dataclass
class EigenpairApprox:
    """Converged (or last) conjugate-pair approximation.

    The pair represents eigenvalues +-i*sigma with eigenvectors
    sqrt(2)/2 (u +- i v); sigma is stored as a real number so the computed
    eigenvalues are purely imaginary by construction.

    ``matvecs`` follows the reference accounting 2*iterations + 1 (two
    products per iteration plus one for the final rho); ``matvecs_raw``
    counts every product actually performed, including per-iteration
    rho/residual evaluations and initial-vector setup.
    """

    sigma: float
    u: np.ndarray
    v: np.ndarray
    residual: float
    iterations: int
    matvecs: int
    matvecs_raw: int
    converged: bool
    orth_defect: float
    err: float = float("inf")


@dataclass
class PowerResult:
    """Classical power method output (rho, q, trace)."""

    rho: float
    q: np.ndarray
    trace: ConvergenceTrace
    iterations: int
    matvecs: int
    converged: bool


@dataclass
class DeflatedSolveResult:
    """Output of the multi-pair driver.

    ``pairs`` holds the converged stages in order; if a stage failed to
    converge within max_iter, ``failure`` carries its last approximation and
    ``failure_stage`` its 1-based index, and later stages are not attempted.
    """

    pairs: list
    traces: list
    requested: int
    failure: EigenpairApprox | None = None
    failure_stage: int | None = None

    @property
    def converged(self) -> bool:
        return self.failure is None and len(self.pairs) == self.requested

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([p.sigma for p in self.pairs])

    @property
    def total_iterations(self) -> int:
        total = sum(p.iterations for p in self.pairs)
        if self.failure is not None:
            total += self.failure.iterations
        return total

    @property
    def total_matvecs(self) -> int:
        total = sum(p.matvecs for p in self.pairs)
        if self.failure is not None:
            total += self.failure.matvecs
        return total


def _initial_vector(op, config: SolveConfig, trace: ConvergenceTrace):
    """Starting unit vector per config policy; returns (q0, setup matvecs)."""
    spec = config.initial_vector
    if isinstance(spec, str):
        if spec == "auto":
            w = op.matvec(np.ones(op.dim))
            norm_w = np.linalg.norm(w)
            if norm_w >= op.dim * _EPS:
                return w / norm_w, 1
            trace.fallback_used = True
            rng = np.random.default_rng(config.seed)
            q = rng.standard_normal(op.dim)
            return q / np.linalg.norm(q), 1
        if spec == "random":
            rng = np.random.default_rng(config.seed)
            q = rng.standard_normal(op.dim)
            return q / np.linalg.norm(q), 0
        raise ValueError(f"unknown initial_vector policy {spec!r}")
    q = np.asarray(spec, dtype=np.float64)
    if q.shape != (op.dim,):
        raise DimensionMismatchError(
            f"initial vector has shape {q.shape}, expected ({op.dim},)"
        )
    norm_q = np.linalg.norm(q)
    if norm_q == 0.0:
        raise ValueError("user-supplied initial vector is zero")
    return q / norm_q, 0


def residual_norm(op: SkewOperator, rho: float, u, v) -> float:
    """Absolute residual of (+-i*rho, sqrt(2)/2 (u +- i v)) as eigenpairs of op.

    Computes sqrt(2)/2 * sqrt(||S u + rho v||^2 + ||S v - rho u||^2), which
    is identical for the + and - members of the conjugate pair.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    su = op.matvec(u)
    sv = op.matvec(v)
    part_u = np.linalg.norm(su + rho * v)
    part_v = np.linalg.norm(sv - rho * u)
    return float(np.sqrt(0.5 * (part_u * part_u + part_v * part_v)))


def _ssp_stage(iter_op, base_op, config: SolveConfig, err_denom=None, tol=None):
    """One stage of the alternating iteration.

    iter_op drives the iterates (the deflated operator for stages >= 2);
    rho and the residual are always evaluated against base_op, and the
    stopping rule divides by |rho| when err_denom is None (first stage) or
    by the fixed converged sigma_1 otherwise. ``tol`` overrides config.tol
    for the tolerance ladder of the multi-pair driver.
    """
    stop_tol = config.tol if tol is None else tol
    trace = ConvergenceTrace()
    q, raw_mv = _initial_vector(iter_op, config, trace)
    deflation = iter_op.deflation if isinstance(iter_op, DeflatedOperator) else None
    if deflation is not None and deflation.count == 0:
        deflation = None
    if config.snapshot_iterates:
        trace.q0 = q.copy()
        trace.odd_iterates = []
        trace.even_iterates = []

    converged = False
    defect = 0.0
    rho = float("nan")
    resid = float("inf")
    last_err = float("inf")
    it = 0
    for it in range(1, config.max_iter + 1):
        w = iter_op.matvec(q)
        raw_mv += 1
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            raise BreakdownError(
                f"iterate annihilated at iteration {it}: "
                "singular operator or fully deficient start"
            )
        q_odd = w / norm_w

        w2 = -iter_op.matvec(q_odd)
        raw_mv += 1
        norm_w2 = np.linalg.norm(w2)
        if norm_w2 == 0.0:
            raise BreakdownError(
                f"iterate annihilated at iteration {it}: "
                "singular operator or fully deficient start"
            )
        q_even = w2 / norm_w2
        defect = max(defect, abs(float(q_odd @ q_even)))

        if config.snapshot_iterates:
            trace.odd_iterates.append(q_odd.copy())
            trace.even_iterates.append(q_even.copy())

        if it % config.check_every == 0 or it == config.max_iter:
            s_q_even = base_op.matvec(q_even)
            raw_mv += 1
            rho = float(q_odd @ s_q_even)
            # S q_odd is the product already computed for the even step:
            # iter_op applied to q_odd gave -w2; the deflation correction
            # restores the action of the original S without a new product.
            s_q_odd = -w2 if deflation is None else -w2 + deflation.correction(q_odd)
            part_u = np.linalg.norm(s_q_odd + rho * q_even)
            part_v = np.linalg.norm(s_q_even - rho * q_odd)
            resid = float(np.sqrt(0.5 * (part_u * part_u + part_v * part_v)))
            denom = abs(rho) if err_denom is None else float(err_denom)
            last_err = resid / denom if denom > 0.0 else float("inf")
            trace.append(it, rho, last_err, raw_mv)
            if last_err < stop_tol:
                converged = True
                break
        q = q_even

    pair = EigenpairApprox(
        sigma=rho,
        u=q_odd,
        v=q_even,
        residual=resid,
        iterations=it,
        matvecs=2 * it + 1,
        matvecs_raw=raw_mv,
        converged=converged,
        orth_defect=defect,
        err=last_err,
    )
    return pair, trace


def ssp_solve(op: SkewOperator, config: SolveConfig | None = None):
    """Dominant conjugate eigenpair of a skew-symmetric operator.

    Alternates q_{2k+1} = normalize(S q_{2k}), q_{2k+2} = normalize(-S
    q_{2k+1}) and stops when the relative residual ||r|| / |rho_k| falls
    below config.tol. Returns (EigenpairApprox, ConvergenceTrace); a
    non-converged run is returned with ``converged=False`` rather than
    raised, so the last approximation stays inspectable.

    Raises
    ------
    BreakdownError
        If an iterate is annihilated (norm exactly zero), which can happen
        only for a singular operator or a fully deficient start.
    """
    if config is None:
        config = SolveConfig()
    return _ssp_stage(op, op, config)


def ssp_solve_many(op: SkewOperator, s: int, config: SolveConfig | None = None):
    """Compute the s dominant conjugate eigenpairs with deflation.

    Stage 1 runs the plain alternating iteration on S. Every later stage i
    iterates on the deflated operator but evaluates rho and the residual as
    an eigenpair of the original S, stopping on ||r|| / sigma_1 < tol with
    the converged first sigma as the fixed denominator. Each stage draws its
    starting vector from the current (deflated) operator under the "auto"
    policy.

    Stages before the last stop at the tighter tolerance
    tol * deflation_tol_growth**(i - s) (floored at 100 * machine epsilon):
    the residual of stage i+1 against the original matrix cannot drop below
    roughly the exit residual of the pairs already deflated, so every
    deflated pair must be converged deeper than what the remaining stages
    are required to reach. The final stage stops exactly at tol, and every
    returned pair satisfies ||r|| <= tol * sigma_1 against the original
    operator.
    """
    if config is None:
        config = SolveConfig()
    s = int(s)
    if s < 1:
        raise ValueError(f"number of pairs s must be positive, got {s}")
    if 2 * s > op.dim:
        raise ValueError(f"cannot extract {s} conjugate pairs from dimension {op.dim}")

    deflation = DeflationSet.empty(op.dim, tol=config.tol)
    pairs: list[EigenpairApprox] = []
    traces: list[ConvergenceTrace] = []
    sigma1 = None
    for stage in range(1, s + 1):
        iter_op = op if stage == 1 else deflate(op, deflation)
        stage_tol = max(
            config.tol * config.deflation_tol_growth ** (stage - s), 100.0 * _EPS
        )
        pair, trace = _ssp_stage(
            iter_op,
            op,
            config,
            err_denom=None if stage == 1 else sigma1,
            tol=stage_tol,
        )
        traces.append(trace)
        if not pair.converged:
            return DeflatedSolveResult(
                pairs=pairs,
                traces=traces,
                requested=s,
                failure=pair,
                failure_stage=stage,
            )
        pairs.append(pair)
        if stage == 1:
            sigma1 = pair.sigma
        deflation = deflation.appended(pair.sigma, pair.u, pair.v)
    return DeflatedSolveResult(pairs=pairs, traces=traces, requested=s)


def _op_interface(op):
    """Uniform (matvec, dim) view of a square operator or matrix."""
    if hasattr(op, "matvec"):
        if hasattr(op, "dim"):
            return op.matvec, int(op.dim)
        shape = getattr(op, "shape", None)
        if shape is not None and len(shape) == 2 and shape[0] == shape[1]:
            return op.matvec, int(shape[0])
        raise DimensionMismatchError("operator with matvec must be square")
    A = np.asarray(op, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"matrix must be square, got {A.shape}")
    return (lambda x: A @ x), A.shape[0]


def power_method(op, config: SolveConfig | None = None) -> PowerResult:
    """Classical power iteration for a general square operator.

    rho_k is the inner product of the unit iterate with its image, and the
    run stops once successive rho values agree to within tol * |rho|. A
    deficient starting vector is not detected up front; it surfaces as
    non-convergence (or convergence inside the complementary invariant
    subspace).
    """
    if config is None:
        config = SolveConfig()
    apply_op, n = _op_interface(op)

    trace = ConvergenceTrace()
    spec = config.initial_vector
    mv = 0
    if isinstance(spec, str):
        if spec == "auto":
            w = apply_op(np.ones(n))
            mv = 1
            norm_w = np.linalg.norm(w)
            if norm_w >= n * _EPS:
                q = w / norm_w
            else:
                trace.fallback_used = True
                rng = np.random.default_rng(config.seed)
                q = rng.standard_normal(n)
                q /= np.linalg.norm(q)
        elif spec == "random":
            rng = np.random.default_rng(config.seed)
            q = rng.standard_normal(n)
            q /= np.linalg.norm(q)
        else:
            raise ValueError(f"unknown initial_vector policy {spec!r}")
    else:
        q = np.asarray(spec, dtype=np.float64)
        if q.shape != (n,):
            raise DimensionMismatchError(
                f"initial vector has shape {q.shape}, expected ({n},)"
            )
        norm_q = np.linalg.norm(q)
        if norm_q == 0.0:
            raise ValueError("user-supplied initial vector is zero")
        q = q / norm_q
    if config.snapshot_iterates:
        trace.q0 = q.copy()
        trace.iterates = []

    rho_prev = None
    rho = float("nan")
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        w = apply_op(q)
        mv += 1
        rho = float(q @ w)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            raise BreakdownError("iterate entered the null space of the operator")
        q = w / norm_w
        if config.snapshot_iterates:
            trace.iterates.append(q.copy())
        if rho_prev is None or rho == 0.0:
            err = float("inf")
        else:
            err = abs(rho - rho_prev) / abs(rho)
        trace.append(it, rho, err, mv)
        if err < config.tol:
            converged = True
            break
        rho_prev = rho

    return PowerResult(
        rho=rho, q=q, trace=trace, iterations=it, matvecs=mv, converged=converged
    )


def convergence_rate(sigmas, i: int) -> float:
    """Rate gamma_i = sigma_{i+1} / sigma_i for 1-based index i."""
    sigmas = np.asarray(sigmas, dtype=np.float64)
    if sigmas.ndim != 1:
        raise DimensionMismatchError("sigmas must be a 1-D sequence")
    if not 1 <= i <= sigmas.shape[0] - 1:
        raise IndexError(
            f"rate index {i} out of range for {sigmas.shape[0]} sigmas"
        )
    if np.any(sigmas <= 0.0):
        raise ValueError("sigmas must be positive")
    return float(sigmas[i] / sigmas[i - 1])


def convergence_rates(sigmas, count: int) -> list[float]:
    """First ``count`` rates gamma_1, ..., gamma_count."""
    return [convergence_rate(sigmas, i) for i in range(1, count + 1)]


def tan_angle_to_line(q, x) -> float:
    """Tangent of the angle between unit vector q and the line span{x}.

    The sine is taken as the norm of the component of q orthogonal to x,
    which stays accurate for angles far below sqrt(machine epsilon).
    """
    q = np.asarray(q, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    c = float(q @ x)
    s = float(np.linalg.norm(q - c * x))
    c = abs(c)
    if c == 0.0:
        return float("inf")
    return s / c


@dataclass
class AngleDiagnostics:
    """Measured error sequences of one solve against an oracle reference.

    Row k (1-based iteration) carries tan angle(q_{2k-1}, x_o),
    tan angle(q_{2k}, x_e), the eigenvalue error |rho_{k-1} - sigma_1|
    produced in that iteration, and the two theoretical envelopes
    (sigma2/sigma1)^(2k) * tan0 and (sigma2/sigma1)^(2k-1) * tan0 with
    tan0 = tan angle(q_0, x_e).
    """

    ks: np.ndarray
    tan_odd: np.ndarray
    tan_even: np.ndarray
    rho_err: np.ndarray
    env_even: np.ndarray
    env_odd: np.ndarray
    tan0: float
    x_e: np.ndarray
    x_o: np.ndarray


def angle_diagnostics(
    op: SkewOperator,
    trace: ConvergenceTrace,
    u_star,
    v_star,
    sigma1: float,
    sigma2: float,
) -> AngleDiagnostics:
    """Per-iteration angle errors against the oracle dominant plane.

    u_star, v_star must be an orthonormal basis of the dominant eigenplane
    (from the dense oracle). The limit vectors x_e and x_o are recovered by
    projecting q_0 and S q_0 onto that plane, which realizes their
    definition through the starting vector's expansion coefficients. The
    trace must carry iterate snapshots with per-iteration rho evaluation.
    """
    u_star = np.asarray(u_star, dtype=np.float64)
    v_star = np.asarray(v_star, dtype=np.float64)
    if u_star.ndim != 1 or v_star.ndim != 1 or u_star.shape != v_star.shape:
        raise DimensionMismatchError("reference must be two vectors of equal length")
    basis = np.column_stack([u_star, v_star])
    gram = basis.T @ basis
    if np.max(np.abs(gram - np.eye(2))) > 1e-10:
        raise ValueError("reference eigenplane basis must be orthonormal (dimension 2)")
    if trace.q0 is None or trace.odd_iterates is None or trace.even_iterates is None:
        raise ValueError("trace was captured without iterate snapshots")
    if len(trace.rhos) != len(trace.odd_iterates):
        raise ValueError("angle diagnostics require per-iteration rho evaluation")
    if not 0.0 < sigma1 or not 0.0 <= sigma2 <= sigma1:
        raise ValueError("need sigma1 > 0 and 0 <= sigma2 <= sigma1")

    q0 = trace.q0
    proj_e = basis @ (basis.T @ q0)
    norm_e = np.linalg.norm(proj_e)
    if norm_e == 0.0:
        raise ValueError("starting vector is orthogonal to the reference eigenplane")
    x_e = proj_e / norm_e
    proj_o = basis @ (basis.T @ op.matvec(q0))
    norm_o = np.linalg.norm(proj_o)
    if norm_o == 0.0:
        raise ValueError("S q0 is orthogonal to the reference eigenplane")
    x_o = proj_o / norm_o

    tan0 = tan_angle_to_line(q0, x_e)
    gamma = sigma2 / sigma1
    count = len(trace.odd_iterates)
    ks = np.arange(1, count + 1)
    tan_odd = np.array(
        [tan_angle_to_line(q, x_o) for q in trace.odd_iterates]
    )
    tan_even = np.array(
        [tan_angle_to_line(q, x_e) for q in trace.even_iterates]
    )
    rho_err = np.abs(np.asarray(trace.rhos) - sigma1)
    env_even = gamma ** (2.0 * ks) * tan0
    env_odd = gamma ** (2.0 * ks - 1.0) * tan0
    return AngleDiagnostics(
        ks=ks,
        tan_odd=tan_odd,
        tan_even=tan_even,
        rho_err=rho_err,
        env_even=env_even,
        env_odd=env_odd,
        tan0=tan0,
        x_e=x_e,
        x_o=x_o,
    )
