"""Adaptive integration of the radial profile/variation system.

The state is ``(u, u', v, v')`` where ``u`` solves the radial equation

    u'' + (n-1)/r * u' + f(u) = 0,   u(0) = alpha, u'(0) = 0,

and ``v`` solves the equation of variations along it

    v'' + (n-1)/r * v' + f'(u) v = 0,   v(0) = 1, v'(0) = 0.

The origin is a regular singular point, so integration starts at a small
``r0 > 0`` from the even Taylor expansion (``series_start``) and marches
outward only.  The stepper is a Dormand-Prince 5(4) embedded pair with the
standard quartic dense-output interpolant, so every accepted step carries a
polynomial segment that downstream event location and probing evaluate
without re-integrating.

Termination is explicit and tagged: the run ends at ``r_max``, or earlier
when the profile energy drops to zero or below (the oscillation trap: from
there on the profile is confined below the well zero and its node count is
final), when the variation passes the guard magnitude, or when the stepper
gives up (step budget / underflow).  Callers choose via ``StopPolicy``
whether the energy trap should stop the run; the guards are always active.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field as dc_field
from typing import Iterator

from .field import FieldParams, ParameterError, abs_pow

# --- Dormand-Prince 5(4) tableau (standard coefficients) ------------------

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)

_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)

# 5th-order solution weights (row 7 of _A is the same by FSAL construction).
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)

# Difference between the 5th- and embedded 4th-order weights.
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

# Quartic dense-output coefficients: column j weights the power theta**(j+1).
_P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

_MAX_STEP = 0.25  # keeps dense segments finer than any oscillation of the profile
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_SAFETY = 0.9

REACHED_RMAX = "ReachedRMax"
ENERGY_NONPOSITIVE = "EnergyNonpositive"
VARIATION_DIVERGED = "VariationDiverged"
STEP_LIMIT = "StepLimit"
STEP_UNDERFLOW = "StepUnderflow"


class IntegrationError(RuntimeError):
    """Stepper invariant broken (non-finite state, bad controls)."""


class DenseRangeError(ValueError):
    """Dense evaluation requested outside the integrated range."""


@dataclass(frozen=True)
class IntegratorControls:
    """Stepper knobs.

    r0 is the series-start radius; ``None`` resolves to 1e-6 * max(1, alpha).
    Per-step local error is kept under abs_tol + rel_tol * |component|.
    """

    r0: float | None = None
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    r_max: float = 100.0
    v_guard: float = 1e12
    max_steps: int = 500_000

    def tightened(self, factor: float) -> "IntegratorControls":
        """Same controls with both tolerances divided by ``factor``."""
        return IntegratorControls(
            r0=self.r0,
            abs_tol=self.abs_tol / factor,
            rel_tol=self.rel_tol / factor,
            r_max=self.r_max,
            v_guard=self.v_guard,
            max_steps=self.max_steps,
        )

    def with_rmax(self, r_max: float) -> "IntegratorControls":
        return IntegratorControls(
            r0=self.r0,
            abs_tol=self.abs_tol,
            rel_tol=self.rel_tol,
            r_max=r_max,
            v_guard=self.v_guard,
            max_steps=self.max_steps,
        )


@dataclass(frozen=True)
class ProblemParams:
    """A single shooting problem: field parameters plus the height alpha."""

    field: FieldParams
    alpha: float
    controls: IntegratorControls = dc_field(default_factory=IntegratorControls)

    def __post_init__(self) -> None:
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ParameterError(f"shooting height alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class StopPolicy:
    """Which optional termination causes are armed.

    Classification runs keep the energy trap on (node counts become final
    the moment the energy is nonpositive).  Verification runs that need the
    whole radial range turn it off and run to r_max; the variation guard
    and the step budget stay armed either way.
    """

    stop_on_energy: bool = True


CLASSIFY_POLICY = StopPolicy(stop_on_energy=True)
FULL_RANGE_POLICY = StopPolicy(stop_on_energy=False)


@dataclass(frozen=True)
class State:
    """Profile/variation state at one radius."""

    r: float
    u: float
    up: float
    v: float
    vp: float


@dataclass(frozen=True)
class TerminationCause:
    tag: str
    r_stop: float
    detail: str = ""


def rhs(state: State, params: FieldParams) -> tuple[float, float, float, float]:
    """Right-hand side of the first-order system at r > 0."""
    if state.r <= 0.0:
        raise ParameterError(f"rhs needs r > 0, got r={state.r}")
    u, up, v, vp = state.u, state.up, state.v, state.vp
    apw = abs_pow(u, params.p - 1.0)
    fu = (apw - 1.0) * u
    fpu = params.p * apw - 1.0
    drag = (params.n - 1.0) / state.r
    return (up, -drag * up - fu, vp, -drag * vp - fpu * v)


def series_start(params: ProblemParams) -> State:
    """Second-order Taylor state at r0 with O(r0**4) truncation error.

    Both u and v are even in r at the origin; their curvatures there are
    -f(alpha)/n and -f'(alpha)/n.
    """
    alpha = params.alpha
    fld = params.field
    r0 = params.controls.r0
    if r0 is None:
        r0 = 1e-6 * max(1.0, alpha)
    if not (0.0 < r0 < params.controls.r_max):
        raise ParameterError(f"series start r0={r0} must lie in (0, r_max)")
    apw = abs_pow(alpha, fld.p - 1.0)
    f_alpha = (apw - 1.0) * alpha
    fp_alpha = fld.p * apw - 1.0
    n = float(fld.n)
    return State(
        r=r0,
        u=alpha - f_alpha * r0 * r0 / (2.0 * n),
        up=-f_alpha * r0 / n,
        v=1.0 - fp_alpha * r0 * r0 / (2.0 * n),
        vp=-fp_alpha * r0 / n,
    )


@dataclass
class Trajectory:
    """Dense solution of one shooting run.

    ``knots`` are the accepted step endpoints (strictly increasing, first
    one is the series start).  ``states`` are the states at the knots.
    Segment ``i`` covers [knots[i], knots[i+1]] and carries the quartic
    interpolant coefficients produced by that step.
    """

    params: ProblemParams
    knots: list[float]
    states: list[tuple[float, float, float, float]]
    seg_coeffs: list[tuple[tuple[float, float, float, float], ...]]
    termination: TerminationCause

    @property
    def r_start(self) -> float:
        return self.knots[0]

    @property
    def r_end(self) -> float:
        return self.knots[-1]

    def state_at_knot(self, i: int) -> State:
        u, up, v, vp = self.states[i]
        return State(r=self.knots[i], u=u, up=up, v=v, vp=vp)

    def samples(self) -> Iterator[State]:
        for i in range(len(self.knots)):
            yield self.state_at_knot(i)

    def segment_index(self, r: float) -> int:
        """Index of the dense segment containing r (knots are its ends)."""
        if not (self.knots[0] <= r <= self.knots[-1]):
            raise DenseRangeError(
                f"r={r} outside integrated range [{self.knots[0]}, {self.knots[-1]}]"
            )
        i = bisect_right(self.knots, r) - 1
        return min(i, len(self.seg_coeffs) - 1)

    def eval_dense(self, r: float) -> State:
        """Interpolated state at any radius in [r_start, r_end]."""
        i = self.segment_index(r)
        r_lo = self.knots[i]
        h = self.knots[i + 1] - r_lo
        theta = (r - r_lo) / h
        y_lo = self.states[i]
        coeffs = self.seg_coeffs[i]
        out = []
        for c in range(4):
            q0, q1, q2, q3 = coeffs[c]
            w = theta * (q0 + theta * (q1 + theta * (q2 + theta * q3)))
            out.append(y_lo[c] + h * w)
        return State(r=r, u=out[0], up=out[1], v=out[2], vp=out[3])

    def energy_at(self, state: State) -> float:
        p = self.params.field.p
        u = state.u
        return 0.5 * state.up * state.up - 0.5 * u * u + abs_pow(u, p + 1.0) / (p + 1.0)

    def truncated_at(self, r_cut: float) -> "Trajectory":
        """Copy keeping only whole dense segments ending at or before r_cut.

        Used by structural checks that must ignore the stretch where a
        near-bound-state shot departs from the profile it shadows.  The
        copy ends at a knot, so no partial segment is ever exposed.
        """
        if r_cut <= self.knots[0]:
            raise DenseRangeError(f"truncation radius {r_cut} at or before the start")
        n_keep = bisect_right(self.knots, r_cut) - 1
        n_keep = max(1, min(n_keep, len(self.seg_coeffs)))
        return Trajectory(
            params=self.params,
            knots=self.knots[: n_keep + 1],
            states=self.states[: n_keep + 1],
            seg_coeffs=self.seg_coeffs[:n_keep],
            termination=TerminationCause(
                tag=REACHED_RMAX,
                r_stop=self.knots[n_keep],
                detail="truncated for structural checks",
            ),
        )


def _error_norm(err: tuple, y0: tuple, y1: tuple, atol: float, rtol: float) -> float:
    acc = 0.0
    for i in range(4):
        scale = atol + rtol * max(abs(y0[i]), abs(y1[i]))
        q = err[i] / scale
        acc += q * q
    return math.sqrt(0.25 * acc)


def integrate(params: ProblemParams, policy: StopPolicy = CLASSIFY_POLICY) -> Trajectory:
    """March the system outward from the series start until a stop fires.

    Every accepted step keeps its local error below abs_tol + rel_tol*|y|
    componentwise (RMS-normalized).  The returned trajectory always carries
    at least one dense segment unless the very first state already trips a
    stop, and its termination tag says exactly why the march ended.
    """
    fld = params.field
    ctl = params.controls
    if ctl.abs_tol <= 0.0 or ctl.rel_tol <= 0.0:
        raise IntegrationError("tolerances must be positive")
    n_minus_1 = fld.n - 1.0
    p = fld.p
    p_m1 = p - 1.0
    inv_p_p1 = 1.0 / (p + 1.0)

    def deriv(r: float, y: tuple) -> tuple:
        u, up, v, vp = y
        if u == 0.0:
            apw = 0.0
        else:
            apw = math.exp(p_m1 * math.log(abs(u)))
        drag = n_minus_1 / r
        return (up, -drag * up - (apw - 1.0) * u, vp, -drag * vp - (p * apw - 1.0) * v)

    def energy(y: tuple) -> float:
        u = y[0]
        well = -0.5 * u * u
        if u != 0.0:
            well += math.exp((p + 1.0) * math.log(abs(u))) * inv_p_p1
        return 0.5 * y[1] * y[1] + well

    start = series_start(params)
    r = start.r
    y = (start.u, start.up, start.v, start.vp)

    knots = [r]
    states = [y]
    seg_coeffs: list[tuple] = []

    def finish(tag: str, detail: str = "") -> Trajectory:
        return Trajectory(
            params=params,
            knots=knots,
            states=states,
            seg_coeffs=seg_coeffs,
            termination=TerminationCause(tag=tag, r_stop=knots[-1], detail=detail),
        )

    # The start state can already sit in the trap (e.g. alpha below the well
    # zero); report it without taking a step.
    if policy.stop_on_energy and energy(y) <= 0.0:
        return finish(ENERGY_NONPOSITIVE, "energy nonpositive at series start")
    if abs(y[2]) > ctl.v_guard:
        return finish(VARIATION_DIVERGED, "variation guard tripped at series start")

    k1 = deriv(r, y)
    h = min(10.0 * r, _MAX_STEP, ctl.r_max - r)
    steps = 0

    while True:
        if steps >= ctl.max_steps:
            return finish(STEP_LIMIT, f"step budget {ctl.max_steps} exhausted")
        if h < 1e-14 * max(1.0, r):
            return finish(STEP_UNDERFLOW, f"step size {h:.3e} underflowed at r={r:.6e}")

        clipped = False
        if r + h >= ctl.r_max:
            h = ctl.r_max - r
            clipped = True

        k = [k1]
        for s in range(1, 6):
            acc = [0.0, 0.0, 0.0, 0.0]
            a_row = _A[s]
            for j, a in enumerate(a_row):
                if a != 0.0:
                    kj = k[j]
                    for c in range(4):
                        acc[c] += a * kj[c]
            ys = tuple(y[c] + h * acc[c] for c in range(4))
            k.append(deriv(r + _C[s] * h, ys))

        acc = [0.0, 0.0, 0.0, 0.0]
        for j in range(6):
            b = _A[6][j]
            if b != 0.0:
                kj = k[j]
                for c in range(4):
                    acc[c] += b * kj[c]
        y_new = tuple(y[c] + h * acc[c] for c in range(4))
        r_new = ctl.r_max if clipped else r + h
        k7 = deriv(r_new, y_new)
        k.append(k7)

        err = [0.0, 0.0, 0.0, 0.0]
        for j in range(7):
            e = _E[j]
            if e != 0.0:
                kj = k[j]
                for c in range(4):
                    err[c] += e * kj[c]
        err = tuple(err[c] * h for c in range(4))

        if not all(math.isfinite(val) for val in y_new):
            return finish(STEP_UNDERFLOW, f"non-finite state after step at r={r:.6e}")

        norm = _error_norm(err, y, y_new, ctl.abs_tol, ctl.rel_tol)
        if norm > 1.0:
            h *= max(_MIN_FACTOR, _SAFETY * norm ** -0.2)
            continue

        # Accepted: store dense coefficients Q = K^T P for this segment.
        coeffs = []
        for c in range(4):
            q0 = q1 = q2 = q3 = 0.0
            for j in range(7):
                kjc = k[j][c]
                if kjc != 0.0:
                    pj = _P[j]
                    q0 += kjc * pj[0]
                    q1 += kjc * pj[1]
                    q2 += kjc * pj[2]
                    q3 += kjc * pj[3]
            coeffs.append((q0, q1, q2, q3))
        seg_coeffs.append(tuple(coeffs))
        knots.append(r_new)
        states.append(y_new)
        steps += 1

        r, y, k1 = r_new, y_new, k7

        if policy.stop_on_energy and energy(y) <= 0.0:
            return finish(ENERGY_NONPOSITIVE, "profile energy reached zero")
        if abs(y[2]) > ctl.v_guard or abs(y[3]) > ctl.v_guard:
            return finish(VARIATION_DIVERGED, f"variation guard {ctl.v_guard:.1e} tripped")
        if clipped or r >= ctl.r_max:
            return finish(REACHED_RMAX)

        if norm == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * norm ** -0.2))
        h = min(h * factor, _MAX_STEP)


def eval_dense(traj: Trajectory, r: float) -> State:
    """Module-level alias of Trajectory.eval_dense (symmetry with ``rhs``)."""
    return traj.eval_dense(r)
