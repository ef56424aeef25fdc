"""Event detection on dense trajectories: zeros, criticals, phase labels.

A trajectory's qualitative shape is summarized by its ordered events:

* ``zeros_u``   -- sign changes z_1 < z_2 < ... of the profile,
* ``crits_u``   -- the critical points c_1 < c_2 < ... interlaced with them
  (exactly one per consecutive pair of zeros, plus the one closing the last
  phase when the run is bound-like),
* ``tail_crits_u`` -- critical points of the trapped oscillation about the
  rest height after the last zero (only when the run is not bound-like),
* ``zeros_v``   -- sign changes tau_1 < tau_2 < ... of the variation,
* ``inflections_u`` -- sign changes of u'',
* per-phase labels b_i, r_i, z_i, rbar_i, bbar_i marking where |u| crosses
  the well zero ``alpha_star`` and the rest height 1 on the way down and up.

Event radii are located by bisection on the dense interpolant followed by
secant polish, to an absolute radius tolerance of 1e-12 * max(1, r).  A
crossing that brushes a level closer than 1e-8 is flagged rather than
trusted; overlapping event brackets raise ``AmbiguousEvent``; a walk that
cannot reconcile the zeros with the criticals raises
``InterlacingViolation`` (usually a sign the integration tolerance is too
loose for the requested structure).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .field import CriticalAmplitudes, abs_pow
from .integrate import (
    ENERGY_NONPOSITIVE,
    STEP_LIMIT,
    STEP_UNDERFLOW,
    State,
    Trajectory,
)

SEMI_TAIL = "SemiTail"
TAIL_OSCILLATORY = "TailOscillatory"

_RADIUS_TOL = 1e-12
_TANGENCY_TOL = 1e-8


class InterlacingViolation(RuntimeError):
    """Zeros and criticals do not interlace; integration likely too loose."""


class AmbiguousEvent(RuntimeError):
    """Two event brackets overlap within the locator tolerance."""


class IndeterminateCount(RuntimeError):
    """Node count requested from a run that gave up before a verdict."""


@dataclass(frozen=True)
class LabeledPoint:
    """An event radius together with the interesting value there.

    For zeros of u the value is u' (the crossing slope); for criticals the
    value is u; for zeros of v it is v'.
    """

    r: float
    value: float


@dataclass(frozen=True)
class PhaseLabels:
    """Amplitude crossings inside one phase.

    ``index`` is 1-based.  A phase around the i-th zero carries, in radius
    order: b (|u| down through alpha_star), r (|u| down through 1), z (the
    zero), rbar (|u| up through 1), bbar (|u| up through alpha_star).  The
    final entry of a bound-like run has no zero: it records the decay
    crossings after the last critical point (b and r only).  Missing
    crossings are None; label names whose location brushed a tangency are
    listed in ``uncertain``.
    """

    index: int
    b: Optional[LabeledPoint] = None
    r: Optional[LabeledPoint] = None
    z: Optional[LabeledPoint] = None
    rbar: Optional[LabeledPoint] = None
    bbar: Optional[LabeledPoint] = None
    uncertain: tuple[str, ...] = ()


@dataclass
class PhasePortrait:
    """Ordered event summary of one trajectory."""

    zeros_u: list[LabeledPoint]
    crits_u: list[LabeledPoint]
    tail_crits_u: list[LabeledPoint]
    zeros_v: list[LabeledPoint]
    inflections_u: list[float]
    phases: list[PhaseLabels]
    phase_kind: str
    truncated: bool


@dataclass(frozen=True)
class NodeCount:
    """Sign-change count plus whether it can still grow.

    The count is final exactly when the run ended in the energy trap: from
    then on the profile is confined strictly between 0 and the well zero,
    so no further sign change can occur.
    """

    count: int
    final: bool


def _refine_root(g: Callable[[float], float], lo: float, hi: float) -> float:
    """Root of g in [lo, hi] by bisection with secant polish.

    Assumes g(lo) and g(hi) have opposite (nonzero) signs.  Bisection takes
    the bracket down to ~1e3 times the target tolerance, then secant steps
    finish; a secant step that leaves the bracket falls back to bisection.
    """
    glo = g(lo)
    ghi = g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if (glo < 0.0) == (ghi < 0.0):
        raise ValueError("root refinement called without a sign change")
    tol = _RADIUS_TOL * max(1.0, abs(hi))
    while hi - lo > 1e3 * tol:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm < 0.0) == (glo < 0.0):
            lo, glo = mid, gm
        else:
            hi, ghi = mid, gm
    for _ in range(8):
        if hi - lo <= tol:
            break
        denom = ghi - glo
        if denom == 0.0:
            break
        x = hi - ghi * (hi - lo) / denom
        if not (lo < x < hi):
            x = 0.5 * (lo + hi)
        gx = g(x)
        if gx == 0.0:
            return x
        if (gx < 0.0) == (glo < 0.0):
            lo, glo = x, gx
        else:
            hi, ghi = x, gx
    return 0.5 * (lo + hi)


def _grid(traj: Trajectory) -> tuple[list[float], list[State]]:
    """Knots plus segment midpoints; fine enough to isolate every event."""
    rs: list[float] = []
    states: list[State] = []
    knots = traj.knots
    for i in range(len(knots) - 1):
        rs.append(knots[i])
        states.append(traj.state_at_knot(i))
        mid = 0.5 * (knots[i] + knots[i + 1])
        rs.append(mid)
        states.append(traj.eval_dense(mid))
    rs.append(knots[-1])
    states.append(traj.state_at_knot(len(knots) - 1))
    return rs, states


def _sign_change_roots(
    rs: list[float],
    vals: list[float],
    g: Callable[[float], float],
) -> list[float]:
    roots = []
    for i in range(len(rs) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            continue
        if b == 0.0 or (a < 0.0) != (b < 0.0):
            roots.append(_refine_root(g, rs[i], rs[i + 1]))
    return roots


def _u_second(traj: Trajectory, s: State) -> float:
    fld = traj.params.field
    fu = (abs_pow(s.u, fld.p - 1.0) - 1.0) * s.u
    return -(fld.n - 1.0) / s.r * s.up - fu


def detect_events(traj: Trajectory, amplitudes: CriticalAmplitudes) -> PhasePortrait:
    """Locate all events and assemble the phase structure.

    Raises InterlacingViolation when zeros/criticals cannot be reconciled
    and AmbiguousEvent when two located events collapse onto each other.
    """
    fld = traj.params.field
    alpha_star = amplitudes.alpha_star
    rs, sts = _grid(traj)
    us = [s.u for s in sts]
    ups = [s.up for s in sts]
    vs = [s.v for s in sts]
    upps = [_u_second(traj, s) for s in sts]

    du = lambda r: traj.eval_dense(r).u
    dup = lambda r: traj.eval_dense(r).up
    dv = lambda r: traj.eval_dense(r).v
    dupp = lambda r: _u_second(traj, traj.eval_dense(r))

    zero_rs = _sign_change_roots(rs, us, du)
    crit_rs = _sign_change_roots(rs, ups, dup)
    zv_rs = _sign_change_roots(rs, vs, dv)
    infl_rs = _sign_change_roots(rs, upps, dupp)

    zeros_u = [LabeledPoint(r=r, value=traj.eval_dense(r).up) for r in zero_rs]
    zeros_v = [LabeledPoint(r=r, value=traj.eval_dense(r).vp) for r in zv_rs]
    crits_all = [LabeledPoint(r=r, value=traj.eval_dense(r).u) for r in crit_rs]

    # Overlap guard: a zero and a critical of u cannot coincide (the profile
    # would be identically zero), nor can two events of the same kind.
    merged = sorted(zero_rs + crit_rs)
    for i in range(len(merged) - 1):
        if merged[i + 1] - merged[i] < 10.0 * _RADIUS_TOL * max(1.0, merged[i]):
            raise AmbiguousEvent(
                f"events at r={merged[i]!r} and r={merged[i + 1]!r} overlap within locator tolerance"
            )

    # Split criticals into phase criticals (interlaced with zeros, plus the
    # one bound-like critical after the last zero whose height clears the
    # well zero) and trapped-tail criticals.
    k = len(zeros_u)
    crits_phase: list[LabeledPoint] = []
    tail_crits: list[LabeledPoint] = []
    if k == 0:
        tail_crits = crits_all
    else:
        before_first = [c for c in crits_all if c.r < zeros_u[0].r]
        if before_first:
            raise InterlacingViolation(
                f"{len(before_first)} critical point(s) before the first zero; "
                "integration tolerance too loose?"
            )
        for i in range(k - 1):
            inside = [c for c in crits_all if zeros_u[i].r < c.r < zeros_u[i + 1].r]
            if len(inside) != 1:
                raise InterlacingViolation(
                    f"expected exactly one critical between zeros {i + 1} and {i + 2}, found {len(inside)}"
                )
            crits_phase.append(inside[0])
        after_last = [c for c in crits_all if c.r > zeros_u[-1].r]
        if after_last:
            head = after_last[0]
            if abs(head.value) > alpha_star:
                crits_phase.append(head)
                rest = after_last[1:]
            else:
                rest = after_last
            for c in rest:
                if abs(c.value) > alpha_star * (1.0 + _TANGENCY_TOL):
                    raise InterlacingViolation(
                        f"trapped-tail critical at r={c.r} has |u|={abs(c.value)} above the well zero"
                    )
            tail_crits = rest

    bound_like = len(crits_phase) == k and k > 0
    if k == 0:
        bound_like = len(crits_all) == 0

    if traj.termination.tag == ENERGY_NONPOSITIVE or tail_crits:
        phase_kind = TAIL_OSCILLATORY
    else:
        phase_kind = SEMI_TAIL

    # Phase labels.  Phase i spans (c_{i-1}, c_i) with c_0 the origin; the
    # profile is monotone between its endpoints' criticals, so each level
    # is crossed at most once per half-phase.
    def crossing(level: float, lo: float, hi: float) -> Optional[float]:
        g = lambda r: abs(traj.eval_dense(r).u) - level
        pts = [r for r in rs if lo < r < hi]
        grid = [lo] + pts + [hi]
        gv = [g(r) for r in grid]
        for i in range(len(grid) - 1):
            if gv[i] == 0.0:
                return grid[i]
            if gv[i + 1] == 0.0 or (gv[i] < 0.0) != (gv[i + 1] < 0.0):
                return _refine_root(g, grid[i], grid[i + 1])
        return None

    def labeled(r: Optional[float]) -> Optional[LabeledPoint]:
        if r is None:
            return None
        return LabeledPoint(r=r, value=traj.eval_dense(r).u)

    phases: list[PhaseLabels] = []
    truncated = False
    for i in range(1, k + 1):
        left = crits_phase[i - 2].r if i >= 2 else traj.r_start
        z = zeros_u[i - 1]
        right = crits_phase[i - 1].r if i - 1 < len(crits_phase) else None
        uncertain: list[str] = []
        b = labeled(crossing(alpha_star, left, z.r))
        r1 = labeled(crossing(1.0, b.r if b else left, z.r))
        rbar = bbar = None
        if right is not None:
            rbar = labeled(crossing(1.0, z.r, right))
            bbar = labeled(crossing(alpha_star, rbar.r if rbar else z.r, right))
            c_height = abs(traj.eval_dense(right).u)
            for name, level in (("bbar", alpha_star), ("rbar", 1.0)):
                if abs(c_height - level) < _TANGENCY_TOL * max(1.0, level):
                    uncertain.append(name)
        else:
            truncated = True
        phases.append(
            PhaseLabels(
                index=i,
                b=b,
                r=r1,
                z=z,
                rbar=rbar,
                bbar=bbar,
                uncertain=tuple(uncertain),
            )
        )

    # Bound-like decay after the closing critical: record where |u| falls
    # back through alpha_star and 1 (the final, zero-less entry).
    if bound_like and phase_kind == SEMI_TAIL:
        left = crits_phase[-1].r if crits_phase else traj.r_start
        b = labeled(crossing(alpha_star, left, traj.r_end))
        r1 = labeled(crossing(1.0, b.r if b else left, traj.r_end))
        if b is not None or r1 is not None:
            phases.append(PhaseLabels(index=k + 1, b=b, r=r1))

    return PhasePortrait(
        zeros_u=zeros_u,
        crits_u=crits_phase,
        tail_crits_u=tail_crits,
        zeros_v=zeros_v,
        inflections_u=infl_rs,
        phases=phases,
        phase_kind=phase_kind,
        truncated=truncated,
    )


def count_nodes(traj: Trajectory) -> NodeCount:
    """Sign changes of u over the run; final only in the energy trap.

    Raises IndeterminateCount if the stepper gave up (step limit or
    underflow): such a run says nothing trustworthy about the count.
    """
    tag = traj.termination.tag
    if tag in (STEP_LIMIT, STEP_UNDERFLOW):
        raise IndeterminateCount(f"run ended with {tag}: {traj.termination.detail}")
    count = 0
    prev = traj.states[0][0]
    for i in range(len(traj.seg_coeffs)):
        mid = traj.eval_dense(0.5 * (traj.knots[i] + traj.knots[i + 1])).u
        for val in (mid, traj.states[i + 1][0]):
            if val != 0.0:
                if prev != 0.0 and (prev < 0.0) != (val < 0.0):
                    count += 1
                prev = val
    return NodeCount(count=count, final=(tag == ENERGY_NONPOSITIVE))


@dataclass(frozen=True)
class InflectionInterval:
    lo: float
    hi: float
    radii: tuple[float, ...]


@dataclass(frozen=True)
class InflectionReport:
    intervals: tuple[InflectionInterval, ...]
    unique_everywhere: bool


def unique_inflection_check(traj: Trajectory, portrait: PhasePortrait) -> InflectionReport:
    """Count concavity flips per descending half-phase.

    Each interval from a critical point (or the origin) down to the next
    zero -- and, for a bound-like run, from the closing critical down to
    where the decaying profile crosses the rest height -- should contain
    exactly one inflection of u.
    """
    intervals: list[InflectionInterval] = []
    ok = True
    for ph in portrait.phases:
        if ph.z is not None:
            lo = traj.r_start if ph.index == 1 else portrait.crits_u[ph.index - 2].r
            hi = ph.z.r
        elif ph.r is not None:
            lo = portrait.crits_u[-1].r if portrait.crits_u else traj.r_start
            hi = ph.r.r
        else:
            continue
        inside = tuple(x for x in portrait.inflections_u if lo < x < hi)
        intervals.append(InflectionInterval(lo=lo, hi=hi, radii=inside))
        if len(inside) != 1:
            ok = False
    return InflectionReport(intervals=tuple(intervals), unique_everywhere=ok)


def find_zeros(traj: Trajectory, component: str = "u") -> list[float]:
    """Zero radii of one state component (cheap path: no phase structure)."""
    if component not in ("u", "up", "v", "vp"):
        raise ValueError(f"unknown component {component!r}")
    rs, sts = _grid(traj)
    vals = [getattr(s, component) for s in sts]
    return _sign_change_roots(rs, vals, lambda r: getattr(traj.eval_dense(r), component))
