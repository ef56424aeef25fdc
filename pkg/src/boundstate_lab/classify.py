"""Classification of shots by amplitude and the node-count ladder.

A shot from height alpha either stays trapped in the potential well
(oscillatory tail, nonpositive energy in finite radius), escapes along the
separatrix (a bound-state candidate with exponential decay), or sits at the
rest height alpha = 1.  Between consecutive ladder amplitudes the node count
is constant, and it jumps by one at each alpha_k; find_alpha_k brackets the
jump by bisection on the final node count.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .field import FieldParams, critical_amplitudes
from .integrate import (
    CLASSIFY_POLICY,
    ENERGY_NONPOSITIVE,
    REACHED_RMAX,
    IntegratorControls,
    ProblemParams,
    Trajectory,
    integrate,
)
from .portrait import IndeterminateCount, NodeCount, count_nodes

CONSTANT = "Constant"
OSCILLATORY = "Oscillatory"
BOUND_STATE_CANDIDATE = "BoundStateCandidate"
INDETERMINATE = "Indeterminate"


class BracketNotFound(RuntimeError):
    """No amplitude bracket with the requested node-count jump."""


class MonotonicityViolation(RuntimeError):
    """Observed node counts decreased somewhere along increasing alpha."""


@dataclass(frozen=True)
class Witness:
    """Numerical evidence backing a classification."""

    r_stop: float
    termination_tag: str
    u_end: float
    up_end: float
    energy_nonpositive_radius: float | None = None
    decay_slope_error: float | None = None


@dataclass(frozen=True)
class SolutionClass:
    tag: str
    node_count: int | None
    oscillation_center: int | None
    witness: Witness
    detail: str = ""


def _decay_evidence(traj: Trajectory, decay_eps: float, slope_eps: float) -> tuple[bool, float | None]:
    end = traj.state_at_knot(len(traj.knots) - 1)
    if abs(end.u) >= decay_eps or end.u == 0.0:
        return False, None
    err = abs(end.up / end.u + 1.0)
    return err < slope_eps, err


def classify(
    field: FieldParams,
    alpha: float,
    controls: IntegratorControls | None = None,
    decay_eps: float = 1e-6,
    slope_eps: float = 0.05,
) -> SolutionClass:
    """Classify the shot from height alpha.

    Constant at the rest height; Oscillatory once the energy turns
    nonpositive (the shot is trapped and oscillates around +-1 forever);
    BoundStateCandidate when the run reaches r_max with |u| < decay_eps and
    logarithmic slope within slope_eps of the decay rate -1.  A run that
    reaches r_max without decay evidence is retried once at doubled r_max
    before giving up as Indeterminate.
    """
    ctrl = controls if controls is not None else IntegratorControls()
    if alpha == 1.0:
        w = Witness(r_stop=0.0, termination_tag=CONSTANT, u_end=1.0, up_end=0.0)
        return SolutionClass(CONSTANT, 0, None, w, "shot from the rest height")

    traj = integrate(ProblemParams(field, alpha, ctrl), CLASSIFY_POLICY)
    if traj.termination.tag == REACHED_RMAX:
        decayed, _ = _decay_evidence(traj, decay_eps, slope_eps)
        if not decayed:
            traj = integrate(
                ProblemParams(field, alpha, ctrl.with_rmax(2.0 * ctrl.r_max)),
                CLASSIFY_POLICY,
            )

    tag = traj.termination.tag
    end = traj.state_at_knot(len(traj.knots) - 1)
    if tag == ENERGY_NONPOSITIVE:
        count = count_nodes(traj)
        center = 1 if end.u > 0.0 else -1
        w = Witness(
            r_stop=traj.termination.r_stop,
            termination_tag=tag,
            u_end=end.u,
            up_end=end.up,
            energy_nonpositive_radius=traj.termination.r_stop,
        )
        return SolutionClass(OSCILLATORY, count.count, center, w, "trapped by the well")
    if tag == REACHED_RMAX:
        decayed, err = _decay_evidence(traj, decay_eps, slope_eps)
        w = Witness(
            r_stop=traj.termination.r_stop,
            termination_tag=tag,
            u_end=end.u,
            up_end=end.up,
            decay_slope_error=err,
        )
        if decayed:
            count = count_nodes(traj)
            return SolutionClass(
                BOUND_STATE_CANDIDATE, count.count, None, w,
                "reached r_max inside the decay funnel",
            )
        return SolutionClass(INDETERMINATE, None, None, w, "no decision at r_max")
    w = Witness(
        r_stop=traj.termination.r_stop,
        termination_tag=tag,
        u_end=end.u,
        up_end=end.up,
    )
    return SolutionClass(INDETERMINATE, None, None, w, traj.termination.detail)


def node_count_of_alpha(
    field: FieldParams,
    alpha: float,
    controls: IntegratorControls | None = None,
) -> NodeCount:
    """Final node count of the shot from alpha.

    Counts are final once the energy has turned nonpositive (no further
    zeros can occur).  A run that reaches r_max still undecided is retried
    once at doubled r_max.
    """
    ctrl = controls if controls is not None else IntegratorControls()
    traj = integrate(ProblemParams(field, alpha, ctrl), CLASSIFY_POLICY)
    count = count_nodes(traj)
    if not count.final and traj.termination.tag == REACHED_RMAX:
        traj = integrate(
            ProblemParams(field, alpha, ctrl.with_rmax(2.0 * ctrl.r_max)),
            CLASSIFY_POLICY,
        )
        count = count_nodes(traj)
    return count


@dataclass(frozen=True)
class LadderEntry:
    k: int
    alpha_lo: float
    alpha_hi: float
    nodes_lo: int
    nodes_hi: int

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.alpha_lo + self.alpha_hi)

    @property
    def width(self) -> float:
        return self.alpha_hi - self.alpha_lo


@dataclass(frozen=True)
class AlphaLadder:
    field: FieldParams
    tol: float
    entries: tuple[LadderEntry, ...]

    def entry(self, k: int) -> LadderEntry:
        for item in self.entries:
            if item.k == k:
                return item
        raise KeyError(f"no ladder entry for k={k}")


class _CountCache:
    def __init__(self, field: FieldParams, controls: IntegratorControls | None):
        self.field = field
        self.controls = controls
        self.seen: dict[float, int] = {}

    def __call__(self, alpha: float) -> int:
        if alpha not in self.seen:
            count = node_count_of_alpha(self.field, alpha, self.controls)
            if not count.final:
                raise IndeterminateCount(
                    f"node count at alpha={alpha} still provisional after retry"
                )
            self.seen[alpha] = count.count
        return self.seen[alpha]

    def audit(self) -> None:
        rows = sorted(self.seen.items())
        for (a0, n0), (a1, n1) in zip(rows, rows[1:]):
            if n1 < n0:
                raise MonotonicityViolation(
                    f"node count fell from {n0} to {n1} between alpha={a0} and {a1}"
                )


def find_alpha_k(
    field: FieldParams,
    k: int,
    tol: float = 1e-10,
    controls: IntegratorControls | None = None,
    expansion_cap: float = 1e4,
) -> LadderEntry:
    """Bracket the k-th jump amplitude by bisection on the node count.

    Returns a bracket [alpha_lo, alpha_hi] of relative width <= tol with
    exactly k nodes on the left edge and k+1 on the right.  The search
    starts just above the upper critical amplitude (where the count is 0)
    and doubles outward; every count evaluated along the way is audited
    for monotonicity in alpha.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    amps = critical_amplitudes(field)
    counts = _CountCache(field, controls)

    lo = amps.alpha_upper_star * (1.0 + 1e-6)
    if counts(lo) > k:
        raise BracketNotFound(
            f"count already exceeds {k} at the lower search edge alpha={lo}"
        )
    hi = 2.0 * amps.alpha_upper_star
    while counts(hi) <= k:
        lo = hi
        hi *= 2.0
        if hi > expansion_cap * amps.alpha_upper_star:
            counts.audit()
            raise BracketNotFound(
                f"no jump past {k} nodes below alpha={hi:.6g}"
            )

    while hi - lo > tol * lo:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if counts(mid) <= k:
            lo = mid
        else:
            hi = mid

    counts.audit()
    nodes_lo, nodes_hi = counts(lo), counts(hi)
    if nodes_lo != k or nodes_hi != k + 1:
        raise BracketNotFound(
            f"bracket closed on counts ({nodes_lo}, {nodes_hi}), wanted ({k}, {k + 1})"
        )
    return LadderEntry(k=k, alpha_lo=lo, alpha_hi=hi, nodes_lo=nodes_lo, nodes_hi=nodes_hi)


def build_ladder(
    field: FieldParams,
    k_max: int,
    tol: float = 1e-10,
    controls: IntegratorControls | None = None,
) -> AlphaLadder:
    """Ladder entries for k = 0 .. k_max; amplitudes must come out increasing."""
    entries = []
    for k in range(k_max + 1):
        entries.append(find_alpha_k(field, k, tol=tol, controls=controls))
    for prev, cur in zip(entries, entries[1:]):
        if not cur.alpha_lo > prev.alpha_hi:
            raise MonotonicityViolation(
                f"ladder entries k={prev.k} and k={cur.k} are out of order"
            )
    return AlphaLadder(field=field, tol=tol, entries=tuple(entries))


@dataclass(frozen=True)
class ZeroMonotonicityReport:
    alphas: tuple[float, ...]
    first_zeros: tuple[float | None, ...]
    strictly_decreasing: bool
    violations: tuple[int, ...] = dc_field(default=())


def zero_monotonicity_scan(
    field: FieldParams,
    alphas: list[float],
    controls: IntegratorControls | None = None,
) -> ZeroMonotonicityReport:
    """First-zero radius z_1(alpha) across a scan; it must fall as alpha grows.

    Amplitudes whose shot never crosses zero report None and are skipped in
    the comparison.  violations holds the indices i where
    z_1(alphas[i]) >= z_1(alphas[i-1]).
    """
    from .portrait import find_zeros

    ctrl = controls if controls is not None else IntegratorControls()
    ordered = sorted(alphas)
    zs: list[float | None] = []
    for alpha in ordered:
        traj = integrate(ProblemParams(field, alpha, ctrl), CLASSIFY_POLICY)
        zeros = find_zeros(traj, "u")
        zs.append(zeros[0] if zeros else None)
    violations = []
    last = None
    for i, z in enumerate(zs):
        if z is None:
            continue
        if last is not None and z >= last:
            violations.append(i)
        last = z
    return ZeroMonotonicityReport(
        alphas=tuple(ordered),
        first_zeros=tuple(zs),
        strictly_decreasing=not violations,
        violations=tuple(violations),
    )
