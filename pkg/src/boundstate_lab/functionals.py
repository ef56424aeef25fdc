"""Auxiliary functionals along a trajectory and their differential identities.

Every comparison functional used by the classification argument is evaluated
here from a dense-output state: energy layers (E, Ê), Pohozaev-type layers
(P, P1, P2), the logarithmic slope ω, the variation pairings (ϱ, Q and its
shifted family Q1, Q2, Qn, M, the Wronskian-corrected T1, T2, B0), and the
tail weight ϖ.  Each functional satisfies a first-order identity in r; the
identity checker differentiates the left side by central differences on the
dense output and compares against the closed-form right side, normalized by
the largest magnitude seen for that identity along the trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .field import FieldParams, abs_pow, big_F, big_F_a, f, f_prime, g1, g2, kappa_a
from .integrate import State, Trajectory
from .quadrature import adaptive_quadrature

_GOLDEN = 0.6180339887498949

# Guard thresholds for identities with a removable or genuine singularity.
# Probes are admissible only when the denominator variable is both large
# relative to its derivative scale and large in absolute terms, so a central
# difference with h ~ 1e-5 never straddles a sign change.
_RATIO_FLOOR = 0.04
_ABS_FLOOR = 0.02

# Identities that divide by a power of r amplify dense-output error near the
# origin (the finite difference sees interpolant noise scaled by 1/r^n), so
# they carry a minimum-radius guard.
_R_FLOOR = 0.1


class ProbeUndefined(ValueError):
    """A probe radius landed where an identity's functions are undefined."""


class MissingEvents(RuntimeError):
    """The portrait lacks the events needed to place an integration range."""


class SingularityWarning(RuntimeError):
    """u' vanishes inside an integration range that assumes it does not."""


@dataclass(frozen=True)
class AuxSample:
    """All auxiliary functionals at one radius.

    Entries are None where the functional is undefined: omega, T1 and T2
    need u != 0; B0, phi_n and varpi need u' != 0.
    """

    r: float
    E: float
    E_hat: float
    P: float
    P1: float
    P2: float
    omega: float | None
    rho: float
    Q: float
    Q1: float
    Q2: float
    Qn: float
    M: float
    T1: float | None
    T2: float | None
    B0: float | None
    phi_n: float | None
    varpi: float | None


@dataclass(frozen=True)
class ParametricSample:
    """The a-indexed family W_a = Q - a M and its tilted-energy correction."""

    r: float
    a: float
    W_a: float
    B_a: float | None
    F_a_of_u: float


def eval_aux(state: State, field: FieldParams) -> AuxSample:
    n, p = field.n, field.p
    r, u, up, v, vp = state.r, state.u, state.up, state.v, state.vp
    fu = f(u, field)
    fpu = f_prime(u, field)
    Fu = big_F(u, field)
    rn = r**n
    rn1 = r ** (n - 1)

    E = 0.5 * up * up + Fu
    E_hat = r ** (2 * (n - 1)) * E
    P = 2.0 * rn * E + (n - 2) * rn1 * u * up
    P1 = rn * (up * up + u * fu) + (n - 2) * rn1 * u * up
    P2 = rn * (up * up + (n - 2) / n * u * fu) + (n - 2) * rn1 * u * up
    rho = rn1 * (fpu * up * v - fu * vp)
    Q = rn * (up * vp + fu * v) + (n - 2) * rn1 * up * v
    Q1 = Q + rn1 * up * v
    Q2 = Q + 2.0 * rn1 * up * v
    Qn = Q + n * rn1 * up * v
    M = rn1 * (up * v - u * vp)

    omega = None
    T1 = None
    T2 = None
    if u != 0.0:
        omega = -r * up / u
        T1 = Q - g1(u, field) * M
        T2 = Q - g2(u, field) * M

    B0 = None
    phi_n = None
    varpi = None
    if up != 0.0:
        B0 = Q - 2.0 * Fu * rn1 * v / up
        phi_n = Qn / (r * up * up)
        varpi = (p - 1.0) / (p + 1.0) * rn1 * (v / up) * abs_pow(u, p + 1.0)

    return AuxSample(
        r=r, E=E, E_hat=E_hat, P=P, P1=P1, P2=P2, omega=omega, rho=rho,
        Q=Q, Q1=Q1, Q2=Q2, Qn=Qn, M=M, T1=T1, T2=T2, B0=B0,
        phi_n=phi_n, varpi=varpi,
    )


def eval_parametric(state: State, a: float, field: FieldParams) -> ParametricSample:
    n = field.n
    r, u, up, v, vp = state.r, state.u, state.up, state.v, state.vp
    fu = f(u, field)
    rn1 = r ** (n - 1)
    Q = r**n * (up * vp + fu * v) + (n - 2) * rn1 * up * v
    M = rn1 * (up * v - u * vp)
    W = Q - a * M
    B = None
    if up != 0.0:
        B = W - 2.0 * big_F_a(u, a, field) * rn1 * v / up
    return ParametricSample(r=r, a=a, W_a=W, B_a=B, F_a_of_u=big_F_a(u, a, field))


# Identity registry.  Each entry maps a name to (lhs, rhs, guards) where lhs
# is the quantity differentiated by central differences, rhs is the closed
# form its derivative must equal, and guards names the state variables that
# must stay away from zero ("u", "up").
_StateFn = Callable[[State, FieldParams, float], float]


def _id_table() -> dict[str, tuple[_StateFn, _StateFn, tuple[str, ...]]]:
    def _E(s, fl, a):
        return 0.5 * s.up**2 + big_F(s.u, fl)

    def _E_rhs(s, fl, a):
        return -(fl.n - 1) * s.up**2 / s.r

    def _Ehat(s, fl, a):
        return s.r ** (2 * (fl.n - 1)) * _E(s, fl, a)

    def _Ehat_rhs(s, fl, a):
        return 2.0 * (fl.n - 1) * s.r ** (2 * fl.n - 3) * big_F(s.u, fl)

    def _P(s, fl, a):
        return 2.0 * s.r**fl.n * _E(s, fl, a) + (fl.n - 2) * s.r ** (fl.n - 1) * s.u * s.up

    def _P_rhs(s, fl, a):
        n = fl.n
        return s.r ** (n - 1) * (2.0 * n * big_F(s.u, fl) - (n - 2) * s.u * f(s.u, fl))

    def _P_rhs_crit(s, fl, a):
        upper = ((fl.p + 1.0) * 2.0 / ((fl.n + 2.0) - fl.p * (fl.n - 2.0))) ** (1.0 / (fl.p - 1.0))
        return 2.0 * s.r ** (fl.n - 1) * s.u**2 * (abs_pow(s.u / upper, fl.p - 1.0) - 1.0)

    def _P1(s, fl, a):
        n = fl.n
        return s.r**n * (s.up**2 + s.u * f(s.u, fl)) + (n - 2) * s.r ** (n - 1) * s.u * s.up

    def _P2(s, fl, a):
        n = fl.n
        return s.r**n * (s.up**2 + (n - 2) / n * s.u * f(s.u, fl)) + (n - 2) * s.r ** (n - 1) * s.u * s.up

    def _P2_rhs(s, fl, a):
        n, p = fl.n, fl.p
        star = ((p + 1.0) / 2.0) ** (1.0 / (p - 1.0))
        upper = ((p + 1.0) * 2.0 / ((n + 2.0) - p * (n - 2.0))) ** (1.0 / (p - 1.0))
        return -(4.0 / n) * s.r**n * s.u * s.up * (abs_pow(star * s.u / upper, p - 1.0) - 1.0)

    def _P_over_rn(s, fl, a):
        return _P(s, fl, a) / s.r**fl.n

    def _P_over_rn_rhs(s, fl, a):
        return -fl.n / s.r ** (fl.n + 1) * _P2(s, fl, a)

    def _omega(s, fl, a):
        return -s.r * s.up / s.u

    def _omega_rhs(s, fl, a):
        return _P1(s, fl, a) / (s.r ** (fl.n - 1) * s.u**2)

    def _what(s, fl, a):
        return -s.up / s.u

    def _what_rhs(s, fl, a):
        w = -s.up / s.u
        return w * w - (fl.n - 1) / s.r * w - 1.0 + abs_pow(s.u, fl.p - 1.0)

    def _rho(s, fl, a):
        return s.r ** (fl.n - 1) * (f_prime(s.u, fl) * s.up * s.v - f(s.u, fl) * s.vp)

    def _rho_rhs(s, fl, a):
        p = fl.p
        return p * (p - 1.0) * s.r ** (fl.n - 1) * math.copysign(abs_pow(s.u, p - 2.0), s.u) * s.up**2 * s.v

    def _Q(s, fl, a):
        n = fl.n
        return s.r**n * (s.up * s.vp + f(s.u, fl) * s.v) + (n - 2) * s.r ** (n - 1) * s.up * s.v

    def _Q_rhs(s, fl, a):
        return 2.0 * s.r ** (fl.n - 1) * f(s.u, fl) * s.v

    def _M(s, fl, a):
        return s.r ** (fl.n - 1) * (s.up * s.v - s.u * s.vp)

    def _M_rhs(s, fl, a):
        p = fl.p
        return (p - 1.0) * s.r ** (fl.n - 1) * s.u * abs_pow(s.u, p - 1.0) * s.v

    def _W(s, fl, a):
        return _Q(s, fl, a) - a * _M(s, fl, a)

    def _W_rhs(s, fl, a):
        return 2.0 * s.r ** (fl.n - 1) * s.u * s.v * kappa_a(s.u, a, fl)

    def _T1(s, fl, a):
        return _Q(s, fl, a) - g1(s.u, fl) * _M(s, fl, a)

    def _T1_rhs(s, fl, a):
        return -2.0 * s.u * s.up / abs_pow(s.u, fl.p + 1.0) * _M(s, fl, a)

    def _T2(s, fl, a):
        return _Q(s, fl, a) - g2(s.u, fl) * _M(s, fl, a)

    def _T2_rhs(s, fl, a):
        p = fl.p
        lead = (p - 1.0) * s.r ** (fl.n - 1) * s.u * s.v
        return lead - (p + 1.0) * s.u * s.up / abs_pow(s.u, p + 1.0) * _M(s, fl, a)

    def _varpi(s, fl, a):
        p = fl.p
        return (p - 1.0) / (p + 1.0) * s.r ** (fl.n - 1) * (s.v / s.up) * abs_pow(s.u, p + 1.0)

    def _T2_rhs_tail(s, fl, a):
        p = fl.p
        return -(p + 1.0) * s.u * s.up / abs_pow(s.u, p + 1.0) * (_M(s, fl, a) - _varpi(s, fl, a))

    def _B0(s, fl, a):
        return _Q(s, fl, a) - 2.0 * big_F(s.u, fl) * s.r ** (fl.n - 1) * s.v / s.up

    def _phi(s, fl, a):
        Qn = _Q(s, fl, a) + fl.n * s.r ** (fl.n - 1) * s.up * s.v
        return Qn / (s.r * s.up**2)

    def _B0_rhs(s, fl, a):
        return -2.0 * big_F(s.u, fl) * _phi(s, fl, a)

    def _Ba(s, fl, a):
        return _W(s, fl, a) - 2.0 * big_F_a(s.u, a, fl) * s.r ** (fl.n - 1) * s.v / s.up

    def _Ba_rhs(s, fl, a):
        return -2.0 * big_F_a(s.u, a, fl) * _phi(s, fl, a)

    def _rnu(s, fl, a):
        return s.r ** (fl.n - 1) * s.up

    def _rnu_rhs(s, fl, a):
        return -s.r ** (fl.n - 1) * f(s.u, fl)

    def _rnv(s, fl, a):
        return s.r ** (fl.n - 1) * s.vp

    def _rnv_rhs(s, fl, a):
        return -s.r ** (fl.n - 1) * f_prime(s.u, fl) * s.v

    def _pair(s, fl, a):
        return s.up * s.vp + f(s.u, fl) * s.v

    def _pair_rhs(s, fl, a):
        return -2.0 * (fl.n - 1) / s.r * s.up * s.vp

    def _qslope(s, fl, a):
        return _Q(s, fl, a) / (s.r ** (fl.n - 1) * s.up)

    def _qslope_rhs(s, fl, a):
        Q2 = _Q(s, fl, a) + 2.0 * s.r ** (fl.n - 1) * s.up * s.v
        return f(s.u, fl) * Q2 / (s.r ** (fl.n - 1) * s.up**2)

    def _vslope(s, fl, a):
        return s.r ** (fl.n - 1) * s.v / s.up

    return {
        "energy": (_E, _E_rhs, ()),
        "energy_layer": (_Ehat, _Ehat_rhs, ()),
        "pohozaev": (_P, _P_rhs, ()),
        "pohozaev_crit": (_P, _P_rhs_crit, ()),
        "pohozaev_p2": (_P2, _P2_rhs, ()),
        "pohozaev_scaled": (_P_over_rn, _P_over_rn_rhs, ("r",)),
        "log_slope": (_omega, _omega_rhs, ("u",)),
        "riccati": (_what, _what_rhs, ("u",)),
        "pairing_rho": (_rho, _rho_rhs, ("u",)),
        "pairing_q": (_Q, _Q_rhs, ()),
        "wronskian_m": (_M, _M_rhs, ()),
        "family_w": (_W, _W_rhs, ()),
        "corrected_t1": (_T1, _T1_rhs, ("u",)),
        "corrected_t2": (_T2, _T2_rhs, ("u",)),
        "corrected_t2_tail": (_T2, _T2_rhs_tail, ("u", "up")),
        "barrier_b0": (_B0, _B0_rhs, ("up",)),
        "barrier_ba": (_Ba, _Ba_rhs, ("up",)),
        "flux_u": (_rnu, _rnu_rhs, ()),
        "flux_v": (_rnv, _rnv_rhs, ()),
        "pair_product": (_pair, _pair_rhs, ()),
        "q_slope": (_qslope, _qslope_rhs, ("up",)),
        "v_slope": (_vslope, _phi, ("up",)),
    }


_IDENTITIES = _id_table()

IDENTITY_NAMES: tuple[str, ...] = tuple(_IDENTITIES)


@dataclass(frozen=True)
class IdentityResidual:
    identity: str
    probes_used: int
    max_abs_residual: float
    scale: float
    worst_r: float

    @property
    def max_rel_residual(self) -> float:
        if self.scale == 0.0:
            return 0.0
        return self.max_abs_residual / self.scale


@dataclass(frozen=True)
class IdentityReport:
    residuals: tuple[IdentityResidual, ...]
    connection_rel_residual: float
    connection_worst_r: float
    connection_probes: int

    def worst(self) -> IdentityResidual:
        return max(self.residuals, key=lambda rec: rec.max_rel_residual)


def _up_admissible(state: State, field: FieldParams) -> bool:
    # u'' from the field equation bounds how fast u' can cross zero.  The
    # floors are 1.5x the u ones: quotients by u' are differentiated, which
    # squares the amplification near a critical radius.
    upp = abs((field.n - 1) / state.r * state.up + f(state.u, field))
    scale = max(1.0, upp)
    return abs(state.up) >= 1.5 * _ABS_FLOOR and abs(state.up) >= 1.5 * _RATIO_FLOOR * scale


def _u_admissible(state: State) -> bool:
    scale = max(1.0, abs(state.up))
    return abs(state.u) >= _ABS_FLOOR and abs(state.u) >= _RATIO_FLOOR * scale


def _admits(state: State, field: FieldParams, guards: tuple[str, ...]) -> bool:
    if "u" in guards and not _u_admissible(state):
        return False
    if "up" in guards and not _up_admissible(state, field):
        return False
    if "r" in guards and state.r < _R_FLOOR:
        return False
    return True


def probe_radii(
    traj: Trajectory,
    count: int,
    r_lo: float | None = None,
    r_hi: float | None = None,
    exclusion_radii: Iterable[float] = (),
    h_scale: float = 1e-5,
    exclusion_halfwidth: float = 0.05,
) -> list[float]:
    """Low-discrepancy probe radii, kept clear of events and segment knots.

    A golden-ratio sequence fills (r_lo, r_hi).  Candidates within
    exclusion_halfwidth of an exclusion radius are dropped: for fractional
    powers the state is only finitely smooth across zeros of u, so the
    interpolant needs a real moat there, not just collision avoidance.
    Candidates whose central-difference stencil would straddle a
    dense-output knot are shifted into the containing segment, or dropped
    if the segment is too short to hold the stencil.
    """
    knots = traj.knots
    lo = traj.r_start if r_lo is None else max(r_lo, traj.r_start)
    hi = traj.r_end if r_hi is None else min(r_hi, traj.r_end)
    span = hi - lo
    if span <= 0.0:
        return []
    excl = sorted(exclusion_radii)
    out: list[float] = []
    x = 0.5
    for _ in range(count):
        x = (x + _GOLDEN) % 1.0
        r = lo + span * x
        h = h_scale * max(1.0, r)
        if r - 2.0 * h <= lo or r + 2.0 * h >= hi:
            continue
        if any(abs(r - e) < exclusion_halfwidth for e in excl):
            continue
        seg = traj.segment_index(r)
        a, b = knots[seg], knots[seg + 1]
        if b - a < 4.0 * h:
            continue
        if r - h < a:
            r = a + 1.25 * h
        elif r + h > b:
            r = b - 1.25 * h
        out.append(r)
    return sorted(set(out))


def identity_residuals(
    traj: Trajectory,
    probes: Sequence[float],
    identities: Sequence[str] | None = None,
    a: float = 1.0,
    h_scale: float = 1e-5,
    strict: bool = False,
) -> IdentityReport:
    """Central-difference check of every registered identity at the probes.

    For each identity the left side is differentiated with a 2h central
    stencil on the dense output and compared to the closed-form right side
    evaluated at the probe.  Residuals are reported relative to the largest
    magnitude (of either side) the identity attains over the probe set.
    With strict=True a probe failing an identity's guard raises
    ProbeUndefined instead of being skipped.
    """
    field = traj.params.field
    names = list(identities) if identities is not None else list(_IDENTITIES)
    for name in names:
        if name not in _IDENTITIES:
            raise KeyError(f"unknown identity: {name}")

    per = {name: [] for name in names}  # (residual, scale contribution, r)
    for r in probes:
        if not traj.r_start < r < traj.r_end:
            raise ProbeUndefined(f"probe {r} outside trajectory range")
        h = h_scale * max(1.0, r)
        s_mid = traj.eval_dense(r)
        s_lo = traj.eval_dense(r - h)
        s_hi = traj.eval_dense(r + h)
        for name in names:
            lhs, rhs, guards = _IDENTITIES[name]
            if not _admits(s_mid, field, guards):
                if strict:
                    raise ProbeUndefined(f"identity {name} undefined near r={r}")
                continue
            fd = (lhs(s_hi, field, a) - lhs(s_lo, field, a)) / (2.0 * h)
            want = rhs(s_mid, field, a)
            per[name].append((abs(fd - want), max(abs(fd), abs(want)), r))

    recs = []
    for name in names:
        rows = per[name]
        if not rows:
            recs.append(IdentityResidual(name, 0, 0.0, 0.0, math.nan))
            continue
        scale = max(1.0e-30, max(row[1] for row in rows))
        worst = max(rows, key=lambda row: row[0])
        recs.append(IdentityResidual(name, len(rows), worst[0], scale, worst[2]))

    # Pointwise connection between the u-frame and v-frame functionals:
    # Q - P v/u = omega (M - varpi), checked without differentiation.
    conn_worst = 0.0
    conn_r = math.nan
    conn_n = 0
    for r in probes:
        s = traj.eval_dense(r)
        if not (_u_admissible(s) and _up_admissible(s, field)):
            continue
        aux = eval_aux(s, field)
        lhs = aux.Q - aux.P * s.v / s.u
        rhs = aux.omega * (aux.M - aux.varpi)
        scale = abs(aux.Q) + abs(aux.P * s.v / s.u) + 1e-30
        rel = abs(lhs - rhs) / scale
        conn_n += 1
        if rel > conn_worst:
            conn_worst = rel
            conn_r = r
    return IdentityReport(tuple(recs), conn_worst, conn_r, conn_n)


@dataclass(frozen=True)
class BridgeIntegral:
    value: float
    error_estimate: float
    r_lo: float
    r_hi: float
    u_tilde: float
    empty_range: bool


def bridge_integral(
    traj: Trajectory,
    b_i: float,
    tau_i: float,
    u_tilde: float,
    rel_tol: float = 1e-10,
) -> BridgeIntegral:
    """I = integral over (b_i, tau_i) of u^2 (1 - |u/ũ|^{p-1}) Qn / (r u'^2).

    Flags an empty range (tau_i <= b_i) rather than failing; raises
    SingularityWarning if u' vanishes at any quadrature node.
    """
    if math.isnan(b_i) or math.isnan(tau_i):
        raise MissingEvents("bridge integral needs both b_i and tau_i")
    if u_tilde <= 0.0:
        raise MissingEvents("bridge integral needs a positive height u_tilde")
    if tau_i <= b_i:
        return BridgeIntegral(0.0, 0.0, b_i, tau_i, u_tilde, True)
    field = traj.params.field
    p = field.p

    def integrand(r: float) -> float:
        s = traj.eval_dense(r)
        if s.up == 0.0:
            raise SingularityWarning(f"u' vanishes at r={r} inside the bridge range")
        aux = eval_aux(s, field)
        weight = s.u**2 * (1.0 - abs_pow(s.u / u_tilde, p - 1.0))
        return weight * aux.Qn / (r * s.up**2)

    value, err = adaptive_quadrature(integrand, b_i, tau_i, rel_tol=rel_tol)
    return BridgeIntegral(value, err, b_i, tau_i, u_tilde, False)
