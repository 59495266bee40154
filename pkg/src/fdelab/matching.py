"""Inner-outer matching: shift constants, glued barriers, corner analysis.

For each sign the shift C_eps(tau) solves

    phibar0(xi1 + C) = (1 +/- eps) e^{gamma tau} psi^{+/-}(A + xi1 e^{-gamma tau}, tau)

so the glued profile

    wbar(xi, tau) = phibar0(xi + C(tau)) / (1 +/- eps)   for xi <= xi1
                  = e^{gamma tau} psi(A + xi e^{-gamma tau}, tau)  for xi > xi1

is continuous at xi1.  The corner verdict compares one-sided slopes there;
epsilon bounds are the largest weights keeping the corner verdicts (eps1)
and the strict ordering psi+ > psi- > 0 (eps2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import errors, numerics
from .outer import OuterProfileSet
from .params import theta
from .selfsim import SelfSimilarProfile

__all__ = [
    "MatchingSolver",
    "GluedBarrier",
    "find_epsilon_bounds",
    "check_ordering",
]

_SIGN_FACTOR = {"+": 1.0, "-": -1.0}


class MatchingSolver:
    """Shift-constant solver with tau-memoization (tau rounded to 1e-12)."""

    def __init__(
        self,
        profile: SelfSimilarProfile,
        outer_set: OuterProfileSet,
        variant: str,
        root_tol: float = 1e-10,
    ):
        self.profile = profile
        self.outer = outer_set
        self.variant = variant
        self.root_tol = root_tol
        self._memo: dict = {}

    def outer_edge(self, sign: str, xi1: float, tau: float):
        """(e^{gamma tau} psi, psi_eta) at the matching edge gap xi1 e^{-gamma tau}."""
        gamma = self.outer.p.gamma
        gap = xi1 * math.exp(-gamma * tau)
        psi, dpsi, _, _ = self.outer.psi_bundle(self.variant, sign, tau, gap=np.asarray(gap))
        return float(np.exp(gamma * tau) * psi), float(dpsi)

    def solve_matching(self, sign: str, eps: float, xi1: float, tau: float) -> float:
        """Shift C with phibar0(xi1 + C) = (1 +/- eps) * outer edge value."""
        if sign not in _SIGN_FACTOR:
            raise errors.InvalidParameter(f"sign must be '+' or '-', got {sign!r}")
        if not (0.0 <= eps < 0.25):
            raise errors.EpsilonOutOfRange(f"eps must be in [0, 1/4), got {eps}")
        key = (sign, round(float(eps), 15), float(xi1), round(float(tau) * 1e12))
        if key in self._memo:
            return self._memo[key]
        edge_value, _ = self.outer_edge(sign, xi1, tau)
        target = (1.0 + _SIGN_FACTOR[sign] * eps) * edge_value
        if not np.isfinite(target) or target <= 0.0:
            raise errors.TargetBelowRange(
                f"matching target {target} not positive at tau={tau} "
                f"(outer profile not yet positive near A; increase tau)"
            )

        def g(C):
            return self.profile.phibar0(xi1 + C) - target

        C = numerics.find_root_monotone(g, -60.0, 380.0, tol=self.root_tol)
        self._memo[key] = C
        return C

    def C_prime(self, sign: str, eps: float, xi1: float, tau: float, h: float = 1e-4) -> float:
        cp = self.solve_matching(sign, eps, xi1, tau + h)
        cm = self.solve_matching(sign, eps, xi1, tau - h)
        return (cp - cm) / (2.0 * h)

    # -- quantitative matching limits ---------------------------------------

    def matching_limits(self, xi1: float, tau_ref: float = 40.0) -> dict:
        """Edge-value and edge-slope limits at large tau for both signs.

        plus : the edge value grows linearly in tau; its increment slope
               tends to (n-1) theta2_plus / A.
        minus: the edge value itself converges to
               a0 xi1/(gamma A) + (n-1) theta1_minus/(gamma A xi1).
        both : the edge slope psi_eta tends to
               a0/(gamma A) - (n-1) theta2/(gamma A xi1) - (n-1) theta1/(gamma A xi1^2).
        """
        p, d = self.outer.p, self.outer.d
        gamma, A, n = p.gamma, p.A, p.n
        out = {}
        taus = np.array([tau_ref - 10.0, tau_ref - 5.0, tau_ref])

        # plus edge value: increment slope over consecutive tau samples
        vals = [self.outer_edge("+", xi1, t)[0] for t in taus]
        inc = np.diff(vals) / np.diff(taus)
        limit_plus = (n - 1) * p.theta2_plus / A
        if abs(inc[-1] - inc[0]) > 0.05 * abs(limit_plus):
            raise errors.ExtrapolationUnstable(
                f"plus edge increment slope not settled: {inc}"
            )
        out["plus_increment_slope"] = float(inc[-1])
        out["plus_increment_limit"] = limit_plus
        out["plus_increment_rel_err"] = float(abs(inc[-1] - limit_plus) / abs(limit_plus))

        # minus edge value converges outright
        vminus = self.outer_edge("-", xi1, tau_ref)[0]
        limit_minus = d.a0 * xi1 / (gamma * A) + (n - 1) * p.theta1_minus / (gamma * A * xi1)
        out["minus_edge_value"] = float(vminus)
        out["minus_edge_limit"] = limit_minus
        out["minus_edge_rel_err"] = float(abs(vminus - limit_minus) / abs(limit_minus))

        # edge slopes for both signs
        for sign in ("+", "-"):
            th1 = theta(p, 1, sign)
            th2 = theta(p, 2, sign)
            slope = self.outer_edge(sign, xi1, tau_ref)[1]
            limit = (
                d.a0 / (gamma * A)
                - (n - 1) * th2 / (gamma * A * xi1)
                - (n - 1) * th1 / (gamma * A * xi1 ** 2)
            )
            tag = "plus" if sign == "+" else "minus"
            out[f"{tag}_edge_slope"] = float(slope)
            out[f"{tag}_edge_slope_limit"] = limit
            out[f"{tag}_edge_slope_rel_err"] = float(abs(slope - limit) / abs(limit))
        return out


@dataclass
class CornerReport:
    tau: float
    left_slope: float
    right_slope: float
    holds: bool


class GluedBarrier:
    """One glued barrier (sign, eps) built on a matching solver."""

    def __init__(self, solver: MatchingSolver, sign: str, eps: float, xi1: float):
        if not (0.0 <= eps < 0.25):
            raise errors.EpsilonOutOfRange(f"eps must be in [0, 1/4), got {eps}")
        self.solver = solver
        self.sign = sign
        self.eps = float(eps)
        self.xi1 = float(xi1)
        self.factor = 1.0 + _SIGN_FACTOR[sign] * self.eps

    @property
    def profile(self):
        return self.solver.profile

    @property
    def outer(self):
        return self.solver.outer

    def C(self, tau: float) -> float:
        return self.solver.solve_matching(self.sign, self.eps, self.xi1, tau)

    def C_prime(self, tau: float) -> float:
        return self.solver.C_prime(self.sign, self.eps, self.xi1, tau)

    def wbar(self, xi, tau: float, deriv: str = "value"):
        """Glued profile in inner variables; deriv in value/dxi/dtau."""
        xi = np.asarray(xi, dtype=float)
        scalar = xi.ndim == 0
        xi = np.atleast_1d(xi)
        out = np.empty_like(xi)
        gamma = self.outer.p.gamma
        left = xi <= self.xi1
        if np.any(left):
            arg = xi[left] + self.C(tau)
            if deriv == "value":
                out[left] = self.profile.phibar0(arg) / self.factor
            elif deriv == "dxi":
                out[left] = self.profile.phibar0(arg, deriv=1) / self.factor
            elif deriv == "dtau":
                out[left] = (
                    self.profile.phibar0(arg, deriv=1) * self.C_prime(tau) / self.factor
                )
            else:
                raise errors.InvalidParameter(f"unknown deriv {deriv!r}")
        if np.any(~left):
            gap = xi[~left] * math.exp(-gamma * tau)
            psi, dpsi, _, dtau_psi = self.outer.psi_bundle(
                self.solver.variant, self.sign, tau, gap=gap
            )
            egt = math.exp(gamma * tau)
            if deriv == "value":
                out[~left] = egt * psi
            elif deriv == "dxi":
                out[~left] = dpsi
            elif deriv == "dtau":
                out[~left] = gamma * egt * psi - gamma * xi[~left] * dpsi + egt * dtau_psi
            else:
                raise errors.InvalidParameter(f"unknown deriv {deriv!r}")
        return float(out[0]) if scalar else out

    def continuity_mismatch(self, tau: float) -> float:
        lv = self.profile.phibar0(self.xi1 + self.C(tau)) / self.factor
        rv = self.wbar(np.nextafter(self.xi1, np.inf), tau)
        return abs(lv - float(rv)) / abs(lv)

    def corner_jump(self, tau: float) -> CornerReport:
        """One-sided slopes at xi1 and the sign-appropriate verdict.

        Supersolution (+) needs left >= right (concave kink); subsolution (-)
        needs left <= right.
        """
        left = self.profile.phibar0(self.xi1 + self.C(tau), deriv=1) / self.factor
        _, right = self.solver.outer_edge(self.sign, self.xi1, tau)
        if self.sign == "+":
            holds = left >= right
        else:
            holds = left <= right
        return CornerReport(tau=tau, left_slope=float(left), right_slope=float(right), holds=bool(holds))


def check_ordering(
    plus: GluedBarrier,
    minus: GluedBarrier,
    taus,
    xi_margin: float = 20.0,
    n_xi: int = 200,
) -> dict:
    """Strict ordering psi+ > psi- > 0 on the glued window for each tau."""
    xi1 = plus.xi1
    xi = np.linspace(-xi_margin, xi1 + xi_margin, n_xi)
    worst_gapc = np.inf
    worst_floor = np.inf
    for tau in np.atleast_1d(taus):
        wp = plus.wbar(xi, float(tau))
        wm = minus.wbar(xi, float(tau))
        worst_gapc = min(worst_gapc, float(np.min(wp - wm)))
        worst_floor = min(worst_floor, float(np.min(wm)))
    return {
        "min_gap": worst_gapc,
        "min_minus": worst_floor,
        "ordered": bool(worst_gapc > 0.0 and worst_floor > 0.0),
    }


def find_epsilon_bounds(
    solver: MatchingSolver,
    xi1: float,
    tau_grid,
    tol: float = 1e-3,
) -> tuple[float, float]:
    """(eps1, eps2): largest corner-preserving and ordering-preserving weights.

    eps1 is joint over both signs: the corner verdict must hold for the plus
    and the minus barrier at every tau in tau_grid.  Bisection to tol; the
    admissible range is capped at 1/4.  Raises NoAdmissibleEpsilon when even
    eps = 0 fails (xi1 too small).
    """
    taus = np.atleast_1d(np.asarray(tau_grid, dtype=float))

    def corner_ok(eps: float) -> bool:
        for sign in ("+", "-"):
            bar = GluedBarrier(solver, sign, eps, xi1)
            for tau in taus:
                if not bar.corner_jump(float(tau)).holds:
                    return False
        return True

    def ordering_ok(eps: float) -> bool:
        bp = GluedBarrier(solver, "+", eps, xi1)
        bm = GluedBarrier(solver, "-", eps, xi1)
        return check_ordering(bp, bm, taus)["ordered"]

    def largest(pred) -> float:
        if not pred(0.0):
            raise errors.NoAdmissibleEpsilon(
                f"verdict fails already at eps = 0 for xi1 = {xi1}"
            )
        hi = 0.25 - 1e-9
        if pred(hi):
            return 0.25
        lo = 0.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if pred(mid):
                lo = mid
            else:
                hi = mid
        return lo

    return largest(corner_ok), largest(ordering_ok)


def dump_matching_csv(solver: MatchingSolver, xi1: float, eps: float, taus, path: str):
    """CSV rows (tau, C_plus, C_minus, left/right slopes per sign)."""
    rows = []
    for tau in np.atleast_1d(taus):
        tau = float(tau)
        row = [tau]
        for sign in ("+", "-"):
            bar = GluedBarrier(solver, sign, eps, xi1)
            rep = bar.corner_jump(tau)
            row.extend([bar.C(tau), rep.left_slope, rep.right_slope])
        rows.append(row)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("tau,C_plus,left_slope_plus,right_slope_plus,"
                 "C_minus,left_slope_minus,right_slope_minus\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
