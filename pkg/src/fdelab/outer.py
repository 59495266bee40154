"""Outer-region profiles phi0..phi4, corrector sums, and psi evaluators.

Everything is parametrized by the gap eta - A > 0 so that evaluation stays
accurate down to gaps of order exp(-gamma*tau) for large tau.  With
x = (A/eta)^(1/gamma) the primitives are

    phi0 = a0 (1 - x)
    I(eta) = int_{eta0}^eta rho^{-1} (1-x(rho))^{-1} drho
    phi1 = eta^(-2-1/gamma) (C1 + bq1 I)
    phi2 = (n-1) A^(2/gamma) gamma^{-2} eta^(-2-2/gamma) / (1-x)
    phi3 = eta^(-1-1/gamma) (C3 + bq3 I)
    phi4 = phi3 + C10 eta^(-1-1/gamma) log eta
    h    = phi1 + theta1 phi2

I is computed by composite quadrature on a panel decomposition in
y = log(eta - A); below a gap of 1e-8 the cached value is continued with
the exact antiderivative of the singular part.  psi evaluators assemble
the tau-weighted sums with analytic eta and tau derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import errors, numerics
from .params import (
    ModelParams,
    ThresholdConfig,
    default_thresholds,
    theta,
    validate_params,
)

__all__ = ["OuterProfileSet", "branch_variant", "VARIANTS"]

VARIANTS = ("psi1", "psi2", "psi3", "psi4")

_GAP_SWITCH = 1e-8  # below this gap, I(eta) uses the extracted singular part


def branch_variant(gamma: float) -> str:
    """Variant selection rule: psi3 for gamma > 1, else psi4."""
    return "psi3" if gamma > 1.0 else "psi4"


def _phi_variant(variant: str) -> str:
    if variant in ("psi1", "psi2"):
        return "phi3"
    if variant in ("psi3", "psi4"):
        return "phi4"
    raise errors.InvalidParameter(f"unknown variant {variant!r}")


def _has_rows(variant: str) -> bool:
    return variant in ("psi2", "psi4")


@dataclass
class _Primitives:
    """Per-gap primitive quantities shared by all profile formulas."""

    gap: np.ndarray
    logeta: np.ndarray
    eta: np.ndarray
    x: np.ndarray
    omx: np.ndarray  # 1 - x, computed as -expm1(-log1p(gap/A)/gamma)
    I: np.ndarray
    I1: np.ndarray  # I'
    I2: np.ndarray  # I''


class OuterProfileSet:
    """Profile family for one parameter set.

    Holds the distinguished constant C2, the positivity constant C10
    (searched by doubling when the config leaves it None), and the
    correction coefficient tables per (variant, sign).
    """

    def __init__(
        self,
        p: ModelParams,
        cfg: ThresholdConfig | None = None,
        quad_spec: numerics.QuadratureSpec | None = None,
    ):
        self.p = p
        self.d = validate_params(p)
        self.cfg = cfg or default_thresholds(p, self.d)
        self.cfg.validated(p, self.d)
        self.quad_spec = quad_spec or numerics.QuadratureSpec()

        n, gamma, A = p.n, p.gamma, p.A
        self._p1 = 2.0 + 1.0 / gamma
        self._p2 = 2.0 + 2.0 / gamma
        self._p3 = 1.0 + 1.0 / gamma
        self._bq1 = (n - 1) * (gamma + 1.0) * A ** (1.0 / gamma) / gamma ** 3
        self._bq3 = -(n - 1) * A ** (1.0 / gamma) / gamma ** 2
        self._kap2 = (n - 1) * A ** (2.0 / gamma) / gamma ** 2
        self._b2q = (n - 1) * A ** (2.0 / gamma) / gamma ** 3

        self._g0 = self.cfg.eta0 - A
        if self._g0 <= 0.0:
            raise errors.InvalidParameter("eta0 must exceed A")
        # singular continuation reference at the switch gap
        self._lg_switch = math.log1p(_GAP_SWITCH / A) / gamma
        self._I_switch: float | None = None  # filled lazily

        self.C2, self.C2_error = self._compute_C2()
        self._C10: float | None = (
            float(self.cfg.C10) if self.cfg.C10 is not None else None
        )
        self._coeff_cache: dict[tuple[str, str], dict] = {}
        self._farfit_cache: dict[str, tuple[float, float]] = {}

    # -- primitive layer -------------------------------------------------

    def _xparts(self, gap: np.ndarray):
        """x and 1-x from the gap, exact for gaps down to ~1e-300."""
        A, gamma = self.p.A, self.p.gamma
        lg = np.log1p(gap / A) / gamma
        x = np.exp(-lg)
        omx = -np.expm1(-lg)
        logeta = math.log(A) + np.log1p(gap / A)
        return x, omx, logeta

    def _I_integrand_y(self, y: np.ndarray) -> np.ndarray:
        # integrand of I in y = log(gap): gap / (eta * (1 - x)), smooth on R
        g = np.exp(y)
        _, omx, _ = self._xparts(g)
        return g / ((self.p.A + g) * omx)

    def _I_quad(self, gaps: np.ndarray) -> np.ndarray:
        """Composite Gauss-Legendre values of I at the given gaps (>= switch)."""
        pts = np.unique(np.concatenate([gaps.ravel(), [self._g0]]))
        if pts.size == 1:
            return np.zeros(gaps.shape)
        ys = np.log(pts)
        # subdivide consecutive spans to panel width <= 0.25 in y
        edges = [ys[0]]
        for y0, y1 in zip(ys[:-1], ys[1:]):
            k = max(1, int(math.ceil((y1 - y0) / 0.25)))
            edges.extend(np.linspace(y0, y1, k + 1)[1:])
        edges = np.asarray(edges)
        panel = numerics.integrate_panels(self._I_integrand_y, edges, order=24)
        cum = np.concatenate([[0.0], np.cumsum(panel)])
        # values of the running integral at the original pts
        idx = np.searchsorted(edges, ys)
        vals = cum[idx]
        anchor = vals[np.searchsorted(pts, self._g0)]
        vals = vals - anchor
        lookup = dict(zip(pts.tolist(), vals.tolist()))
        return np.array([lookup[g] for g in gaps.ravel()]).reshape(gaps.shape)

    def _I_values(self, gap: np.ndarray) -> np.ndarray:
        gap = np.asarray(gap, dtype=float)
        out = np.empty_like(gap)
        small = gap < _GAP_SWITCH
        if np.any(small):
            if self._I_switch is None:
                self._I_switch = float(self._I_quad(np.array([_GAP_SWITCH]))[0])
            lg = np.log1p(gap[small] / self.p.A) / self.p.gamma
            # exact antiderivative of the singular part:
            # I(g) - I(switch) = gamma * [log(expm1(lg)) - log(expm1(lg_switch))]
            out[small] = self._I_switch + self.p.gamma * (
                np.log(np.expm1(lg)) - math.log(math.expm1(self._lg_switch))
            )
        if np.any(~small):
            out[~small] = self._I_quad(gap[~small])
        return out

    def _prims(self, gap) -> _Primitives:
        gap = np.asarray(gap, dtype=float)
        if np.any(gap <= 0.0):
            raise errors.OutOfDomain("eta must exceed A (gap > 0)")
        x, omx, logeta = self._xparts(gap)
        eta = np.exp(logeta)
        I = self._I_values(gap)
        I1 = 1.0 / (eta * omx)
        I2 = -(1.0 / omx + x / (self.p.gamma * omx ** 2)) / eta ** 2
        return _Primitives(gap=gap, logeta=logeta, eta=eta, x=x, omx=omx, I=I, I1=I1, I2=I2)

    # -- elementary profiles ----------------------------------------------

    @staticmethod
    def _pack(value, d1, d2, deriv):
        if deriv == 0:
            return value
        if deriv == 1:
            return d1
        if deriv == 2:
            return d2
        raise errors.InvalidParameter(f"deriv must be 0, 1, or 2, got {deriv}")

    def _phi0_prims(self, pr: _Primitives, deriv: int):
        a0, gamma = self.d.a0, self.p.gamma
        value = a0 * pr.omx
        d1 = a0 * pr.x / (gamma * pr.eta)
        d2 = -a0 * pr.x * (1.0 + gamma) / (gamma ** 2 * pr.eta ** 2)
        return self._pack(value, d1, d2, deriv)

    def _profile_CI(self, pexp: float, C: float, b: float, pr: _Primitives, deriv: int):
        E = np.exp(-pexp * pr.logeta)
        value = E * (C + b * pr.I)
        if deriv == 0:
            return value
        d1 = -pexp * value / pr.eta + b * E * pr.I1
        if deriv == 1:
            return d1
        d2 = (
            pexp * (pexp + 1.0) * value / pr.eta ** 2
            - 2.0 * pexp * b * E * pr.I1 / pr.eta
            + b * E * pr.I2
        )
        return self._pack(value, d1, d2, deriv)

    def _phi1_prims(self, pr, deriv):
        return self._profile_CI(self._p1, self.cfg.homog_C1, self._bq1, pr, deriv)

    def _phi3_prims(self, pr, deriv):
        return self._profile_CI(self._p3, self.cfg.homog_C3, self._bq3, pr, deriv)

    def _phi2_prims(self, pr, deriv):
        gamma = self.p.gamma
        u = 1.0 / pr.omx
        value = self._kap2 * np.exp(-self._p2 * pr.logeta) * u
        if deriv == 0:
            return value
        lam = -(self._p2 + pr.x * u / gamma) / pr.eta
        d1 = value * lam
        if deriv == 1:
            return d1
        lamp = (self._p2 + pr.x * u / gamma) / pr.eta ** 2 + pr.x * u * (
            1.0 + pr.x * u
        ) / (gamma ** 2 * pr.eta ** 2)
        d2 = value * (lam ** 2 + lamp)
        return d2

    def _powlog_prims(self, pexp: float, j: int, pr: _Primitives, deriv: int):
        """eta^(-pexp) * (log eta)^j and derivatives; j < 0 gives 0."""
        if j < 0:
            return np.zeros_like(pr.gap)
        L = pr.logeta
        E = np.exp(-pexp * L)
        Lj = L ** j
        value = E * Lj
        if deriv == 0:
            return value
        Ljm1 = L ** (j - 1) if j >= 1 else np.zeros_like(L)
        d1 = E / pr.eta * (-pexp * Lj + j * Ljm1)
        if deriv == 1:
            return d1
        Ljm2 = L ** (j - 2) if j >= 2 else np.zeros_like(L)
        d2 = (
            E
            / pr.eta ** 2
            * (
                pexp * (pexp + 1.0) * Lj
                - j * (2.0 * pexp + 1.0) * Ljm1
                + j * (j - 1.0) * Ljm2
            )
        )
        return d2

    def _phi4_prims(self, pr, deriv):
        return self._phi3_prims(pr, deriv) + self.C10 * self._powlog_prims(
            self._p3, 1, pr, deriv
        )

    # -- public profile API -----------------------------------------------

    def _resolve_gap(self, eta, gap):
        if gap is not None:
            if eta is not None:
                raise errors.InvalidParameter("pass eta or gap, not both")
            return np.asarray(gap, dtype=float)
        if eta is None:
            raise errors.InvalidParameter("pass eta or gap")
        eta = np.asarray(eta, dtype=float)
        return eta - self.p.A

    def phi0(self, eta=None, deriv: int = 0, *, gap=None):
        pr = self._prims(self._resolve_gap(eta, gap))
        return self._phi0_prims(pr, deriv)

    def f_sources(self, eta=None, *, gap=None):
        """Source terms (f1, f2, f3) of the corrector ODEs."""
        pr = self._prims(self._resolve_gap(eta, gap))
        n, gamma = self.p.n, self.p.gamma
        r = pr.x / (pr.eta * pr.omx)
        f1 = (n - 1) * (gamma + 1.0) / gamma ** 2 * r / pr.eta
        f2 = -(n - 1) / gamma ** 2 * r ** 2
        f3 = -(n - 1) / gamma * r
        return f1, f2, f3

    def phi_correction(self, i: int, eta=None, deriv: int = 0, *, gap=None):
        pr = self._prims(self._resolve_gap(eta, gap))
        if i == 1:
            return self._phi1_prims(pr, deriv)
        if i == 2:
            return self._phi2_prims(pr, deriv)
        if i == 3:
            return self._phi3_prims(pr, deriv)
        raise errors.InvalidParameter(f"i must be 1, 2, or 3, got {i}")

    def phi4(self, eta=None, deriv: int = 0, *, gap=None):
        pr = self._prims(self._resolve_gap(eta, gap))
        return self._phi4_prims(pr, deriv)

    def h(self, eta=None, sign: str = "+", deriv: int = 0, *, gap=None):
        pr = self._prims(self._resolve_gap(eta, gap))
        th1 = theta(self.p, 1, sign)
        return self._phi1_prims(pr, deriv) + th1 * self._phi2_prims(pr, deriv)

    def vkj(self, k: int, j: int, eta=None, deriv: int = 0, *, gap=None):
        """Correction basis eta^(-k-1/gamma) (log eta)^j for k >= 3."""
        if k < 3:
            raise errors.InvalidParameter(f"vkj requires k >= 3, got {k}")
        if j > k:
            raise errors.InvalidParameter(f"vkj requires j <= k, got j={j}, k={k}")
        gap = self._resolve_gap(eta, gap)
        if np.any(self.p.A + gap <= 1.0):
            raise errors.OutOfDomain("vkj requires eta > 1")
        pr = self._prims(gap)
        return self._powlog_prims(k + 1.0 / self.p.gamma, j, pr, deriv)

    # -- distinguished constants -------------------------------------------

    def _compute_C2(self) -> tuple[float, float]:
        """C2 = b2q * int_{eta0}^inf rho^(-1-1/gamma) (1-x)^(-2) drho.

        Quadrature to a finite cut plus the geometric tail, which sums in
        closed form: int_c^inf = gamma c^(-1/gamma) / (1 - x(c)).
        """
        gamma, A = self.p.gamma, self.p.A
        cut = max(1e6, 1e4 * A)

        # substitute y = log rho: the integrand decays exponentially in y,
        # which keeps the quadrature error estimate honest on a wide range
        def integrand(y):
            rho = math.exp(y)
            g = rho - A
            _, omx, _ = self._xparts(np.asarray(g))
            return math.exp(-y / gamma) / float(omx) ** 2

        val, err = numerics.integrate(
            integrand, math.log(self.cfg.eta0), math.log(cut), self.quad_spec
        )
        xc, omxc, _ = self._xparts(np.asarray(cut - A))
        tail = gamma * cut ** (-1.0 / gamma) / float(omxc)
        return self._b2q * (val + tail), self._b2q * err

    @property
    def C10(self) -> float:
        """Positivity constant of phi4, searched by doubling when unset."""
        if self._C10 is None:
            self._C10 = self._search_C10()
        return self._C10

    def _search_C10(self) -> float:
        gaps = np.geomspace(1e-6, 1e4 * self.p.A - self.p.A, 400)
        pr = self._prims(gaps)
        phi3 = self._phi3_prims(pr, 0)
        v = self._powlog_prims(self._p3, 1, pr, 0)
        c = 1.0
        for _ in range(self.cfg.max_doublings):
            # phi4 >= (c/2) v  <=>  phi3 >= -(c/2) v on the grid
            if np.all(phi3 + 0.5 * c * v >= 0.0):
                return c
            c *= 2.0
        raise errors.PositivityUnattained(
            f"no C10 up to {c:g} makes phi4 dominate its log envelope"
        )

    # -- far-field fits and coefficient tables ------------------------------

    def _farfield_fit(self, which: str) -> tuple[float, float]:
        """Fit profile * eta^p ~ c1 * log(eta) + c0 far afield.

        which = "h-part" fits phi1 (the eta^(-2-1/gamma) block of h);
        which = "p-part" fits phi3.  Basis {L, 1, xL, x, x^2} on
        eta in [1e4, 1e6], scaled least squares.  The leading slope c1 must
        reproduce the closed coefficient bq to 1e-6 relative, otherwise the
        fit is declared underdetermined.
        """
        if which in self._farfit_cache:
            return self._farfit_cache[which]
        eta = np.geomspace(1e4, 1e6, 160)
        pr = self._prims(eta - self.p.A)
        if which == "h-part":
            prof = self._phi1_prims(pr, 0)
            pexp, bq = self._p1, self._bq1
        elif which == "p-part":
            prof = self._phi3_prims(pr, 0)
            pexp, bq = self._p3, self._bq3
        else:
            raise errors.InvalidParameter(f"unknown far-field fit {which!r}")
        y = prof * np.exp(pexp * pr.logeta)
        L = pr.logeta
        cols = np.column_stack([L, np.ones_like(L), pr.x * L, pr.x, pr.x ** 2])
        scale = np.max(np.abs(cols), axis=0)
        coef, _, rank, _ = np.linalg.lstsq(cols / scale, y, rcond=None)
        coef = coef / scale
        if rank < cols.shape[1]:
            raise errors.RecurrenceUnderdetermined(
                f"far-field fit for {which} is rank deficient"
            )
        c1, c0 = float(coef[0]), float(coef[1])
        if abs(c1 - bq) > 1e-6 * max(1.0, abs(bq)):
            raise errors.RecurrenceUnderdetermined(
                f"far-field slope fit {c1} disagrees with closed value {bq}"
            )
        self._farfit_cache[which] = (c1, c0)
        return c1, c0

    @staticmethod
    def _d2coeff(row: dict, P: float, i: int) -> float:
        """L^i coefficient of (sum_j row[j] eta^(-P) L^j)'' * eta^(P+2)."""
        return (
            P * (P + 1.0) * row.get(i, 0.0)
            - (i + 1.0) * (2.0 * P + 1.0) * row.get(i + 1, 0.0)
            + (i + 1.0) * (i + 2.0) * row.get(i + 2, 0.0)
        )

    def correction_coeffs(self, variant: str, sign: str) -> dict:
        """Coefficient table {(k, j): c_kj} for 3 <= k <= 2N.

        Rows are generated by the far-field cancellation recurrence along
        each parity chain; the chain is seeded by the far-field expansions
        of h (even) and theta2 * Phi (odd).  Seeds c_{k,0} come from the
        config; absent seeds are zero.
        """
        key = (variant, sign)
        if key in self._coeff_cache:
            return dict(self._coeff_cache[key])
        if variant not in VARIANTS:
            raise errors.InvalidParameter(f"unknown variant {variant!r}")
        n, gamma = self.p.n, self.p.gamma
        a0 = self.d.a0
        N = self.d.N
        th2 = theta(self.p, 2, sign)
        seeds = dict(self.cfg.seed_constants)

        c1h, c0h = self._farfield_fit("h-part")
        c1p, c0p = self._farfield_fit("p-part")
        if _phi_variant(variant) == "phi4":
            # phi4 adds C10 * eta^(-1-1/gamma) L to the odd seed profile
            c1p = c1p + self.C10
        rows: dict[int, dict] = {2: {0: c0h, 1: c1h}, 1: {0: th2 * c0p, 1: th2 * c1p}}

        table: dict[tuple[int, int], float] = {}
        for k in range(3, 2 * N + 1):
            prev = rows[k - 2]
            P = (k - 2) + 1.0 / gamma
            row = {0: float(seeds.get(k, 0.0))}
            jmax = int(math.ceil(k / 2))
            for i in range(0, jmax):
                num = self._d2coeff(prev, P, i)
                row[i + 1] = -(n - 1) * num / (a0 * gamma * (i + 1.0))
            rows[k] = row
            for j in range(0, jmax + 1):
                table[(k, j)] = row.get(j, 0.0)
        self._coeff_cache[key] = table
        return dict(table)

    # -- psi assembly --------------------------------------------------------

    def _psi_terms(self, variant: str, sign: str):
        """List of (k, eval(pr, deriv)) pairs: psi = sum_k e^(-k gamma tau) T_k."""
        th1 = theta(self.p, 1, sign)
        th2 = theta(self.p, 2, sign)
        phivar = _phi_variant(variant)

        def t0(pr, deriv):
            return self._phi0_prims(pr, deriv)

        def t1(pr, deriv):
            base = self._phi3_prims(pr, deriv) if phivar == "phi3" else self._phi4_prims(pr, deriv)
            return th2 * base

        def t2(pr, deriv):
            return self._phi1_prims(pr, deriv) + th1 * self._phi2_prims(pr, deriv)

        terms = [(0, t0), (1, t1), (2, t2)]
        if _has_rows(variant):
            table = self.correction_coeffs(variant, sign)
            by_k: dict[int, dict] = {}
            for (k, j), c in table.items():
                if c != 0.0:
                    by_k.setdefault(k, {})[j] = c

            def make_row(row_k, row_c):
                def trow(pr, deriv):
                    acc = np.zeros_like(pr.gap)
                    pexp = row_k + 1.0 / self.p.gamma
                    for j, c in sorted(row_c.items()):
                        acc = acc + c * self._powlog_prims(pexp, j, pr, deriv)
                    return acc

                return trow

            for row_k in sorted(by_k):
                terms.append((row_k, make_row(row_k, by_k[row_k])))
        return terms

    def psi_outer(
        self,
        variant: str,
        sign: str,
        eta=None,
        tau=0.0,
        deriv: str = "value",
        *,
        gap=None,
    ):
        """Outer barrier profile psi and derivatives.

        deriv in {"value", "deta", "detaeta", "dtau"}.  eta (or gap) and tau
        broadcast together.  tau derivatives are analytic: each term carries
        weight e^(-k gamma tau).
        """
        pr = self._prims(self._resolve_gap(eta, gap))
        tau = np.asarray(tau, dtype=float)
        dmap = {"value": 0, "deta": 1, "detaeta": 2}
        gamma = self.p.gamma
        if deriv in dmap:
            order = dmap[deriv]
            acc = 0.0
            for k, term in self._psi_terms(variant, sign):
                w = np.exp(-k * gamma * tau) if k else 1.0
                acc = acc + w * term(pr, order)
            return acc
        if deriv == "dtau":
            acc = 0.0
            for k, term in self._psi_terms(variant, sign):
                if k == 0:
                    continue
                acc = acc + (-k * gamma) * np.exp(-k * gamma * tau) * term(pr, 0)
            shape = np.broadcast(pr.gap, tau).shape
            return np.broadcast_to(np.asarray(acc, dtype=float), shape).copy()
        raise errors.InvalidParameter(f"unknown deriv {deriv!r}")

    def psi_bundle(self, variant: str, sign: str, tau, *, gap):
        """(psi, psi_eta, psi_etaeta, psi_tau) in one pass over the terms."""
        pr = self._prims(np.asarray(gap, dtype=float))
        tau = np.asarray(tau, dtype=float)
        gamma = self.p.gamma
        vals = [0.0, 0.0, 0.0, 0.0]
        for k, term in self._psi_terms(variant, sign):
            w = np.exp(-k * gamma * tau) if k else 1.0
            t_val = term(pr, 0)
            vals[0] = vals[0] + w * t_val
            vals[1] = vals[1] + w * term(pr, 1)
            vals[2] = vals[2] + w * term(pr, 2)
            if k:
                vals[3] = vals[3] + (-k * gamma) * w * t_val
        shape = np.broadcast(pr.gap, tau).shape
        return tuple(np.broadcast_to(v, shape).copy() for v in vals)

    # -- quadrature cross-route for phi2 (used by tests) --------------------

    def phi2_quadrature_route(self, eta):
        """phi2 via eta^(-2-1/gamma) (C2 - b2q * J(eta)) with J by panels."""
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        gamma, A = self.p.gamma, self.p.A

        def integrand(y):
            g = np.exp(y)
            rho = A + g
            _, omx, _ = self._xparts(g)
            return g * rho ** (-1.0 - 1.0 / gamma) / omx ** 2

        out = np.empty_like(eta)
        for idx, e in enumerate(eta):
            lo, hi = sorted((self._g0, e - A))
            ylo, yhi = math.log(lo), math.log(hi)
            k = max(2, int(math.ceil((yhi - ylo) / 0.2)))
            edges = np.linspace(ylo, yhi, k + 1)
            J = float(np.sum(numerics.integrate_panels(integrand, edges, order=32)))
            if e - A < self._g0:
                J = -J
            out[idx] = e ** (-self._p1) * (self.C2 - self._b2q * J)
        return out if out.size > 1 else float(out[0])

    # -- table dump ----------------------------------------------------------

    def profile_rows(self, eta_grid, tau: float, variant: str, sign: str):
        """Rows (eta, phi0..phi4, h+, h-, psi, psi_eta, psi_etaeta) for CSV."""
        eta_grid = np.asarray(eta_grid, dtype=float)
        pr = self._prims(eta_grid - self.p.A)
        psi, dpsi, d2psi, _ = self.psi_bundle(variant, sign, tau, gap=pr.gap)
        cols = [
            eta_grid,
            self._phi0_prims(pr, 0),
            self._phi1_prims(pr, 0),
            self._phi2_prims(pr, 0),
            self._phi3_prims(pr, 0),
            self._phi4_prims(pr, 0),
            self._phi1_prims(pr, 0) + self.p.theta1_plus * self._phi2_prims(pr, 0),
            self._phi1_prims(pr, 0) + self.p.theta1_minus * self._phi2_prims(pr, 0),
            psi,
            dpsi,
            d2psi,
        ]
        return np.column_stack(cols)
