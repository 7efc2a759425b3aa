"""Limit laws evaluated numerically from characteristic functions.

Covers the continuous Luria-Delbruck variable Z (the completely asymmetric
1-stable law with cf exp(-pi/2 |t| - i t ln|t|)), the affine giant-cluster
fluctuation limits built on Z, the atomic Levy measure with geometric atoms,
and the spectrally positive Levy variable appearing in the regular-tree limit.

CDFs come from the Gil-Pelaez formula

    F(x) = 1/2 - (1/pi) * int_0^inf Im(e^{-itx} cf(t)) / t dt

by two deliberately independent quadrature routes:

* "adaptive": QUADPACK adaptive panels; the oscillatory factor is split into
  sin/cos weights so large |x| costs almost nothing extra, the singular
  region near t = 0 goes through adaptive extrapolation.
* "series": fixed Gauss-Legendre panels aligned with the oscillation, fully
  vectorized, with a closed-form power/log series for the near-0 segment of
  the Luria-Delbruck integrand (which behaves like ln t there).

Both truncate the tail where a certified modulus bound |cf(t)| <= e^{-kappa t}
pushes the remainder below tolerance.  Their agreement at matching points is
the correctness check used throughout the test-suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate

EULER_GAMMA = float(np.euler_gamma)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)

MAX_PANELS = 400_000
ATOM_WINDOW_CAP = 60


class InversionError(ArithmeticError):
    """Quadrature failed to converge; carries the achieved error estimate."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


def ld_cf(t):
    """Characteristic function of the continuous Luria-Delbruck law.

    exp(-(pi/2)|t| - i t ln|t|), extended by continuity to 1 at t = 0.
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.ones(t.shape, dtype=complex)
    nz = t != 0.0
    tn = t[nz]
    out[nz] = np.exp(-(np.pi / 2.0) * np.abs(tn) - 1j * tn * np.log(np.abs(tn)))
    return out[0] if scalar else out


@dataclass(frozen=True)
class LimitLaw:
    """A law loc + scale * base, with the base given by its cf.

    modulus_decay is a certified kappa with |cf(t)| <= exp(-kappa t) for all
    t >= 0 (used for tail truncation); phase_slope bounds how fast arg cf can
    drift (used to size oscillation-aligned panels); small_t, when set, is a
    closed form for int_0^t0 Im(e^{-itx} cf(t))/t dt covering an integrable
    singularity at 0 (absent means the integrand is regular there).
    """

    cf: Callable[[np.ndarray], np.ndarray]
    loc: float = 0.0
    scale: float = 1.0
    label: str = ""
    modulus_decay: float = 1.0
    phase_slope: float = 10.0
    small_t: Optional[Callable[[float, float], float]] = None

    def with_affine(self, loc: float, scale: float, label: str | None = None) -> "LimitLaw":
        return replace(self, loc=loc, scale=scale,
                       label=self.label if label is None else label)


def _ld_small_t_cutoff(x: float) -> float:
    return min(1e-3, 0.05 / (1.0 + abs(x)))


def _ld_small_t(x: float, t0: float) -> float:
    """Closed series for int_0^t0 Im(e^{-itx} ld_cf(t))/t dt.

    The integrand equals -exp(-pi t/2) sin(t (x + ln t)) / t; with
    t0 (|x| + |ln t0|) <= 0.06 both the sine and the exponential expand into a
    short double series whose terms reduce to int t^k ln^r t dt, available in
    closed form.  Truncation error is below 1e-11.
    """
    if t0 <= 0.0:
        return 0.0

    logt0 = math.log(t0)

    def power_log_integral(k: int, r: int) -> float:
        # int_0^t0 t^k ln^r t dt
        acc = 0.0
        for i in range(r + 1):
            acc += ((-1.0) ** (r - i)) * (math.factorial(r) / math.factorial(i)) \
                * (logt0 ** i) / ((k + 1.0) ** (r - i + 1))
        return (t0 ** (k + 1)) * acc

    total = 0.0
    for j in range(3):            # sin(u)/t = sum (-1)^j t^{2j} a^{2j+1} / (2j+1)!
        q = 2 * j + 1
        sin_coef = ((-1.0) ** j) / math.factorial(q)
        for i in range(4):        # exp(-pi t / 2) = sum (-pi/2)^i t^i / i!
            exp_coef = ((-math.pi / 2.0) ** i) / math.factorial(i)
            k = 2 * j + i
            poly = 0.0
            for r in range(q + 1):
                poly += math.comb(q, r) * (x ** (q - r)) * power_log_integral(k, r)
            total += sin_coef * exp_coef * poly
    return -total


def luria_delbruck_law() -> LimitLaw:
    return LimitLaw(cf=ld_cf, label="luria-delbruck",
                    modulus_decay=math.pi / 2.0, phase_slope=12.0,
                    small_t=_ld_small_t)


def _truncation_point(kappa: float, budget: float) -> float:
    # smallest T with exp(-kappa T)/(kappa T) below the absolute budget
    T = 1.0
    for _ in range(60):
        T_new = (1.0 / kappa) * math.log(1.0 / (kappa * max(T, 1e-6) * budget))
        T_new = max(T_new, 1.0)
        if abs(T_new - T) < 1e-9:
            break
        T = T_new
    return T + 1.0


def _tail_bound(kappa: float, T: float) -> float:
    return math.exp(-kappa * T) / (kappa * T)


def _quad(f, a, b, epsabs, **kw):
    res = integrate.quad(f, a, b, epsabs=epsabs, epsrel=0.0, full_output=1, **kw)
    val, err = res[0], res[1]
    return val, err


def _gil_pelaez_adaptive(law: LimitLaw, x: float, tol: float) -> tuple[float, float]:
    """QUADPACK route: returns (integral I(x), error estimate)."""
    budget = tol * math.pi / 8.0
    T = _truncation_point(law.modulus_decay, budget)
    err = _tail_bound(law.modulus_decay, T)

    if law.small_t is not None:
        t0 = _ld_small_t_cutoff(x)
        # independent of the series used by the panel scheme: integrate the
        # raw integrand across the log singularity adaptively

        def g(t):
            return float((np.exp(-1j * t * x) * law.cf(t)).imag) / t

        small, e0 = _quad(g, 0.0, t0, budget, limit=200)
        err += e0
    else:
        t0 = 0.0
        small = 0.0

    ax = abs(x)
    if ax >= 8.0:
        sgn = 1.0 if x > 0 else -1.0

        def f_cos(t):
            return float(law.cf(t).imag) / t

        def f_sin(t):
            return float(law.cf(t).real) / t

        ic, ec = _quad(f_cos, t0, T, budget, weight="cos", wvar=ax, limit=400)
        is_, es = _quad(f_sin, t0, T, budget, weight="sin", wvar=ax, limit=400)
        main = ic - sgn * is_
        err += ec + es
    else:
        def g(t):
            return float((np.exp(-1j * t * x) * law.cf(t)).imag) / t

        main, em = _quad(g, t0, T, budget, limit=800)
        err += em
    return small + main, err


def _gil_pelaez_panels(law: LimitLaw, x: float, tol: float) -> tuple[float, float]:
    """Oscillation-aligned Gauss-Legendre route: returns (I(x), error estimate)."""
    budget = tol * math.pi / 8.0
    T = _truncation_point(law.modulus_decay, budget)
    err = _tail_bound(law.modulus_decay, T)

    if law.small_t is not None:
        t0 = _ld_small_t_cutoff(x)
        small = law.small_t(x, t0)
    else:
        t0 = 0.0
        small = 0.0

    slope = abs(x) + law.phase_slope
    width = min(0.25, 3.0 / slope)
    npan = int(math.ceil((T - t0) / width))
    if npan > MAX_PANELS:
        raise InversionError(
            f"panel scheme needs {npan} panels at x={x:g} (cap {MAX_PANELS}); "
            "use the adaptive scheme for far-tail arguments", math.inf)
    edges = np.linspace(t0, T, npan + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mids = edges[:-1] + half
    total = 0.0
    chunk = max(1, (1 << 16) // _GL_NODES.size)
    for lo in range(0, npan, chunk):
        hi = min(npan, lo + chunk)
        t = mids[lo:hi, None] + half[lo:hi, None] * _GL_NODES[None, :]
        tf = t.ravel()
        vals = (np.exp(-1j * tf * x) * law.cf(tf)).imag / tf
        total += float(np.sum(half[lo:hi, None] * _GL_WEIGHTS[None, :]
                              * vals.reshape(t.shape)))
    return small + total, err


def _base_cdf(law: LimitLaw, x: float, tol: float, scheme: str) -> float:
    if scheme == "adaptive":
        integral, err = _gil_pelaez_adaptive(law, x, tol)
    elif scheme == "series":
        integral, err = _gil_pelaez_panels(law, x, tol)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    if err > tol:
        raise InversionError(f"{scheme} quadrature did not meet tol={tol:g} at x={x:g}",
                             err)
    val = 0.5 - integral / math.pi
    return min(1.0, max(0.0, val))


def cdf(law: LimitLaw, x: float, tol: float = 1e-8, scheme: str = "adaptive") -> float:
    """F(x) for the affine law loc + scale * base.

    For scale < 0 the reflection F(x) = 1 - F_base((x - loc)/scale) applies
    (the base laws here are atomless).  scale = 0 degenerates to a step at
    loc.  Raises InversionError when the requested tolerance is unreachable.
    """
    if not 0.0 < tol <= 1e-3:
        raise ValueError(f"tol must be in (0, 1e-3], got {tol}")
    if law.scale == 0.0:
        return 0.0 if x < law.loc else 1.0
    xb = (x - law.loc) / law.scale
    if law.scale > 0:
        return _base_cdf(law, xb, tol, scheme)
    return min(1.0, max(0.0, 1.0 - _base_cdf(law, xb, tol, scheme)))


def cdf_dual(law: LimitLaw, x: float, tol: float = 1e-6) -> tuple[float, float]:
    """Evaluate F(x) by both schemes; callers assert the two agree."""
    return (cdf(law, x, tol, scheme="adaptive"), cdf(law, x, tol, scheme="series"))


def quantile(law: LimitLaw, q: float, tol: float = 1e-7) -> float:
    """Inverse CDF by bracketing bisection (x-tolerance 10 * tol)."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must be in (0, 1), got {q}")
    if law.scale == 0.0:
        return law.loc
    span = max(abs(law.scale), 1e-6)
    lo, hi = law.loc - 4 * span, law.loc + 4 * span
    for _ in range(200):
        if cdf(law, lo, tol) < q:
            break
        lo -= (hi - lo)
    for _ in range(200):
        if cdf(law, hi, tol) > q:
            break
        hi += (hi - lo)
    xtol = 10.0 * tol
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if cdf(law, mid, tol) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cdf_table(law: LimitLaw, xs, tol: float = 1e-8) -> list[tuple[float, float]]:
    """(x, F(x)) rows for export/plotting."""
    return [(float(x), cdf(law, float(x), tol)) for x in np.asarray(xs, dtype=float)]


# ---------------------------------------------------------------------------
# giant-cluster fluctuation limits (split trees)

def theorem2_limit(c: float, mu: float, sigma2: float, varsigma: float) -> LimitLaw:
    """Limit law of the ball-count fluctuation statistic (non-lattice form).

    -(c/mu) e^{-c/mu} (Z + ln(c/mu) + varsigma*mu
                         + (mu^2 - sigma^2)(c + mu)/(2 mu^2) - gamma + 1).
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    scale = -(c / mu) * math.exp(-c / mu)
    inner = (math.log(c / mu) + varsigma * mu
             + (mu ** 2 - sigma2) * (c + mu) / (2.0 * mu ** 2) - EULER_GAMMA + 1.0)
    base = luria_delbruck_law()
    return base.with_affine(loc=scale * inner, scale=scale,
                            label=f"ball-fluctuation limit (c={c:g})")


def theorem1_limit(c: float, mu: float, sigma2: float, alpha: float, zeta: float) -> LimitLaw:
    """Limit law of the vertex-count fluctuation statistic.

    -(c alpha / mu) e^{-c/mu} (Z + ln(c/mu) + zeta*mu/alpha
                                 + (mu^2 - sigma^2)(c + mu)/(2 mu^2) - gamma + 1).
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    scale = -(c * alpha / mu) * math.exp(-c / mu)
    inner = (math.log(c / mu) + zeta * mu / alpha
             + (mu ** 2 - sigma2) * (c + mu) / (2.0 * mu ** 2) - EULER_GAMMA + 1.0)
    base = luria_delbruck_law()
    return base.with_affine(loc=scale * inner, scale=scale,
                            label=f"vertex-fluctuation limit (c={c:g})")


# ---------------------------------------------------------------------------
# regular-tree limit: atomic Levy measure and spectrally positive Levy law

@dataclass(frozen=True)
class AtomicLevyMeasure:
    """Measure with atoms of mass b^k at positions b^(rho - k), k in a window.

    The window [kmin, kmax] is chosen so both the omitted large-position mass
    and the omitted contribution to int (1 ^ x^2) d(measure) stay below the
    requested tail tolerance.
    """

    positions: np.ndarray
    masses: np.ndarray
    rho: float
    b: int
    kmin: int
    kmax: int

    def tail(self, x: float) -> float:
        """Mass strictly beyond x, from the truncated atoms."""
        return float(self.masses[self.positions > x].sum())

    def closed_tail(self, x: float) -> float:
        """The closed tail formula b^(floor(rho - log_b x) + 1)/(b - 1).

        At atom points this equals the mass of [x, inf) (left limit of the
        right-continuous tail); elsewhere it matches tail(x).
        """
        if x <= 0:
            raise ValueError("tail argument must be positive")
        k = math.floor(self.rho - math.log(x) / math.log(self.b))
        return float(self.b) ** (k + 1) / (self.b - 1.0)

    def laplace_exponent(self, a: float) -> float:
        """sum of masses * (e^{-a x} - 1 + a x [x < 1]) over the window."""
        xs = self.positions
        comp = np.where(xs < 1.0, a * xs, 0.0)
        return float(np.sum(self.masses * (np.exp(-a * xs) - 1.0 + comp)))


def lambda_rho(rho: float, b: int, tail_tol: float = 1e-10) -> AtomicLevyMeasure:
    """Truncated atomic measure with tail b^(floor(rho - log_b x)+1)/(b-1).

    Atom masses are extracted as tail differences across each jump point
    (evaluated at geometric midpoints, where the floor is unambiguous).
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    if b < 2:
        raise ValueError(f"b must be >= 2, got {b}")
    if not 0 < tail_tol < 1.0:
        raise ValueError("tail_tol must be in (0, 1)")
    lb = math.log(b)
    # omitted mass at large positions: sum_{k < kmin} b^k = b^kmin/(b-1)
    kmin = math.floor(math.log(tail_tol * (b - 1.0)) / lb)
    # omitted (1 ^ x^2) weight at small positions:
    # sum_{k > kmax} b^k x_k^2 = b^(2 rho - kmax)/(b-1)
    kmax = math.ceil(2.0 * rho - math.log(tail_tol * (b - 1.0)) / lb)
    if kmin < -ATOM_WINDOW_CAP or kmax > ATOM_WINDOW_CAP:
        raise ValueError(
            f"tail_tol={tail_tol:g} needs atom window [{kmin}, {kmax}] beyond the "
            f"cap +/-{ATOM_WINDOW_CAP}")
    ks = np.arange(kmin, kmax + 1)
    positions = np.power(float(b), rho - ks)

    def closed_tail(x: np.ndarray) -> np.ndarray:
        kk = np.floor(rho - np.log(x) / lb)
        return np.power(float(b), kk + 1) / (b - 1.0)

    mid_right = np.power(float(b), rho - ks - 0.5)   # between x_k and x_{k+1}
    mid_left = np.power(float(b), rho - ks + 0.5)    # between x_{k-1} and x_k
    masses = closed_tail(mid_right) - closed_tail(mid_left)
    return AtomicLevyMeasure(positions=positions, masses=masses, rho=float(rho),
                             b=int(b), kmin=int(kmin), kmax=int(kmax))


def _levy_law_from_measure(c: float, meas: AtomicLevyMeasure, label: str) -> LimitLaw:
    # Jump intensities c * b^(k - rho): the b^-rho factor relative to the raw
    # atom masses is required for the law to match direct simulation of the
    # regular-tree statistics at rho != 0 (at rho = 0 the two coincide).
    rate = c * float(meas.b) ** (-meas.rho)
    xs = meas.positions.copy()
    weights = rate * meas.masses.copy()
    compensate = xs < 1.0

    def cf(t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t).astype(float)
        out = np.empty(t.shape, dtype=complex)
        chunk = max(1, (1 << 20) // xs.size)
        for lo in range(0, t.size, chunk):
            th = t[lo:lo + chunk, None]
            term = weights * (np.exp(1j * th * xs) - 1.0 - 1j * th * xs * compensate)
            out[lo:lo + chunk] = np.exp(term.sum(axis=-1))
        return out[0] if scalar else out

    # modulus bound: some atom always has t * x in (pi/b, pi], giving
    # |cf(t)| <= exp(-kappa t) with kappa = (2/pi) * rate * b^(rho - 1)
    kappa = 0.9 * (2.0 / math.pi) * rate * float(meas.b) ** (meas.rho - 1.0)
    # phase-drift bound: atoms with significant weight; each x >= 1 atom
    # contributes weight * position, the compensated side is second order
    sig = weights >= 1e-9
    big = sig & (xs >= 1.0)
    slope = float(np.sum(weights[big] * xs[big])) + 6.0 * max(c, 1.0) + 12.0
    return LimitLaw(cf=cf, label=label, modulus_decay=kappa, phase_slope=slope)


def levy_rho_law(c: float, rho: float, b: int, tol: float = 1e-10) -> LimitLaw:
    """Law of the spectrally positive Levy variable at time c.

    The characteristic function is the analytic continuation of the Laplace
    exponent of the jump measure: theta -> exp(sum of intensities *
    (e^{i theta x} - 1 - i theta x [x < 1])) over the truncated atom window.
    """
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    meas = lambda_rho(rho, b, tail_tol=min(1e-10, tol))
    return _levy_law_from_measure(c, meas, label=f"levy(b={b}, rho={rho:g}, c={c:g})")


def theorem4_limit(c: float, rho: float, b: int, tol: float = 1e-10) -> LimitLaw:
    """Limit of the regular-tree fluctuation statistic.

    -e^{-c} (L_rho(c) + c rho - c/(b-1)): scale -e^{-c} on the Levy base with
    the matching location shift.
    """
    base = levy_rho_law(c, rho, b, tol)
    scale = -math.exp(-c)
    loc = scale * (c * rho - c / (b - 1.0))
    return base.with_affine(loc=loc, scale=scale,
                            label=f"regular-tree limit (b={b}, rho={rho:g}, c={c:g})")
