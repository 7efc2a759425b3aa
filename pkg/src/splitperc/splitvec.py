"""Split-vector families, tree parameters, and their analytic constants.

A random split tree is driven by a split vector V = (V_1, ..., V_b): a random
probability vector over the b children of a vertex.  Everything asymptotic in
this package is governed by two entropy-like constants of the family,

    mu      = b * E[-V_1 ln V_1],
    sigma^2 = b * E[V_1 ln^2 V_1] - mu^2,

together with the lattice span of ln V_1 (zero for the continuous families
here, ln b for the deterministic vector).  The Mellin transform
m(t) = E[V_1^t] shows up in height bounds and in renewal-sum truncation.

All preset families have exchangeable coordinates whose first marginal is a
Beta law, which gives closed-form Mellin transforms and lets the quadrature
and Monte Carlo routes for (mu, sigma^2) cross-check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.special import betaln

EULER_GAMMA = float(np.euler_gamma)

# Binary search trees: N = n, alpha = 1, and the path-length correction
# constant equals 2*gamma - 4 for both the ball and the vertex path lengths.
BST_VARSIGMA = 2.0 * EULER_GAMMA - 4.0


class FamilyError(ValueError):
    """Invalid family definition or unsupported method for a family."""


@dataclass(frozen=True)
class SplitFamily:
    """A preset law for the split vector.

    kind is one of "bst" (vector (U, 1-U) with U uniform), "spacings"
    (uniform spacings of b-1 points, coordinates Beta(1, b-1)),
    "deterministic" (constant vector (1/b, ..., 1/b)), "dirichlet"
    (symmetric Dirichlet with concentration a > 0).
    """

    kind: str
    b: int
    a: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("bst", "spacings", "deterministic", "dirichlet"):
            raise FamilyError(f"unknown split family kind {self.kind!r}")
        if self.b < 2:
            raise FamilyError(f"branch factor must be >= 2, got {self.b}")
        if self.kind == "bst" and self.b != 2:
            raise FamilyError("bst family requires b = 2")
        if self.kind == "dirichlet":
            if self.a is None or not self.a > 0:
                raise FamilyError("dirichlet family needs concentration a > 0")
        elif self.a is not None:
            raise FamilyError(f"{self.kind} family takes no concentration parameter")

    @property
    def is_lattice(self) -> bool:
        return self.kind == "deterministic"

    @property
    def span(self) -> float:
        """Lattice span of ln V_1: largest d with ln V_1 in d*Z a.s.

        Declared per family, not inferred from samples: the span is a property
        of the law and undetectable from finite draws.  The deterministic
        vector has ln V_1 = -ln b identically, hence span ln b; the continuous
        families are non-lattice (span 0).
        """
        return math.log(self.b) if self.kind == "deterministic" else 0.0

    def beta_marginal(self) -> Optional[tuple[float, float]]:
        """(alpha, beta) of the Beta law of V_1, or None for deterministic."""
        if self.kind == "bst":
            return (1.0, 1.0)
        if self.kind == "spacings":
            return (1.0, float(self.b - 1))
        if self.kind == "dirichlet":
            return (float(self.a), float(self.a) * (self.b - 1))
        return None

    def sample_matrix(self, m: int, rng: np.random.Generator) -> np.ndarray:
        """Draw m independent split vectors as an (m, b) array.

        Rows are nonnegative and sum to 1 up to float rounding.  The
        deterministic family consumes no randomness.
        """
        b = self.b
        if self.kind == "deterministic":
            return np.full((m, b), 1.0 / b)
        if self.kind == "bst":
            u = rng.random(m)
            return np.stack([u, 1.0 - u], axis=1)
        if self.kind == "spacings":
            pts = np.sort(rng.random((m, b - 1)), axis=1)
            out = np.empty((m, b))
            out[:, 0] = pts[:, 0]
            out[:, 1:-1] = np.diff(pts, axis=1)
            out[:, -1] = 1.0 - pts[:, -1]
            return out
        # symmetric Dirichlet via normalized gammas
        g = rng.standard_gamma(self.a, size=(m, b))
        return g / g.sum(axis=1, keepdims=True)

    def label(self) -> str:
        if self.kind == "bst":
            return "bst"
        if self.kind == "dirichlet":
            return f"dirichlet:{self.b}:{self.a:g}"
        return f"{self.kind}:{self.b}"


def binary_search_family() -> SplitFamily:
    return SplitFamily("bst", 2)


def spacings_family(b: int) -> SplitFamily:
    return SplitFamily("spacings", b)


def deterministic_family(b: int) -> SplitFamily:
    return SplitFamily("deterministic", b)


def dirichlet_family(b: int, a: float) -> SplitFamily:
    return SplitFamily("dirichlet", b, a)


def parse_family(name: str) -> SplitFamily:
    """Resolve a preset name: "bst", "spacings:b", "deterministic:b", "dirichlet:b:a"."""
    parts = name.strip().split(":")
    kind = parts[0]
    try:
        if kind == "bst":
            if len(parts) != 1:
                raise FamilyError("bst takes no parameters")
            return binary_search_family()
        if kind in ("spacings", "deterministic"):
            if len(parts) != 2:
                raise FamilyError(f"{kind} needs a branch factor, e.g. {kind}:3")
            return SplitFamily(kind, int(parts[1]))
        if kind == "dirichlet":
            if len(parts) != 3:
                raise FamilyError("dirichlet needs b and a, e.g. dirichlet:3:0.5")
            return SplitFamily(kind, int(parts[1]), float(parts[2]))
    except ValueError as exc:
        if isinstance(exc, FamilyError):
            raise
        raise FamilyError(f"malformed family spec {name!r}: {exc}") from exc
    raise FamilyError(f"unknown family {name!r}")


@dataclass(frozen=True)
class SplitParams:
    """Split-tree parameters (b, s, s0, s1, family).

    The integers must satisfy 0 < s, 0 <= s0 <= s and 0 <= b*s1 <= s + 1 - s0,
    which guarantees every overflow split has a nonnegative number of balls
    left for the multinomial stage.
    """

    b: int
    s: int
    s0: int
    s1: int
    family: SplitFamily

    def __post_init__(self):
        validate_params(self.b, self.s, self.s0, self.s1)
        if self.family.b != self.b:
            raise FamilyError(
                f"family branch factor {self.family.b} != tree branch factor {self.b}"
            )


def validate_params(b: int, s: int, s0: int, s1: int) -> None:
    """Check the admissibility inequalities, reporting which one failed."""
    for name, v in (("b", b), ("s", s), ("s0", s0), ("s1", s1)):
        if not isinstance(v, (int, np.integer)):
            raise TypeError(f"{name} must be an integer, got {type(v).__name__}")
    if b < 2:
        raise ValueError(f"branch factor b must be >= 2, got b={b}")
    if not s > 0:
        raise ValueError(f"vertex capacity must satisfy 0 < s, got s={s}")
    if not 0 <= s0 <= s:
        raise ValueError(f"need 0 <= s0 <= s, got s0={s0}, s={s}")
    if not 0 <= b * s1 <= s + 1 - s0:
        raise ValueError(
            f"need 0 <= b*s1 <= s + 1 - s0, got b*s1={b * s1}, s + 1 - s0={s + 1 - s0}"
        )


def preset_params(family: SplitFamily, s: int | None = None, s0: int | None = None,
                  s1: int | None = None) -> SplitParams:
    """Tree parameters for a family, with the standard preset defaults.

    "bst" defaults to (s, s0, s1) = (1, 1, 0); every other family defaults to
    the trie-style (1, 0, 0).  Any of the three may be overridden.
    """
    if family.kind == "bst":
        defaults = (1, 1, 0)
    else:
        defaults = (1, 0, 0)
    s = defaults[0] if s is None else s
    s0 = defaults[1] if s0 is None else s0
    s1 = defaults[2] if s1 is None else s1
    return SplitParams(family.b, s, s0, s1, family)


def sample_split_vector(family: SplitFamily, rng: np.random.Generator) -> np.ndarray:
    """One draw of the split vector; nonnegative, sums to 1 within 1e-12."""
    return family.sample_matrix(1, rng)[0]


@dataclass(frozen=True)
class FamilyConstants:
    """Analytic constants of a split family.

    mu and sigma2 are in nats.  span_d is the lattice span of ln V_1.  alpha
    (vertex/ball ratio), varsigma (path-length correction for ball depths) and
    zeta (for vertex depths) are only known analytically for bst; for other
    non-lattice families they can be estimated empirically by the harness.
    """

    mu: float
    sigma2: float
    span_d: float
    alpha: Optional[float] = None
    varsigma: Optional[float] = None
    zeta: Optional[float] = None

    def with_estimates(self, alpha: float | None = None, varsigma: float | None = None,
                       zeta: float | None = None) -> "FamilyConstants":
        return replace(
            self,
            alpha=self.alpha if alpha is None else alpha,
            varsigma=self.varsigma if varsigma is None else varsigma,
            zeta=self.zeta if zeta is None else zeta,
        )


def _neg_v_ln_v(v: np.ndarray) -> np.ndarray:
    # integrand -v ln v extended by continuity to 0 at v = 0
    v = np.asarray(v, float)
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = -v[pos] * np.log(v[pos])
    return out


def _v_ln2_v(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, float)
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = v[pos] * np.log(v[pos]) ** 2
    return out


def _beta_pdf(v, a, b):
    lognorm = betaln(a, b)
    return np.exp((a - 1.0) * np.log(v) + (b - 1.0) * np.log1p(-v) - lognorm)


def family_constants(family: SplitFamily, method: str = "quadrature",
                     budget: int = 200_000, seed=0) -> FamilyConstants:
    """Compute (mu, sigma2, span) for a family by the requested route.

    method "closed_form" is available only for bst and deterministic;
    "quadrature" integrates against the Beta marginal of V_1 with absolute
    tolerance 1e-9; "monte_carlo" averages over `budget` sampled vectors and
    is deterministic given the seed.
    """
    b = family.b
    span = family.span
    alpha = varsigma = zeta = None
    if family.kind == "bst":
        alpha, varsigma, zeta = 1.0, BST_VARSIGMA, BST_VARSIGMA

    if family.kind == "deterministic":
        # V_1 = 1/b identically: -ln V_1 is the constant ln b, no spread.
        return FamilyConstants(mu=math.log(b), sigma2=0.0, span_d=span)

    if method == "closed_form":
        if family.kind == "bst":
            return FamilyConstants(mu=0.5, sigma2=0.25, span_d=0.0,
                                   alpha=alpha, varsigma=varsigma, zeta=zeta)
        raise FamilyError(f"no closed-form constants for family {family.label()!r}")

    if method == "quadrature":
        ab = family.beta_marginal()
        if ab is None:  # pragma: no cover - deterministic handled above
            raise FamilyError(f"no marginal density for {family.label()!r}")
        a_, b_ = ab
        m1, _ = integrate.quad(lambda v: _neg_v_ln_v(v) * _beta_pdf(v, a_, b_),
                               0.0, 1.0, epsabs=1e-9, epsrel=1e-11, limit=200)
        m2, _ = integrate.quad(lambda v: _v_ln2_v(v) * _beta_pdf(v, a_, b_),
                               0.0, 1.0, epsabs=1e-9, epsrel=1e-11, limit=200)
        mu = b * m1
        sigma2 = b * m2 - mu * mu
    elif method == "monte_carlo":
        if budget <= 0:
            raise ValueError("monte_carlo needs a positive budget")
        rng = np.random.default_rng(seed)
        tot1 = 0.0
        tot2 = 0.0
        done = 0
        while done < budget:
            m = min(budget - done, 1 << 16)
            vec = family.sample_matrix(m, rng)
            tot1 += float(np.sum(_neg_v_ln_v(vec)))
            tot2 += float(np.sum(_v_ln2_v(vec)))
            done += m
        # full-vector sums: exchangeability makes sum_i -V_i ln V_i an
        # unbiased estimate of mu with lower variance than b * coordinate 0
        mu = tot1 / budget
        sigma2 = tot2 / budget - mu * mu
    else:
        raise ValueError(f"unknown method {method!r}")

    return FamilyConstants(mu=mu, sigma2=max(sigma2, 0.0), span_d=span,
                           alpha=alpha, varsigma=varsigma, zeta=zeta)


def mellin(family: SplitFamily, t: float) -> float:
    """Mellin transform m(t) = E[V_1^t] for t > 0.

    Strictly decreasing in t; tends to 0 as t grows for every family with
    P(V_1 = 1) = 0 (and equals b^-t for the deterministic vector).
    """
    if not t > 0:
        raise ValueError(f"mellin transform needs t > 0, got t={t}")
    if family.kind == "deterministic":
        return float(family.b) ** (-float(t))
    a_, b_ = family.beta_marginal()
    return float(np.exp(betaln(a_ + t, b_) - betaln(a_, b_)))
