"""Series solution and truncated moments for the random-frequency
oscillator on a curve.

The equation is the second-order mean-square oscillator driven in the
mass coordinate: the second derivative plus A^2 times the solution is
zero, with random initial data X0, X1 and the squared amplitude A^2
either Beta-distributed or a fixed number. The power-series ansatz in
J gives the two-term recurrence c[m+2] = -A^2 c[m] / ((m+2)(m+1)),
so the closed form is X0 cos(A J) + (X1 / A) sin(A J).

Truncation convention: order N keeps summation index m = 0..N in each
of the even and odd sums (polynomial degree 2N, resp. 2N+1).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .errors import CurveDomainError

DEFAULT_ORDER = 20


def beta_raw_moment(mu: float, nu: float, m: int) -> float:
    """E[B^m] for B ~ Beta(mu, nu): the product of (mu+k)/(mu+nu+k)."""
    if mu <= 0.0 or nu <= 0.0:
        raise CurveDomainError("Beta parameters must be positive")
    if m < 0:
        raise CurveDomainError("moment order must be non-negative")
    out = 1.0
    for k in range(m):
        out *= (mu + k) / (mu + nu + k)
    return out


class BetaSquaredAmplitude:
    """A^2 ~ Beta(mu, nu); supplies raw moments and draws."""

    def __init__(self, mu: float, nu: float):
        if mu <= 0.0 or nu <= 0.0:
            raise CurveDomainError("Beta parameters must be positive")
        self.mu = float(mu)
        self.nu = float(nu)

    def moment(self, m: int) -> float:
        return beta_raw_moment(self.mu, self.nu, m)

    def sample(self, gen, size: int) -> np.ndarray:
        return gen.beta(self.mu, self.nu, size)

    def describe(self) -> str:
        return f"beta({self.mu:g},{self.nu:g})"


class FixedSquaredAmplitude:
    """Deterministic A^2 = value (covers settings a Beta variable cannot
    reach, e.g. E[A^2] = 4)."""

    def __init__(self, value: float):
        if value < 0.0:
            raise CurveDomainError("a squared amplitude cannot be negative")
        self.value = float(value)

    def moment(self, m: int) -> float:
        return self.value ** m

    def sample(self, gen, size: int) -> np.ndarray:
        return np.full(size, self.value)

    def describe(self) -> str:
        return f"fixed({self.value:g})"


@dataclass
class MomentSpec:
    """Joint moments of the initial data plus the A^2 moment provider.

    X0 and X1 may be correlated through ex01; A^2 is independent of both.
    """

    ex0: float
    ex1: float
    ex0_sq: float
    ex1_sq: float
    ex01: float
    a2: object

    def __post_init__(self):
        slack = 1e-12
        if self.ex0_sq < self.ex0 ** 2 - slack:
            raise CurveDomainError("E[X0^2] < E[X0]^2 is not a moment pair")
        if self.ex1_sq < self.ex1 ** 2 - slack:
            raise CurveDomainError("E[X1^2] < E[X1]^2 is not a moment pair")
        bound = math.sqrt(max(self.ex0_sq * self.ex1_sq, 0.0))
        if abs(self.ex01) > bound + slack:
            raise CurveDomainError("|E[X0 X1]| exceeds the Cauchy-Schwarz bound")
        if abs(self.a2.moment(0) - 1.0) > slack:
            raise CurveDomainError("A^2 moment provider must return 1 at order 0")


def frobenius_coefficients(x0: float, x1: float, a2: float, n_max: int) -> np.ndarray:
    """Series coefficients c[0..n_max] from the two-term recurrence
    c[m+2] = -a2 * c[m] / ((m+2)(m+1)), seeded by c[0]=x0, c[1]=x1."""
    if n_max < 2:
        raise CurveDomainError("need n_max >= 2 for the recurrence to act")
    c = np.zeros(n_max + 1)
    c[0] = x0
    if n_max >= 1:
        c[1] = x1
    for m in range(n_max - 1):
        c[m + 2] = -a2 * c[m] / ((m + 2) * (m + 1))
    return c


def mean_coefficients(spec: MomentSpec, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Polynomial coefficients (in J) of the truncated ensemble mean."""
    coeffs = np.zeros(2 * order + 2)
    for m in range(order + 1):
        am = spec.a2.moment(m)
        sign = -1.0 if m % 2 else 1.0
        coeffs[2 * m] += spec.ex0 * sign * am / math.factorial(2 * m)
        coeffs[2 * m + 1] += spec.ex1 * sign * am / math.factorial(2 * m + 1)
    return coeffs


def truncated_mean(spec: MomentSpec, order: int, j_values) -> np.ndarray:
    """Truncated ensemble mean evaluated at the given mass coordinates."""
    coeffs = mean_coefficients(spec, order)
    return np.polynomial.polynomial.polyval(np.asarray(j_values, dtype=float), coeffs)


def second_moment_coefficients(spec: MomentSpec, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Polynomial coefficients of the truncated second moment.

    Diagonal-plus-cross expansion: the diagonal terms carry
    E[(A^2)^(2m)] against J^(4m) (even data) and J^(4m+2) (odd data),
    and the even-odd cross terms carry the alternating E[(A^2)^(n+m)]
    weights. For the full termwise square of the series see
    ``squared_series_coefficients``; the two agree through order J but
    differ from J^2 on.
    """
    coeffs = np.zeros(4 * order + 3)
    for m in range(order + 1):
        a2m = spec.a2.moment(2 * m)
        coeffs[4 * m] += spec.ex0_sq * a2m / math.factorial(2 * m) ** 2
        coeffs[4 * m + 2] += spec.ex1_sq * a2m / math.factorial(2 * m + 1) ** 2
    for n_idx in range(order + 1):
        for m in range(order + 1):
            sign = -1.0 if (n_idx + m) % 2 else 1.0
            coeffs[2 * (n_idx + m) + 1] += (
                2.0 * spec.ex01 * sign * spec.a2.moment(n_idx + m)
                / (math.factorial(2 * n_idx) * math.factorial(2 * m + 1))
            )
    return coeffs


def truncated_second_moment(spec: MomentSpec, order: int, j_values) -> np.ndarray:
    coeffs = second_moment_coefficients(spec, order)
    return np.polynomial.polynomial.polyval(np.asarray(j_values, dtype=float), coeffs)


def squared_series_coefficients(spec: MomentSpec, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Second-moment coefficients from squaring the truncated series
    termwise (all even-even and odd-odd pairings kept). Used as the
    diagnostic cross-check: with deterministic data it collapses to the
    squared mean exactly."""
    coeffs = np.zeros(4 * order + 3)
    for n_idx in range(order + 1):
        for m in range(order + 1):
            sign = -1.0 if (n_idx + m) % 2 else 1.0
            anm = spec.a2.moment(n_idx + m)
            coeffs[2 * (n_idx + m)] += (
                spec.ex0_sq * sign * anm
                / (math.factorial(2 * n_idx) * math.factorial(2 * m))
            )
            coeffs[2 * (n_idx + m) + 2] += (
                spec.ex1_sq * sign * anm
                / (math.factorial(2 * n_idx + 1) * math.factorial(2 * m + 1))
            )
            coeffs[2 * (n_idx + m) + 1] += (
                2.0 * spec.ex01 * sign * anm
                / (math.factorial(2 * n_idx) * math.factorial(2 * m + 1))
            )
    return coeffs


@dataclass
class SeriesSolution:
    """Truncated moment polynomials in the mass coordinate."""

    order: int
    mean_coeffs: np.ndarray
    second_coeffs: np.ndarray

    def mean(self, j):
        return np.polynomial.polynomial.polyval(np.asarray(j, dtype=float), self.mean_coeffs)

    def second_moment(self, j):
        return np.polynomial.polynomial.polyval(np.asarray(j, dtype=float), self.second_coeffs)

    def variance(self, j):
        """Pointwise E[X^2] - E[X]^2. Truncation can push small-J values
        slightly negative; dips beyond 1e-9 are reported, not fatal."""
        var = self.second_moment(j) - self.mean(j) ** 2
        worst = float(np.min(var)) if np.size(var) else 0.0
        if worst < -1e-9:
            warnings.warn(
                f"truncated variance dips to {worst:.3e}; raise the order",
                stacklevel=2,
            )
        return var


def solve_series(spec: MomentSpec, order: int = DEFAULT_ORDER) -> SeriesSolution:
    return SeriesSolution(
        order, mean_coefficients(spec, order), second_moment_coefficients(spec, order)
    )


def closed_form_sample(a: float, x0: float, x1: float, j):
    """Pathwise solution x0*cos(a j) + (x1/a)*sin(a j).

    At a = 0 the sine term degenerates: with x1 = 0 the solution is the
    constant x0, otherwise the limit form x0 + x1*j is returned (with a
    warning, since the division was removable only in the limit).
    """
    j = np.asarray(j, dtype=float)
    if a == 0.0:
        if x1 == 0.0:
            return np.full_like(j, x0)
        warnings.warn("a = 0 with x1 != 0: returning the limit form x0 + x1*j",
                      stacklevel=2)
        return x0 + x1 * j
    return x0 * np.cos(a * j) + (x1 / a) * np.sin(a * j)


def deterministic_initial_data(x0: float, x1: float):
    """Initial-data sampler for fixed starting values."""

    def draw(gen, size):
        return np.full(size, x0), np.full(size, x1)

    return draw


@dataclass
class EnsembleMoments:
    mean: np.ndarray
    second: np.ndarray
    mean_stderr: np.ndarray
    second_stderr: np.ndarray
    n: int


def mc_solution_moments(a2_provider, initial_sampler, n: int, seed: int,
                        j_values) -> EnsembleMoments:
    """Monte Carlo moments of the pathwise closed form.

    Draws (A^2, X0, X1) with A^2 independent of the initial data,
    evaluates the closed form per path, and returns ensemble mean and
    second-moment curves with their standard errors.
    """
    if n < 2:
        raise CurveDomainError("need at least 2 realizations")
    j = np.asarray(j_values, dtype=float)
    gen = _rng.stream(seed, 0)
    a2 = np.asarray(a2_provider.sample(gen, n), dtype=float)
    x0, x1 = initial_sampler(_rng.stream(seed, 1), n)
    a = np.sqrt(a2)
    safe_a = np.where(a == 0.0, 1.0, a)
    sin_term = np.where(
        (a == 0.0)[:, None], j[None, :],
        np.sin(a[:, None] * j[None, :]) / safe_a[:, None],
    )
    paths = x0[:, None] * np.cos(a[:, None] * j[None, :]) + x1[:, None] * sin_term
    mean = paths.mean(axis=0)
    second = (paths ** 2).mean(axis=0)
    mean_se = paths.std(axis=0, ddof=1) / math.sqrt(n)
    second_se = (paths ** 2).std(axis=0, ddof=1) / math.sqrt(n)
    return EnsembleMoments(mean, second, mean_se, second_se, n)


def residual_check(a2: float, x0: float, x1: float, order: int, j_grid,
                   h: float = 1e-3) -> float:
    """Max residual of the truncated pathwise series in the oscillator
    equation, with the second derivative taken as a central difference in
    the mass coordinate.

    The recurrence kills every interior term, so the residual is the
    differencing error plus a2 times the last two kept series terms; at
    low orders the truncation tail dominates.
    """
    if order < 2:
        raise CurveDomainError("need truncation order >= 2")
    coeffs = frobenius_coefficients(x0, x1, a2, 2 * order + 1)
    j = np.asarray(j_grid, dtype=float)
    polyval = np.polynomial.polynomial.polyval
    second = (polyval(j + h, coeffs) - 2.0 * polyval(j, coeffs)
              + polyval(j - h, coeffs)) / (h * h)
    resid = second + a2 * polyval(j, coeffs)
    return float(np.abs(resid).max())
