"""Kernel definitions and manufactured test problems.

A kernel is described by its horizon, singularity exponent, output
dimension, symmetry flag, ball type, and a value function returning the
kernel matrix without the ball indicator; truncation is geometry's job.
The built-in kernels ship with the scaling constants that make their
operators converge to classical local operators, and each comes with a
manufactured solution whose forcing term is known in closed form.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .geometry import BALL_KINDS
from .mesh import Label


@dataclass(frozen=True)
class KernelSpec:
    """Kernel description consumed by assembly.

    value(x, y, label_x, label_y) returns the n-by-n kernel matrix for
    x != y, excluding the indicator of the interaction ball. The labels of
    the host elements are passed through for interface problems; built-in
    kernels ignore them. value must be pure: same inputs, same output, no
    internal state. s is the singularity exponent: the kernel times
    |x-y|^(2+2s) stays bounded. Nonpositive s encodes nonsingular kernels
    and steers the touching-pair quadrature dispatch.

    builtin_id and scale are implementation details: nonnegative ids select
    a compiled kernel evaluator and scale carries the scaling constant.
    """

    delta: float
    s: float
    n: int
    symmetric: bool
    ball: str
    value: callable = field(compare=False)
    builtin_id: int = -1
    scale: float = math.nan

    def __post_init__(self):
        if self.delta <= 0.0:
            raise ConfigurationError("kernel horizon delta must be positive")
        if self.s >= 1.0:
            raise ConfigurationError(f"singularity exponent s={self.s} must be below 1")
        if self.n not in (1, 2):
            raise ConfigurationError("kernel output dimension n must be 1 or 2")
        if self.ball not in BALL_KINDS:
            raise ConfigurationError(f"ball must be one of {BALL_KINDS}, got {self.ball!r}")


def fractional_kernel(s, delta, ball="nocaps"):
    """Truncated fractional-type diffusion kernel.

    Scalar kernel c |x-y|^(-2-2s) with c = (2-2s)/(pi delta^(2-2s)), the
    scaling under which the operator approaches the fractional Laplacian.
    """
    if not 0.0 < s < 1.0:
        raise ConfigurationError(f"fractional kernel needs 0 < s < 1, got s={s}")
    if delta <= 0.0:
        raise ConfigurationError("delta must be positive")
    cst = (2.0 - 2.0 * s) / (math.pi * delta ** (2.0 - 2.0 * s))
    expo = -1.0 - s

    def value(x, y, label_x=Label.DOMAIN, label_y=Label.DOMAIN):
        d0 = x[0] - y[0]
        d1 = x[1] - y[1]
        r2 = d0 * d0 + d1 * d1
        return np.array([[cst * r2**expo]])

    return KernelSpec(
        delta=delta, s=s, n=1, symmetric=True, ball=ball, value=value,
        builtin_id=0, scale=cst,
    )


def peridynamic_kernel(delta, ball="nocaps"):
    """Linear state-based kernel c (x-y)(x-y)^T / |x-y|^3 with c = 3/delta^3.

    Matrix valued (n=2), rank one, positive semidefinite. The entries grow
    like 1/|x-y|, so in exponent terms s = -0.5: integrable but unbounded,
    handled by skipping the diagonal on touching pairs.
    """
    if delta <= 0.0:
        raise ConfigurationError("delta must be positive")
    cst = 3.0 / delta**3

    def value(x, y, label_x=Label.DOMAIN, label_y=Label.DOMAIN):
        d0 = x[0] - y[0]
        d1 = x[1] - y[1]
        r2 = d0 * d0 + d1 * d1
        f = cst / (r2 * math.sqrt(r2))
        return np.array([[f * d0 * d0, f * d0 * d1], [f * d0 * d1, f * d1 * d1]])

    return KernelSpec(
        delta=delta, s=-0.5, n=2, symmetric=True, ball=ball, value=value,
        builtin_id=1, scale=cst,
    )


def constant_kernel_infinity(delta):
    """Constant kernel 3/(4 delta^4) truncated by the square of half width delta."""
    if delta <= 0.0:
        raise ConfigurationError("delta must be positive")
    cst = 3.0 / (4.0 * delta**4)

    def value(x, y, label_x=Label.DOMAIN, label_y=Label.DOMAIN):
        return np.array([[cst]])

    return KernelSpec(
        delta=delta, s=-1.0, n=1, symmetric=True, ball="infinity", value=value,
        builtin_id=2, scale=cst,
    )


@dataclass(frozen=True)
class ManufacturedProblem:
    """Exact solution, forcing term, and volume constraint data g = u."""

    n: int
    u_exact: callable
    f: callable
    g: callable


def problem_fractional():
    """Scalar polynomial solution for the fractional kernel studies.

    u(x) = x1^2 x2 + x2^2. The scaled operator reproduces the classical
    Laplacian on polynomials of degree up to three, so f = -2 (x2 + 1).
    """

    def u(x):
        x = np.asarray(x, dtype=float)
        return x[..., 0] ** 2 * x[..., 1] + x[..., 1] ** 2

    def f(x):
        x = np.asarray(x, dtype=float)
        return -2.0 * (x[..., 1] + 1.0)

    return ManufacturedProblem(n=1, u_exact=u, f=f, g=u)


def problem_peridynamic():
    """Vector polynomial solution for the state-based kernel studies.

    u(x) = (x2^2, x1^2 x2) and f = -(pi/2) (1 + 2 x1, x2), the image of u
    under the local elastic limit of the operator with the 3/delta^3
    scaling.
    """

    def u(x):
        x = np.asarray(x, dtype=float)
        return np.stack([x[..., 1] ** 2, x[..., 0] ** 2 * x[..., 1]], axis=-1)

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.stack(
            [
                -0.5 * math.pi * (1.0 + 2.0 * x[..., 0]),
                -0.5 * math.pi * x[..., 1],
            ],
            axis=-1,
        )

    return ManufacturedProblem(n=2, u_exact=u, f=f, g=u)


def problem_infinity():
    """Oscillatory solution used for the square-truncation compatibility study.

    u(x) = sin(4 pi x1) sin(4 pi x2) is a Laplacian eigenfunction, so the
    local limit forcing is f = 32 pi^2 u.
    """

    def u(x):
        x = np.asarray(x, dtype=float)
        return np.sin(4.0 * math.pi * x[..., 0]) * np.sin(4.0 * math.pi * x[..., 1])

    def f(x):
        return 32.0 * math.pi**2 * u(x)

    return ManufacturedProblem(n=1, u_exact=u, f=f, g=u)
