"""Classical solutions of the perturbed systems ``N_i x' = x + f``.

    x_i(t) = exp(A t) x0 + int_0^t exp(A (t - s)) A f(s) ds,   A = N_i^{-1}

Each time point is evaluated independently: the homogeneous part through an
exponential kernel, the convolution by adaptive quadrature with mandatory
splits on the boundary-layer scale ``1/rho`` (``rho`` the spectral radius of
``A``) next to the upper limit, where the kernel varies fastest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InputError, MissingIndex, Overflow, PreconditionError, Singular, SingularMember
from .matrix_core import as_matrix, mat_exp, mat_inverse, matrix_power, nilpotent_shift_split, spectral_data
from .quadrature import QuadratureSpec, integrate
from .signal_lang import as_piecewise, differentiate, eval_signal

LAYER_SPLITS = 10
_LOG_MAX = 709.0


# Perturbation families ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PerturbationFamily:
    """A sequence ``N_i`` tending to the nilpotent ``base``.

    ``kind`` is ``"shift"`` (``N - I/i``), ``"scaled_shift"``
    (``N - (scale/i) I``, ``scale > 0``) or ``"custom"`` (explicit
    ``members`` keyed by index, or a callable ``i -> matrix``).
    """

    kind: str
    base: np.ndarray
    scale: float = 1.0
    members: object = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "base", as_matrix(self.base, "N"))
        if self.kind not in ("shift", "scaled_shift", "custom"):
            raise InputError(f"unknown family kind {self.kind!r}")
        if self.kind == "scaled_shift" and not self.scale > 0:
            raise InputError("scaled_shift needs a positive scale")
        if self.kind == "custom" and self.members is None:
            raise InputError("custom family needs members")
        if self.kind == "custom" and isinstance(self.members, dict):
            object.__setattr__(self, "members", {int(k): as_matrix(v) for k, v in self.members.items()})
        if not self.name:
            label = {"shift": "shift", "scaled_shift": f"scaled_shift({self.scale:g})", "custom": "custom"}
            object.__setattr__(self, "name", label[self.kind])

    @property
    def n(self):
        return self.base.shape[0]

    def _raw(self, i):
        n = self.n
        if self.kind == "shift":
            return self.base - (1.0 / i) * np.eye(n)
        if self.kind == "scaled_shift":
            return self.base - (self.scale / i) * np.eye(n)
        if callable(self.members):
            return as_matrix(self.members(i))
        if i not in self.members:
            raise MissingIndex(f"custom family has no member for index {i}")
        return self.members[i]

    def realize(self, i: int, tol: float = 1e-14) -> np.ndarray:
        """``N_i``; raises ``SingularMember`` if it cannot be inverted."""
        if int(i) != i or i < 1:
            raise InputError("family index must be a positive integer")
        Ni = self._raw(int(i))
        if Ni.shape != self.base.shape:
            raise DimensionMismatch(f"member {i} has shape {Ni.shape}, base is {self.base.shape}")
        try:
            mat_inverse(Ni, tol)
        except Singular as exc:
            raise SingularMember(f"N_{i} is singular: {exc}") from exc
        return Ni


def realize(family: PerturbationFamily, i: int) -> np.ndarray:
    return family.realize(i)


# Exponential kernel --------------------------------------------------------------


class ExpKernel:
    """``sigma -> exp(A sigma)`` evaluated for whole arrays of ``sigma``.

    Uses the terminating series when ``A`` is a scalar shift of a nilpotent
    matrix, an eigen-decomposition when the eigenvectors are well conditioned,
    and per-point ``mat_exp`` otherwise.
    """

    def __init__(self, A):
        self.A = as_matrix(A)
        self.n = self.A.shape[0]
        split = nilpotent_shift_split(self.A)
        self.mode = "pointwise"
        if split is not None:
            s, K, cert = split
            self.mode = "shift"
            self.shift = s
            terms = [np.eye(self.n)]
            for k in range(1, cert.q):
                terms.append(terms[-1] @ K / k)
            self.terms = np.array(terms)
        else:
            w, V = np.linalg.eig(self.A)
            if np.linalg.cond(V) < 1e4:
                self.mode = "eig"
                self.w, self.V, self.Vinv = w, V, np.linalg.inv(V)

    def __call__(self, sigma):
        sig = np.atleast_1d(np.asarray(sigma, dtype=float))
        if self.mode == "shift":
            expo = self.shift * sig
            if np.any(expo > _LOG_MAX):
                raise Overflow("exp(A t) exceeds the representable range")
            powers = sig[:, None] ** np.arange(len(self.terms))[None, :]
            out = np.exp(expo)[:, None, None] * np.einsum("mk,kij->mij", powers, self.terms)
        elif self.mode == "eig":
            expo = np.outer(sig, self.w.real)
            if np.any(expo > _LOG_MAX):
                raise Overflow("exp(A t) exceeds the representable range")
            E = np.exp(np.outer(sig, self.w))
            out = np.einsum("ij,mj,jk->mik", self.V, E, self.Vinv).real
        else:
            out = np.array([mat_exp(self.A * s) for s in sig])
        if not np.all(np.isfinite(out)):
            raise Overflow("exp(A t) exceeds the representable range")
        return out if np.ndim(sigma) else out[0]


# Perturbed solution ---------------------------------------------------------------


def _is_zero_signal(f):
    return all(p.is_zero() for p in as_piecewise(f).pieces)


@dataclass(eq=False)
class PerturbedSolution:
    """``x_i`` for one member ``N_i``; call it with a time (or an array of times)."""

    Ni: np.ndarray
    x0: np.ndarray
    f: object
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        self.Ni = as_matrix(self.Ni, "N_i")
        self.x0 = np.asarray(self.x0, dtype=float).ravel()
        n = self.Ni.shape[0]
        if self.x0.shape != (n,):
            raise DimensionMismatch(f"x0 has {self.x0.size} entries, N_i is {n}x{n}")
        self.f = as_piecewise(self.f)
        if self.f.n != n:
            raise DimensionMismatch(f"forcing has {self.f.n} components, N_i is {n}x{n}")
        self.A = mat_inverse(self.Ni)
        self.kernel = ExpKernel(self.A)
        self.abscissa, self.rho = spectral_data(self.A)
        self.forced = not _is_zero_signal(self.f)

    @property
    def layer_width(self) -> float:
        return 1.0 / self.rho

    def layer_points(self, t0=0.0, direction=1.0):
        """``t0 + direction * j / rho`` for ``j = 1..LAYER_SPLITS``."""
        return [t0 + direction * j / self.rho for j in range(1, LAYER_SPLITS + 1)]

    def value_and_error(self, t: float):
        t = float(t)
        if not (math.isfinite(t) and t >= 0):
            raise InputError("t must be finite and nonnegative")
        if t == 0.0:
            return self.x0.copy(), 0.0
        hom = self.kernel(t) @ self.x0
        if not self.forced:
            return hom, 0.0
        A, f, kernel = self.A, self.f, self.kernel

        def integrand(s):
            return np.einsum("mij,jm->im", kernel(t - s), A @ eval_signal(f, s))

        pts = self.layer_points(t, -1.0) + list(f.breakpoints)
        res = integrate(integrand, 0.0, t, self.quad, points=pts)
        out = hom + res.value
        if not np.all(np.isfinite(out)):
            raise Overflow("perturbed solution is not representable")
        return out, res.error

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.value_and_error(t)[0]
        return np.array([self.value_and_error(s)[0] for s in np.ravel(t)]).T

    def rhs_derivative(self, t: float, m: int):
        """``N_i^{-m} x_i(t) + sum_{l=1}^m N_i^{-l} f^(m-l)(t)``."""
        out = matrix_power(self.A, m) @ self(t)
        for l in range(1, m + 1):
            out = out + matrix_power(self.A, l) @ eval_signal(differentiate(self.f, m - l), t)
        return out


def solve_perturbed(Ni, x0, f, t: float, quad: QuadratureSpec = QuadratureSpec()):
    """``x_i(t)`` for ``N_i x' = x + f``, ``x(0) = x0``."""
    return PerturbedSolution(Ni, x0, f, quad)(t)


def central_difference(func, t: float, m: int, h: float):
    """Second-order central difference for the ``m``-th derivative."""
    acc = 0.0
    for k in range(m + 1):
        acc = acc + (-1) ** k * math.comb(m, k) * func(t + (m / 2 - k) * h)
    return acc / h**m


def fd_step(t: float, m: int) -> float:
    return np.finfo(float).eps ** (1.0 / (m + 2)) * (1.0 + abs(t))


DERIVATIVE_QUAD = QuadratureSpec(1e-14, 1e-12)


def derivative_identity_residual(Ni, x0, f, m: int, t: float, quad: QuadratureSpec = DERIVATIVE_QUAD) -> float:
    """Norm of ``FD_m(x_i)(t) - [N_i^{-m} x_i(t) + sum_l N_i^{-l} f^(m-l)(t)]``.

    ``t`` must be at least one layer width from the origin.
    """
    if m < 1:
        raise InputError("m must be at least 1")
    sol = PerturbedSolution(Ni, x0, f, quad)
    h = fd_step(t, m)
    if t < sol.layer_width or t - 0.5 * m * h < 0:
        raise PreconditionError(f"t = {t} lies inside the boundary layer (width {sol.layer_width:.3g})")
    fd = central_difference(sol, t, m, h)
    return float(np.linalg.norm(fd - sol.rhs_derivative(t, m)))


# Layer integrals --------------------------------------------------------------------


class _Divergent:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Divergent"

    def __bool__(self):
        return False


Divergent = _Divergent()


@dataclass(frozen=True)
class LayerEstimate:
    value: float
    error: float
    horizon: float


def layer_integral_estimate(Ni, k: int, quad: QuadratureSpec = QuadratureSpec()):
    """``int_0^inf ||N_i^k exp(N_i^{-1} t)||_F dt`` or ``Divergent``.

    The integral is truncated at a horizon ``T`` where the integrand has dropped
    below ``abs_tol * 1e-3`` and is past its polynomial hump; the tail bound
    ``2 g(T) / |alpha|`` is added to the error estimate.
    """
    if k < 0:
        raise InputError("k must be nonnegative")
    Ni = as_matrix(Ni, "N_i")
    n = Ni.shape[0]
    A = mat_inverse(Ni)
    alpha, rho = spectral_data(A)
    if alpha >= 0:
        return Divergent
    kernel = ExpKernel(A)
    Nk = matrix_power(Ni, k)

    def g(t):
        return np.linalg.norm(Nk[None, :, :] @ kernel(np.atleast_1d(t)), axis=(1, 2))

    decay = abs(alpha)
    threshold = quad.abs_tol * 1e-3
    T = max(1.0 / decay, 2.0 * max(n - 1, 1) / decay, LAYER_SPLITS / rho)
    for _ in range(400):
        if g(T)[0] < threshold:
            break
        T *= 2.0
    else:
        raise Overflow("layer integrand does not decay to the truncation threshold")
    pts = [j / rho for j in range(1, LAYER_SPLITS + 1)]
    res = integrate(g, 0.0, T, quad, points=pts)
    tail = 2.0 * float(g(T)[0]) / decay
    return LayerEstimate(float(res.value) + tail, res.error + tail, T)
