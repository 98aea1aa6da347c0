"""Weierstrass-type reduction of a regular pencil ``E x' = A x + g``.

With a shift ``c`` making ``cE - A`` invertible, ``Ehat = (cE - A)^{-1} E``
satisfies ``Ehat x' = (c Ehat - I) x + ghat``. The range and kernel of
``Ehat^n`` are complementary invariant subspaces on which ``Ehat`` is
invertible and nilpotent respectively; in that basis the system splits into

    slow:  z1' = J z1 + Ehat1^{-1} ghat1,           J = Ehat1^{-1} (c Ehat1 - I)
    fast:  M z2' = z2 + (c N0 - I)^{-1} ghat2,       M = (c N0 - I)^{-1} N0

and ``x = T [z1; z2]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .distributions import GeneralizedFunction, gf_to_json, transform
from .errors import DimensionMismatch, IllConditioned, NotRegular
from .matrix_core import as_matrix, mat_inverse, nilpotency_index, rank_split
from .perturbed import ExpKernel
from .quadrature import QuadratureSpec, integrate
from .signal_lang import VectorSignal, apply_matrix, as_piecewise, eval_signal
from .singular import SolveRequest, solve_singular

DEFAULT_REDUCTION_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Pencil:
    E: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        E, A = as_matrix(self.E, "E"), as_matrix(self.A, "A")
        if E.shape != A.shape:
            raise DimensionMismatch(f"E is {E.shape}, A is {A.shape}")
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "A", A)

    @property
    def n(self) -> int:
        return self.E.shape[0]


def shift_candidates(count: int):
    """``0, 1, -1, 2, -2, ...`` (the first ``count`` of them)."""
    seq = itertools.chain([0.0], itertools.chain.from_iterable((float(k), float(-k)) for k in itertools.count(1)))
    return list(itertools.islice(seq, count))


def check_regular(p: Pencil) -> float:
    """Return a shift ``c`` with ``cE - A`` invertible and best conditioned.

    ``det(sE - A)`` is a polynomial of degree at most ``n``; if it vanishes at
    all ``2n + 3`` sample shifts (more than ``n + 1``) the pencil is singular.
    """
    n = p.n
    best = None
    scaleE, scaleA = np.linalg.norm(p.E), np.linalg.norm(p.A)
    for c in shift_candidates(2 * n + 3):
        S = c * p.E - p.A
        sv = np.linalg.svd(S, compute_uv=False)
        scale = abs(c) * scaleE + scaleA
        if scale == 0 or sv[-1] <= 1e-13 * scale:
            continue
        cond = sv[0] / sv[-1]
        if best is None or cond < best[0]:
            best = (cond, c)
    if best is None:
        raise NotRegular("det(sE - A) vanishes at every sample shift")
    return best[1]


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    """Slow/fast decomposition; ``x = T @ concat(z1, z2)``.

    ``slow_forcing`` and ``fast_forcing`` map the original forcing ``g`` to the
    forcing of each subsystem (``Ehat1^{-1} ghat1`` and
    ``(c N0 - I)^{-1} ghat2``).
    """

    T: np.ndarray
    Tinv: np.ndarray
    n_slow: int
    J: np.ndarray
    M: np.ndarray
    q: int
    slow_forcing: np.ndarray
    fast_forcing: np.ndarray
    shift: float
    Ehat_blocks: tuple
    condition: float
    block_residual: float

    @property
    def n(self):
        return self.T.shape[0]

    @property
    def n_fast(self):
        return self.n - self.n_slow

    @property
    def T_slow(self):
        return self.T[:, : self.n_slow]

    @property
    def T_fast(self):
        return self.T[:, self.n_slow :]

    def to_json(self) -> dict:
        return {
            "shift": self.shift,
            "T": self.T.tolist(),
            "slow": {"dimension": self.n_slow, "J": self.J.tolist(), "forcing": self.slow_forcing.tolist()},
            "fast": {
                "dimension": self.n_fast,
                "M": self.M.tolist(),
                "index": self.q,
                "forcing": self.fast_forcing.tolist(),
            },
            "condition_T": self.condition,
            "block_residual": self.block_residual,
            "norm": "frobenius",
        }


def stable_power_split(Ehat, tol: float):
    """``rank_split`` of ``Ehat^k`` for the first ``k`` at which the rank stops dropping.

    Range and kernel of ``Ehat^k`` stop changing once ``k`` reaches the index
    of the zero eigenvalue, so they coincide with those of ``Ehat^n``. Each
    power is judged against the rounding of its own multiplication,
    ``||Ehat^(k-1)|| * ||Ehat||``, rather than the much larger ``||Ehat||^n``
    that a non-normal ``Ehat`` would produce.
    """
    n = Ehat.shape[0]
    normE = np.linalg.norm(Ehat)
    prev_rank, prev = n, np.eye(n)
    for _ in range(n):
        P = prev @ Ehat
        split = rank_split(P, tol=tol, reference=np.linalg.norm(prev) * normE)
        if split[0] == prev_rank or split[0] == 0:
            return split
        prev_rank, prev = split[0], P
    return split


def invariant_bases(Ehat, rank: int):
    """Orthonormal bases of the slow (``rank`` largest eigenvalues) and fast
    invariant subspaces of ``Ehat``.

    Rounding in ``Ehat`` splits its zero eigenvalue into a tiny cluster, so the
    computed kernel of ``Ehat^k`` is only approximately invariant. Ordered real
    Schur forms give subspaces that are invariant to backward error: the slow
    one from ``Ehat``, the fast one as the orthogonal complement of the slow
    left invariant subspace (from ``Ehat.T``).
    """
    n = Ehat.shape[0]
    if rank in (0, n):
        return (np.zeros((n, 0)), np.eye(n)) if rank == 0 else (np.eye(n), np.zeros((n, 0)))
    mags = np.sort(np.abs(np.linalg.eigvals(Ehat)))[::-1]
    cut = np.sqrt(mags[rank - 1] * max(mags[rank], np.finfo(float).eps * np.linalg.norm(Ehat)))
    slow = lambda re, im: np.hypot(re, im) > cut
    _, Z, sdim = scipy.linalg.schur(Ehat, output="real", sort=slow)
    _, W, sdim_left = scipy.linalg.schur(Ehat.T, output="real", sort=slow)
    if sdim != rank or sdim_left != rank:
        raise IllConditioned(f"eigenvalue magnitudes do not separate a {rank}-dimensional slow part")
    return Z[:, :rank].copy(), W[:, rank:].copy()


def weierstrass_reduce(p: Pencil, tol: float = DEFAULT_REDUCTION_TOL) -> ReducedSystem:
    n = p.n
    c = check_regular(p)
    S_inv = mat_inverse(c * p.E - p.A)
    Ehat = S_inv @ p.E
    rank, _, _ = stable_power_split(Ehat, min(tol, 1e-10))
    rng, ker = invariant_bases(Ehat, rank)
    T = np.hstack([rng, ker])
    cond = float(np.linalg.cond(T))
    if not np.isfinite(cond) or cond > 1.0 / tol:
        raise IllConditioned(f"slow/fast basis has condition number {cond:.3e}")
    Tinv = np.linalg.inv(T)
    B = Tinv @ Ehat @ T
    r = rank
    off = max(np.linalg.norm(B[:r, r:]), np.linalg.norm(B[r:, :r])) if 0 < r < n else 0.0
    if off > tol * max(1.0, np.linalg.norm(B)):
        raise IllConditioned(f"reduced pencil is not block diagonal (off-diagonal norm {off:.3e})")
    E1, N0 = B[:r, :r], B[r:, r:]
    if r:
        E1inv = mat_inverse(E1)
        J = E1inv @ (c * E1 - np.eye(r))
        slow_forcing = E1inv @ Tinv[:r] @ S_inv
    else:
        J = np.zeros((0, 0))
        slow_forcing = np.zeros((0, n))
    if r < n:
        F = mat_inverse(c * N0 - np.eye(n - r))
        M = F @ N0
        q = nilpotency_index(M, tol).q
        fast_forcing = F @ Tinv[r:] @ S_inv
    else:
        M = np.zeros((0, 0))
        q = 0
        fast_forcing = np.zeros((0, n))
    return ReducedSystem(
        T=T,
        Tinv=Tinv,
        n_slow=r,
        J=J,
        M=M,
        q=q,
        slow_forcing=slow_forcing,
        fast_forcing=fast_forcing,
        shift=c,
        Ehat_blocks=(E1, N0),
        condition=cond,
        block_residual=float(off),
    )


class SlowTrajectory:
    """``z1(t) = exp(J t) z10 + int_0^t exp(J (t - s)) h(s) ds`` with ``h = slow forcing``."""

    def __init__(self, J, z10, h, quad: QuadratureSpec = QuadratureSpec()):
        self.J = np.asarray(J, dtype=float)
        self.z10 = np.asarray(z10, dtype=float)
        self.h = h
        self.quad = quad
        self.kernel = ExpKernel(self.J) if self.J.size else None

    def __call__(self, t: float):
        if self.kernel is None:
            return np.zeros(0)
        t = float(t)
        out = self.kernel(t) @ self.z10
        if t > 0 and self.h is not None and not all(pc.is_zero() for pc in as_piecewise(self.h).pieces):
            kernel, h = self.kernel, self.h

            def integrand(s):
                return np.einsum("mij,jm->im", kernel(t - s), eval_signal(h, s))

            out = out + integrate(integrand, 0.0, t, self.quad, points=as_piecewise(h).breakpoints).value
        return out


@dataclass(eq=False)
class DescriptorSolution:
    reduced: ReducedSystem
    slow: SlowTrajectory
    fast: GeneralizedFunction | None
    fast_request: SolveRequest | None

    def reconstruct_fast(self) -> GeneralizedFunction | None:
        """The fast part mapped back to the original coordinates (``T_fast z2``)."""
        if self.fast is None:
            return None
        return transform(self.reduced.T_fast, self.fast)

    def smooth_value(self, t: float):
        """Classical part of ``x(t)`` for ``t > 0`` (slow trajectory plus fast smooth part)."""
        x = np.zeros(self.reduced.n)
        if self.reduced.n_slow:
            x = x + self.reduced.T_slow @ self.slow(t)
        if self.fast is not None:
            x = x + self.reduced.T_fast @ eval_signal(self.fast.smooth, t)
        return x

    def impulses(self):
        """Impulse coefficients in original coordinates, keyed by derivative order."""
        fx = self.reconstruct_fast()
        return {} if fx is None else fx.impulse_dict()

    def to_json(self) -> dict:
        fx = self.reconstruct_fast()
        return {
            "reduced": self.reduced.to_json(),
            "fast_solution": None if self.fast is None else gf_to_json(self.fast),
            "fast_in_x": None if fx is None else gf_to_json(fx),
        }


def solve_descriptor(p: Pencil, x0, g, tol: float = DEFAULT_REDUCTION_TOL, quad: QuadratureSpec = QuadratureSpec()):
    """Solve ``E x' = A x + g``, ``x(0) = x0`` through the slow/fast split."""
    red = weierstrass_reduce(p, tol)
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.shape != (p.n,):
        raise DimensionMismatch(f"x0 has {x0.size} entries, pencil is {p.n}x{p.n}")
    g = g if g is not None else VectorSignal.zeros(p.n)
    if g.n != p.n:
        raise DimensionMismatch(f"forcing has {g.n} components, pencil is {p.n}x{p.n}")
    z0 = red.Tinv @ x0
    r = red.n_slow
    slow = SlowTrajectory(red.J, z0[:r], apply_matrix(red.slow_forcing, g) if r else None, quad)
    fast = req = None
    if red.n_fast:
        req = SolveRequest(red.M, z0[r:], apply_matrix(red.fast_forcing, g), tol=tol)
        fast = solve_singular(req)
    return DescriptorSolution(red, slow, fast, req)
