"""Representations into PSL(2,C), parabolic Eichler cocycles and their calculus.

A cocycle is stored by its values on the presentation generators and extended
to arbitrary words through chi(g1 g2) = chi(g1) + rho(g1).chi(g2).  Tangent
vectors along representation families are realized with 4th-order central
differences of sign-aligned SL(2,C) lifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .sl2 import (
    MoebiusMap,
    QuadPoly,
    ad_matrix,
    adjoint_action,
    mat_inv_unit,
    mat_norm,
    matrix_to_poly,
    project_traceless,
)
from .words import FreeWord, GroupRingElement, Signature, relator

DEFAULT_FD_STEP = 1e-3
_RCOND = 1e-9


class CocycleNotParabolicError(ValueError):
    def __init__(self, word, residual: float, tol: float):
        super().__init__(
            f"cocycle is not a local coboundary at {word}: residual {residual:.3e} > {tol:.3e}")
        self.residual = residual


class BranchJumpError(RuntimeError):
    """Consecutive SL2 lifts along a family are too far apart for sign alignment."""


def elliptic_trace_targets(order: int) -> list[float]:
    """|trace| values compatible with an elliptic generator of the given order."""
    return [abs(2 * math.cos(math.pi * k / order))
            for k in range(1, order) if math.gcd(k, order) == 1]


@dataclass(frozen=True)
class Representation:
    """Generator-indexed homomorphism of the signature's group into PSL(2,C)."""

    signature: Signature
    images: dict[str, MoebiusMap]

    def __post_init__(self):
        missing = [g for g in self.signature.generators if g not in self.images]
        if missing:
            raise ValueError(f"missing generator images: {missing}")

    def image(self, w: FreeWord) -> MoebiusMap:
        out = MoebiusMap.identity()
        for name, exp in w:
            m = self.images[name]
            out = out @ (m if exp == 1 else m.inverse())
        return out

    def relator_residual(self) -> float:
        return self.image(relator(self.signature)).psl_distance(MoebiusMap.identity())

    def trace_residuals(self) -> dict[str, float]:
        """Distance of each marked generator's |trace| from its allowed set
        (2 for parabolic, 2cos(pi k/e) with gcd(k,e)=1 for order e)."""
        out: dict[str, float] = {}
        orders = self.signature.order_sequence()
        for i, order in enumerate(orders, start=1):
            name = f"c{i}"
            t = abs(self.images[name].trace())
            if order is None:
                out[name] = abs(t - 2.0)
            else:
                out[name] = min(abs(t - target) for target in elliptic_trace_targets(order))
        return out

    def visibly_reducible(self, tol: float = 1e-8) -> bool:
        """Common-fixed-point check over all generator images (a warning-level
        diagnostic; irreducibility is a hypothesis, not something we certify)."""
        maps = [m for m in self.images.values() if not m.is_identity(1e-12)]
        if len(maps) < 2:
            return True
        candidates = maps[0].fixed_points()
        for p in candidates:
            if all(_fixes(m, p, tol) for m in maps):
                return True
        return False

    def conjugated(self, g: MoebiusMap) -> "Representation":
        gi = g.inverse()
        return Representation(self.signature,
                              {k: g @ m @ gi for k, m in self.images.items()})


def _fixes(m: MoebiusMap, p, tol: float) -> bool:
    q = m(p)
    if p == "inf" or q == "inf":
        return p == q
    return abs(q - p) <= tol * max(1.0, abs(p))


@dataclass(frozen=True)
class Cocycle:
    """Map Gamma -> P2 satisfying chi(g1 g2) = chi(g1) + rho(g1).chi(g2),
    stored on generators."""

    base: Representation
    values: dict[str, QuadPoly]

    def __call__(self, w: FreeWord) -> QuadPoly:
        total = QuadPoly.zero()
        prefix = MoebiusMap.identity()
        for name, exp in w:
            m = self.base.images[name]
            if exp == 1:
                term = self.values[name]
                total = total + adjoint_action(prefix, term)
                prefix = prefix @ m
            else:
                mi = m.inverse()
                term = -1 * adjoint_action(mi, self.values[name])
                total = total + adjoint_action(prefix, term)
                prefix = prefix @ mi
        return total

    def evaluate_ring(self, x: GroupRingElement) -> QuadPoly:
        total = QuadPoly.zero()
        for w, c in x.terms.items():
            total = total + c * self(w)
        return total

    def norm(self) -> float:
        return max((v.norm() for v in self.values.values()), default=0.0)

    def __add__(self, other: "Cocycle") -> "Cocycle":
        if other.base is not self.base and other.base != self.base:
            raise ValueError("cannot add cocycles over different representations")
        return Cocycle(self.base, {k: self.values[k] + other.values[k] for k in self.values})

    def __mul__(self, s: complex) -> "Cocycle":
        return Cocycle(self.base, {k: v * s for k, v in self.values.items()})

    __rmul__ = __mul__


def coboundary(rho: Representation, P: QuadPoly) -> Cocycle:
    """delta P: gamma -> rho(gamma).P - P."""
    return Cocycle(rho, {g: adjoint_action(rho.images[g], P) - P
                         for g in rho.signature.generators})


@dataclass(frozen=True)
class LocalSolve:
    poly: QuadPoly
    residual: float
    kernel_dim: int


def solve_local_coboundary(rho: Representation, chi: Cocycle, gamma: FreeWord,
                           tol: float = 1e-6) -> LocalSolve:
    """Minimum-norm P with (Ad rho(gamma) - 1) P = chi(gamma).

    The 3x3 system is singular for parabolic/elliptic rho(gamma) (kernel of
    dimension >= 1); numpy's SVD-backed lstsq provides the min-norm solution
    and the singular values give the kernel dimension.
    """
    g = rho.image(gamma)
    M = ad_matrix(g) - np.eye(3)
    rhs = chi(gamma).vector()
    sol, _, rank, svals = np.linalg.lstsq(M, rhs, rcond=_RCOND)
    kernel_dim = 3 - int(rank)
    residual = float(np.linalg.norm(M @ sol - rhs))
    scale = max(1.0, float(np.linalg.norm(rhs)), chi.norm())
    if residual > tol * scale:
        raise CocycleNotParabolicError(gamma, residual, tol * scale)
    return LocalSolve(QuadPoly.from_vector(sol), residual, kernel_dim)


def local_kernel_basis(rho: Representation, gamma: FreeWord,
                       rcond: float = _RCOND) -> list[QuadPoly]:
    """Basis of ker(Ad rho(gamma) - 1)."""
    M = ad_matrix(rho.image(gamma)) - np.eye(3)
    _, svals, vh = np.linalg.svd(M)
    cutoff = rcond * max(float(svals[0]), 1e-30)
    null = vh[svals <= cutoff].conj()
    return [QuadPoly.from_vector(v) for v in null]


@dataclass
class CocycleReport:
    relator_residual: float
    local: dict[str, LocalSolve] = field(default_factory=dict)
    local_failures: dict[str, float] = field(default_factory=dict)
    scale: float = 1.0

    @property
    def parabolic(self) -> bool:
        return not self.local_failures

    def as_dict(self) -> dict:
        return {
            "relator_residual": self.relator_residual,
            "scale": self.scale,
            "local_residuals": {k: v.residual for k, v in self.local.items()},
            "local_kernel_dims": {k: v.kernel_dim for k, v in self.local.items()},
            "local_failures": dict(self.local_failures),
        }


def verify_cocycle(rho: Representation, chi: Cocycle, local_tol: float = 1e-6) -> CocycleReport:
    """Relator residual of the par-1 extension plus local coboundary residuals
    at every marked generator.  Reports, never raises."""
    rep = CocycleReport(relator_residual=chi(relator(rho.signature)).norm(),
                        scale=max(1.0, chi.norm()))
    for i in range(1, rho.signature.num_marked + 1):
        name = f"c{i}"
        w = rho.signature.gen(name)
        try:
            rep.local[name] = solve_local_coboundary(rho, chi, w, tol=local_tol)
        except CocycleNotParabolicError as err:
            rep.local_failures[name] = err.residual
    return rep


# ---------------------------------------------------------------------------
# finite differences along representation families
# ---------------------------------------------------------------------------

_FD_OFFSETS = (-2, -1, 0, 1, 2)  # f' ~ (8(f_{+1} - f_{-1}) - (f_{+2} - f_{-2})) / 12h


def _aligned_lifts(reps, gen: str, branch_tol: float):
    """Sign-align one generator's SL2 lifts along consecutive family samples."""
    lifts = [reps[0].images[gen].tuple()]
    for rep in reps[1:]:
        m = rep.images[gen].tuple()
        prev = lifts[-1]
        dplus = max(abs(x - y) for x, y in zip(m, prev))
        dminus = max(abs(-x - y) for x, y in zip(m, prev))
        m = m if dplus <= dminus else tuple(-x for x in m)
        if min(dplus, dminus) > branch_tol * max(1.0, mat_norm(prev)):
            raise BranchJumpError(
                f"lift discontinuity for {gen}: distance {min(dplus, dminus):.3e}")
        lifts.append(m)
    return lifts


def finite_difference_cocycle(family: Callable[[float], Representation],
                              s0: float = 0.0,
                              h: float = DEFAULT_FD_STEP,
                              branch_tol: float = 0.5) -> Cocycle:
    """chi(gamma) = rho_dot(gamma) rho(gamma)^-1 via the 4th-order stencil
    (-f(s+2h) + 8 f(s+h) - 8 f(s-h) + f(s-2h)) / 12h on sign-aligned lifts.

    The base representation (at s0) and the derivative use the same aligned
    lift chain, so flipping any sample's PSL representative cancels exactly.
    """
    reps = [family(s0 + k * h) for k in _FD_OFFSETS]
    base = reps[2]
    values: dict[str, QuadPoly] = {}
    for gen in base.signature.generators:
        lifts = _aligned_lifts(reps, gen, branch_tol)
        # difference symmetric pairs first: exact zero on constant families
        dot = tuple((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h)
                    for m2, m1, p1, p2 in zip(lifts[0], lifts[1], lifts[3], lifts[4]))
        inv0 = mat_inv_unit(lifts[2])
        x = np.array([[dot[0], dot[1]], [dot[2], dot[3]]]) @ \
            np.array([[inv0[0], inv0[1]], [inv0[2], inv0[3]]])
        values[gen] = matrix_to_poly(project_traceless(x))
    return Cocycle(base, values)


def fd_cocycle_with_check(family, s0: float = 0.0, h: float = DEFAULT_FD_STEP,
                          agree_tol: float = 1e-5) -> tuple[Cocycle, float]:
    """Richardson-style hygiene: compute at h and h/2 and require agreement."""
    coarse = finite_difference_cocycle(family, s0, h)
    fine = finite_difference_cocycle(family, s0, h / 2)
    scale = max(1.0, fine.norm())
    diff = max((coarse.values[g] - fine.values[g]).norm() for g in fine.values) / scale
    if diff > agree_tol:
        raise BranchJumpError(f"finite-difference refinement disagreement {diff:.3e}")
    return fine, diff


# ---------------------------------------------------------------------------
# the space of exact (parabolic) cocycles, for sampling in tests
# ---------------------------------------------------------------------------

def relator_extension_matrix(rho: Representation) -> np.ndarray:
    """Matrix of (generator values) -> chi(R): the par-1 extension of the
    relator word, a linear map C^{3 x ngens} -> C^3."""
    gens = rho.signature.generators
    col = {g: i for i, g in enumerate(gens)}
    T = np.zeros((3, 3 * len(gens)), dtype=complex)
    prefix = MoebiusMap.identity()
    for name, exp in relator(rho.signature):
        j = 3 * col[name]
        if exp == 1:
            T[:, j:j + 3] += ad_matrix(prefix)
            prefix = prefix @ rho.images[name]
        else:
            prefix = prefix @ rho.images[name].inverse()
            T[:, j:j + 3] -= ad_matrix(prefix)
    return T


def _parabolic_parametrization(rho: Representation) -> np.ndarray:
    """Block map sending free parameters to generator values: identity blocks
    on handle generators, (Ad rho(c_i) - 1) on marked ones (which makes local
    solvability automatic)."""
    gens = rho.signature.generators
    blocks = []
    for g in gens:
        if g.startswith("c"):
            blocks.append(ad_matrix(rho.images[g]) - np.eye(3))
        else:
            blocks.append(np.eye(3, dtype=complex))
    P = np.zeros((3 * len(gens), 3 * len(gens)), dtype=complex)
    for i, B in enumerate(blocks):
        P[3 * i:3 * i + 3, 3 * i:3 * i + 3] = B
    return P


def parabolic_parameter_basis(rho: Representation) -> tuple[np.ndarray, np.ndarray]:
    """(P, N): parametrization matrix and an orthonormal basis (columns of N)
    of parameters whose induced generator values kill the relator."""
    P = _parabolic_parametrization(rho)
    T = relator_extension_matrix(rho)
    A = T @ P
    _, svals, vh = np.linalg.svd(A)
    cutoff = 1e-10 * max(float(svals[0]), 1.0)
    rank = int(np.sum(svals > cutoff))
    N = vh[rank:].conj().T
    return P, N


def random_parabolic_cocycle(rho: Representation, rng,
                             normalize: bool = True) -> Cocycle:
    """A random exact cocycle whose restriction to every marked generator is a
    local coboundary by construction.  For closed signatures this is simply a
    random element of Z^1."""
    P, N = parabolic_parameter_basis(rho)
    if N.shape[1] == 0:
        raise ValueError("representation admits no nonzero parabolic cocycles")
    for _ in range(20):
        coeffs = rng.standard_normal(N.shape[1]) + 1j * rng.standard_normal(N.shape[1])
        v = P @ (N @ coeffs)
        gens = rho.signature.generators
        values = {g: QuadPoly.from_vector(v[3 * i:3 * i + 3]) for i, g in enumerate(gens)}
        chi = Cocycle(rho, values)
        nrm = chi.norm()
        if nrm > 1e-8:
            return chi * (1.0 / nrm) if normalize else chi
    raise RuntimeError("failed to sample a nonzero cocycle")


def coboundary_matrix(rho: Representation) -> np.ndarray:
    """Map C^3 -> generator values of the coboundary delta P."""
    gens = rho.signature.generators
    D = np.zeros((3 * len(gens), 3), dtype=complex)
    for i, g in enumerate(gens):
        D[3 * i:3 * i + 3, :] = ad_matrix(rho.images[g]) - np.eye(3)
    return D


def reduce_by_coboundary(chi: Cocycle) -> Cocycle:
    """Subtract the least-squares-best coboundary from chi.

    The cohomology class (hence every Goldman pairing) is unchanged; what this
    buys is conditioning: finite-difference cocycles of monodromy families
    carry a large coboundary part (the frame drags along the family) that
    would otherwise force ~|chi|^2 / |pairing| cancellation in the sums.
    """
    rho = chi.base
    gens = rho.signature.generators
    D = coboundary_matrix(rho)
    v = np.concatenate([chi.values[g].vector() for g in gens])
    P, *_ = np.linalg.lstsq(D, v, rcond=None)
    v2 = v - D @ P
    return Cocycle(rho, {g: QuadPoly.from_vector(v2[3 * i:3 * i + 3])
                         for i, g in enumerate(gens)})


def random_quadpoly(rng, scale: float = 1.0) -> QuadPoly:
    v = scale * (rng.standard_normal(3) + 1j * rng.standard_normal(3))
    return QuadPoly.from_vector(v)


def killing_pairing_scale(chi1: Cocycle, chi2: Cocycle) -> float:
    """Natural magnitude for Goldman-type pairings of two cocycles."""
    return max(1e-300, chi1.norm() * chi2.norm())
