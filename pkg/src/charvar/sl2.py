"""sl(2,C) as quadratic polynomials, Moebius/adjoint actions, Killing pairing.

The dictionary is (a, b; c, -a) <-> (c z^2 - 2 a z - b) d/dz and the pairing is
normalized so that <x, y> = tr(xy) on traceless matrices, which on the basis
{1, z, z^2} is the matrix [[0,0,-1],[0,1/2,0],[-1,0,0]].
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

Mat2 = tuple[complex, complex, complex, complex]  # row-major (a, b, c, d)

_ADJOINT_AGREEMENT_RTOL = 1e-12


def mat_mul(x: Mat2, y: Mat2) -> Mat2:
    return (
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    )


def mat_det(x: Mat2) -> complex:
    return x[0] * x[3] - x[1] * x[2]


def mat_inv_unit(x: Mat2) -> Mat2:
    """Inverse of a determinant-1 matrix (the adjugate)."""
    return (x[3], -x[1], -x[2], x[0])


def mat_norm(x: Mat2) -> float:
    return max(abs(e) for e in x)


def frobenius(x: Mat2) -> float:
    return (abs(x[0]) ** 2 + abs(x[1]) ** 2 + abs(x[2]) ** 2 + abs(x[3]) ** 2) ** 0.5


@dataclass(frozen=True)
class QuadPoly:
    """Quadratic polynomial p0 + p1 z + p2 z^2 standing for a vector field."""

    p0: complex = 0j
    p1: complex = 0j
    p2: complex = 0j

    def coeffs(self) -> tuple[complex, complex, complex]:
        return (self.p0, self.p1, self.p2)

    def __call__(self, z: complex) -> complex:
        return self.p0 + z * (self.p1 + z * self.p2)

    def __add__(self, other: "QuadPoly") -> "QuadPoly":
        return QuadPoly(self.p0 + other.p0, self.p1 + other.p1, self.p2 + other.p2)

    def __sub__(self, other: "QuadPoly") -> "QuadPoly":
        return QuadPoly(self.p0 - other.p0, self.p1 - other.p1, self.p2 - other.p2)

    def __neg__(self) -> "QuadPoly":
        return QuadPoly(-self.p0, -self.p1, -self.p2)

    def __mul__(self, s: complex) -> "QuadPoly":
        return QuadPoly(self.p0 * s, self.p1 * s, self.p2 * s)

    __rmul__ = __mul__

    def norm(self) -> float:
        return max(abs(self.p0), abs(self.p1), abs(self.p2))

    def is_close(self, other: "QuadPoly", tol: float) -> bool:
        return (self - other).norm() <= tol

    @classmethod
    def zero(cls) -> "QuadPoly":
        return cls(0j, 0j, 0j)

    @classmethod
    def from_vector(cls, v) -> "QuadPoly":
        return cls(complex(v[0]), complex(v[1]), complex(v[2]))

    def vector(self) -> np.ndarray:
        return np.array(self.coeffs(), dtype=complex)


class MoebiusMap:
    """PSL(2,C) element: a 2x2 matrix normalized to det 1, identified with its
    negative.  Construction records |det - 1| before normalization."""

    __slots__ = ("a", "b", "c", "d", "det_residual")

    def __init__(self, a: complex, b: complex, c: complex, d: complex,
                 normalize: bool = True):
        det = a * d - b * c
        if normalize:
            if abs(det) < 1e-30:
                raise ValueError("singular matrix cannot define a Moebius map")
            scale = max(abs(a), abs(b), abs(c), abs(d))
            residual = abs(det - 1) / max(1.0, scale * scale)
            s = cmath.sqrt(det)
            a, b, c, d = a / s, b / s, c / s, d / s
        else:
            residual = abs(det - 1)
        object.__setattr__(self, "a", complex(a))
        object.__setattr__(self, "b", complex(b))
        object.__setattr__(self, "c", complex(c))
        object.__setattr__(self, "d", complex(d))
        object.__setattr__(self, "det_residual", residual)

    def __setattr__(self, *args):
        raise AttributeError("MoebiusMap is immutable")

    @classmethod
    def from_tuple(cls, m: Mat2) -> "MoebiusMap":
        return cls(*m)

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1, 0, 0, 1, normalize=False)

    def tuple(self) -> Mat2:
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap(*mat_mul(self.tuple(), other.tuple()), normalize=False)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a, normalize=False)

    def trace(self) -> complex:
        return self.a + self.d

    def __call__(self, z: complex):
        """Moebius action on C u {inf} (inf encoded as the string 'inf')."""
        if z == "inf":
            return "inf" if abs(self.c) < 1e-300 else self.a / self.c
        den = self.c * z + self.d
        if abs(den) < 1e-300:
            return "inf"
        return (self.a * z + self.b) / den

    def psl_distance(self, other: "MoebiusMap") -> float:
        """min over signs of the Frobenius distance of SL2 lifts."""
        s, o = self.tuple(), other.tuple()
        dplus = frobenius(tuple(x - y for x, y in zip(s, o)))
        dminus = frobenius(tuple(x + y for x, y in zip(s, o)))
        return min(dplus, dminus)

    def is_identity(self, tol: float = 1e-9) -> bool:
        return self.psl_distance(MoebiusMap.identity()) <= tol

    def fixed_points(self) -> list[complex]:
        """Fixed points in C (inf, when fixed, reported as 'inf')."""
        if abs(self.c) < 1e-14 * max(1.0, abs(self.a), abs(self.d)):
            pts: list = ["inf"]
            if abs(self.a - self.d) > 1e-14:
                pts.append(self.b / (self.d - self.a))
            return pts
        disc = cmath.sqrt((self.a - self.d) ** 2 + 4 * self.b * self.c)
        return [((self.a - self.d) + disc) / (2 * self.c),
                ((self.a - self.d) - disc) / (2 * self.c)]

    def __repr__(self) -> str:
        return f"MoebiusMap({self.a:.6g}, {self.b:.6g}, {self.c:.6g}, {self.d:.6g})"


def matrix_to_poly(X) -> QuadPoly:
    """Traceless (a, b; c, -a) -> c z^2 - 2 a z - b."""
    X = np.asarray(X, dtype=complex)
    if X.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    scale = max(np.max(np.abs(X)), 1e-300)
    if abs(X[0, 0] + X[1, 1]) > 1e-10 * scale:
        raise ValueError(f"matrix is not traceless: trace = {X[0, 0] + X[1, 1]}")
    a, b, c = X[0, 0], X[0, 1], X[1, 0]
    return QuadPoly(-b, -2 * a, c)


def poly_to_matrix(P: QuadPoly) -> np.ndarray:
    return np.array([[-P.p1 / 2, -P.p0], [P.p2, P.p1 / 2]], dtype=complex)


def project_traceless(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    t = (X[0, 0] + X[1, 1]) / 2
    return X - t * np.eye(2)


def adjoint_action(g: MoebiusMap, P: QuadPoly) -> QuadPoly:
    """(g . P)(z) = P(g^-1 z) / (g^-1)'(z), computed in closed form and checked
    against matrix conjugation (the two must agree to ~1e-12; this agreement is
    asserted on every call)."""
    a, b, c, d = g.tuple()
    q0 = P.p0 * a * a - P.p1 * a * b + P.p2 * b * b
    q1 = -2 * P.p0 * a * c + P.p1 * (a * d + b * c) - 2 * P.p2 * b * d
    q2 = P.p0 * c * c - P.p1 * c * d + P.p2 * d * d
    out = QuadPoly(q0, q1, q2)

    X = poly_to_matrix(P)
    gm = np.array([[a, b], [c, d]], dtype=complex)
    conj = matrix_to_poly(gm @ X @ np.array([[d, -b], [-c, a]], dtype=complex))
    # both paths cancel through intermediates of size ~ |g|^2 |P|; that is the
    # magnitude roundoff is relative to
    gn = max(abs(a), abs(b), abs(c), abs(d))
    scale = max(out.norm(), P.norm(), 1.0) * max(1.0, gn * gn)
    if not out.is_close(conj, _ADJOINT_AGREEMENT_RTOL * scale):
        raise ArithmeticError(
            f"adjoint action paths disagree by {(out - conj).norm():.3e} (scale {scale:.3e})")
    return out


def ad_matrix(g: MoebiusMap) -> np.ndarray:
    """Matrix of the adjoint action on the basis (1, z, z^2)."""
    a, b, c, d = g.tuple()
    return np.array(
        [
            [a * a, -a * b, b * b],
            [-2 * a * c, a * d + b * c, -2 * b * d],
            [c * c, -c * d, d * d],
        ],
        dtype=complex,
    )


KILLING_MATRIX = np.array([[0, 0, -1], [0, 0.5, 0], [-1, 0, 0]], dtype=complex)


def killing(P1: QuadPoly, P2: QuadPoly) -> complex:
    """<P1, P2> = coeffs(P1)^T C coeffs(P2); equals tr(X1 X2) on matrices."""
    return (
        -P1.p0 * P2.p2
        - P1.p2 * P2.p0
        + 0.5 * P1.p1 * P2.p1
    )


def b0_bracket(P1: QuadPoly, P2: QuadPoly) -> complex:
    """B_0[F,G] = F'' G + F G'' - F' G', constant on quadratics; <,> = -B_0/2."""
    return 2 * P1.p2 * P2.p0 + 2 * P1.p0 * P2.p2 - P1.p1 * P2.p1
