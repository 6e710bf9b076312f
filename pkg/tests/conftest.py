import numpy as np
import pytest

from charvar.cocycles import Representation
from charvar.monodromy import MonodromyEngine, build_potential
from charvar.sl2 import MoebiusMap
from charvar.words import Signature


def rand_sl2(rng) -> MoebiusMap:
    m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    return MoebiusMap(m[0, 0], m[0, 1], m[1, 0], m[1, 1])


def make_genus1_rep(seed=0) -> Representation:
    # the torus group is abelian: commuting diagonals give an exact relator
    rng = np.random.default_rng(seed)
    lam = 1.3 + 0.4j + 0.2 * (rng.standard_normal() + 1j * rng.standard_normal())
    mu = 0.7 - 0.9j + 0.2 * (rng.standard_normal() + 1j * rng.standard_normal())
    A = MoebiusMap(lam, 0, 0, 1 / lam, normalize=False)
    B = MoebiusMap(mu, 0, 0, 1 / mu, normalize=False)
    return Representation(Signature(1), {"a1": A, "b1": B})


def make_genus2_rep(seed=11) -> Representation:
    """Exact genus-2 representation: pick A1, B1 at random and solve
    [A2, B2] = [A1, B1]^{-1} (trace matching plus a conjugation solve)."""
    rng = np.random.default_rng(seed)
    while True:
        A1, B1 = rand_sl2(rng), rand_sl2(rng)
        W = (A1 @ B1 @ A1.inverse() @ B1.inverse()).inverse()
        Wm = np.array([[W.a, W.b], [W.c, W.d]])
        D = Wm - np.eye(2)
        if abs(D[1, 1]) < 0.2:
            continue
        B2m = None
        for _ in range(40):
            x11, x12, x21 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            x22 = -(D[0, 0] * x11 + D[0, 1] * x21 + D[1, 0] * x12) / D[1, 1]
            X = np.array([[x11, x12], [x21, x22]])
            det = np.linalg.det(X)
            if abs(det) > 0.1:
                B2m = X / np.sqrt(det)
                break
        if B2m is None:
            continue
        B2p = Wm @ B2m
        M = np.zeros((4, 4), dtype=complex)  # A2 B2 - B2' A2 = 0, row per entry
        for i in range(2):
            for j in range(2):
                r = 2 * i + j
                for k in range(2):
                    M[r, 2 * i + k] += B2m[k, j]
                    M[r, 2 * k + j] -= B2p[i, k]
        _, s, vh = np.linalg.svd(M)
        null = vh[s < 1e-8 * s[0]].conj()
        if null.shape[0] == 0:
            continue
        for _ in range(40):
            co = rng.standard_normal(null.shape[0]) + 1j * rng.standard_normal(null.shape[0])
            A2m = (co @ null).reshape(2, 2)
            det = np.linalg.det(A2m)
            if abs(det) > 0.1:
                A2m = A2m / np.sqrt(det)
                rho = Representation(Signature(2), {
                    "a1": A1, "b1": B1,
                    "a2": MoebiusMap(A2m[0, 0], A2m[0, 1], A2m[1, 0], A2m[1, 1]),
                    "b2": MoebiusMap(B2m[0, 0], B2m[0, 1], B2m[1, 0], B2m[1, 1]),
                })
                if rho.relator_residual() < 1e-12:
                    return rho


def thrice_punctured_rep() -> Representation:
    # exact parabolic triple: c1 c2 c3 = 1 with all |traces| = 2
    c1 = MoebiusMap(1, 2, 0, 1, normalize=False)
    c2 = MoebiusMap(1, 0, -2, 1, normalize=False)
    c3 = (c1 @ c2).inverse()
    sig = Signature(0, (), 3)
    return Representation(sig, {"c1": c1, "c2": c2, "c3": c3})


FOUR_CUSP_T = 0.3 + 0.4j
FOUR_CUSP_ZB = 0.5 - 1.5j


def four_cusp_data(accessory=0.2 + 0.1j):
    return build_potential([0, 1, FOUR_CUSP_T], [None, None, None], None,
                           [accessory], base_point=FOUR_CUSP_ZB)


def orb3_data(accessory=0.2 + 0.1j):
    # lasso order from this base point is (1, t, 0, inf): order 3 at the point
    # 0 lands at generator c3, signature orders (inf, inf, 3, inf)
    return build_potential([0, 1, FOUR_CUSP_T], [3, None, None], None,
                           [accessory], base_point=FOUR_CUSP_ZB)


@pytest.fixture(scope="session")
def four_cusp_engine():
    data = four_cusp_data()
    return MonodromyEngine(data, rtol=1e-12, atol=1e-14), data


@pytest.fixture(scope="session")
def four_cusp_rep(four_cusp_engine):
    engine, _ = four_cusp_engine
    return engine.representation()


@pytest.fixture(scope="session")
def orb3_engine():
    data = orb3_data()
    return MonodromyEngine(data, rtol=1e-12, atol=1e-14), data


@pytest.fixture(scope="session")
def orb3_rep(orb3_engine):
    engine, _ = orb3_engine
    return engine.representation()


@pytest.fixture(scope="session")
def genus2_rep():
    return make_genus2_rep()


@pytest.fixture(scope="session")
def genus1_rep():
    return make_genus1_rep()
