"""Orbifold surface group presentations, free-word arithmetic and Fox calculus.

Everything in this module is exact: words are tuples of signed generator
letters, group-ring elements are integer dictionaries, and every identity
check is a literal free-reduction comparison.  No floating point.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

Letter = tuple[str, int]


def _reduce(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    """Freely reduce a letter sequence with a stack; idempotent."""
    out: list[Letter] = []
    for gen, exp in letters:
        if exp not in (1, -1):
            raise ValueError(f"letter exponent must be +-1, got {exp}")
        if out and out[-1][0] == gen and out[-1][1] == -exp:
            out.pop()
        else:
            out.append((gen, exp))
    return tuple(out)


class FreeWord:
    """A freely reduced word in abstract generators.  Immutable."""

    __slots__ = ("letters",)

    def __init__(self, letters: Iterable[Letter] = ()):
        object.__setattr__(self, "letters", _reduce(letters))

    def __setattr__(self, *a):
        raise AttributeError("FreeWord is immutable")

    @classmethod
    def generator(cls, name: str, exp: int = 1) -> "FreeWord":
        return cls(((name, 1),) * exp if exp >= 0 else ((name, -1),) * (-exp))

    @classmethod
    def identity(cls) -> "FreeWord":
        return cls()

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        return FreeWord(self.letters + other.letters)

    def inverse(self) -> "FreeWord":
        return FreeWord(tuple((g, -e) for g, e in reversed(self.letters)))

    def __pow__(self, n: int) -> "FreeWord":
        if n < 0:
            return self.inverse() ** (-n)
        w = FreeWord()
        for _ in range(n):
            w = w * self
        return w

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __eq__(self, other) -> bool:
        return isinstance(other, FreeWord) and self.letters == other.letters

    def __hash__(self) -> int:
        return hash(self.letters)

    def is_identity(self) -> bool:
        return not self.letters

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(g if e == 1 else f"{g}^-1" for g, e in self.letters)

    def __repr__(self) -> str:
        return f"FreeWord({self})"


@dataclass(frozen=True)
class Signature:
    """Orbifold signature (g; n, e_1..e_m) with the standard presentation

        a_1 b_1 a_1^-1 b_1^-1 ... a_g b_g a_g^-1 b_g^-1 c_1 ... c_{m+n} = 1.

    ``marked_orders`` optionally fixes the per-generator order of c_1..c_{m+n}
    (``None`` = cusp); by default elliptic generators come first.  Monodromy
    representations use the interleaved form because lassos are ordered by
    argument, not by type.
    """

    g: int
    elliptic_orders: tuple[int, ...] = ()
    cusps: int = 0
    marked_orders: Optional[tuple[Optional[int], ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "elliptic_orders", tuple(self.elliptic_orders))
        if self.g < 0 or self.cusps < 0:
            raise ValueError("genus and cusp count must be non-negative")
        for e in self.elliptic_orders:
            if not isinstance(e, int) or e < 2:
                raise ValueError(f"elliptic order must be an integer >= 2, got {e}")
        if self.marked_orders is not None:
            mo = tuple(self.marked_orders)
            object.__setattr__(self, "marked_orders", mo)
            finite = sorted(o for o in mo if o is not None)
            if finite != sorted(self.elliptic_orders) or mo.count(None) != self.cusps:
                raise ValueError("marked_orders inconsistent with elliptic_orders/cusps")

    @property
    def m(self) -> int:
        return len(self.elliptic_orders)

    @property
    def n(self) -> int:
        return self.cusps

    @property
    def num_marked(self) -> int:
        return self.m + self.n

    @property
    def dimension(self) -> int:
        return 3 * self.g - 3 + self.m + self.n

    @property
    def is_hyperbolic(self) -> bool:
        area = 2 * self.g - 2 + self.n + sum(1 - 1.0 / e for e in self.elliptic_orders)
        return area > 0

    def order_sequence(self) -> tuple[Optional[int], ...]:
        """Orders of c_1..c_{m+n} in generator order (None = cusp)."""
        if self.marked_orders is not None:
            return self.marked_orders
        return tuple(self.elliptic_orders) + (None,) * self.cusps

    @property
    def generators(self) -> tuple[str, ...]:
        gens: list[str] = []
        for k in range(1, self.g + 1):
            gens += [f"a{k}", f"b{k}"]
        gens += [f"c{i}" for i in range(1, self.num_marked + 1)]
        return tuple(gens)

    def gen(self, name: str) -> FreeWord:
        if name not in self.generators:
            raise ValueError(f"unknown generator {name!r} for signature {self}")
        return FreeWord.generator(name)

    def __str__(self) -> str:
        return f"(g={self.g}; elliptic={list(self.elliptic_orders)}, cusps={self.cusps})"


_TOKEN = re.compile(r"\s*([abc]\d+)\s*(?:\^\s*(-?\d+))?\s*\*?")


def parse_word(text: str, sig: Signature) -> FreeWord:
    """Parse expressions like ``"a1 b1^-1 c2^3"`` into a reduced FreeWord."""
    gens = set(sig.generators)
    pos = 0
    letters: list[Letter] = []
    text = text.strip()
    if text in ("", "1"):
        return FreeWord()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"malformed word near {text[pos:pos + 12]!r}")
        name, exp_s = m.group(1), m.group(2)
        if name not in gens:
            raise ValueError(f"unknown generator {name!r} for signature {sig}")
        exp = 1 if exp_s is None else int(exp_s)
        sgn = 1 if exp >= 0 else -1
        letters.extend((name, sgn) for _ in range(abs(exp)))
        pos = m.end()
    return FreeWord(letters)


class GroupRingElement:
    """Finite integer combination of freely reduced words (an element of Z[F])."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[dict[FreeWord, int]] = None):
        clean = {w: c for w, c in (terms or {}).items() if c != 0}
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("GroupRingElement is immutable")

    @classmethod
    def from_word(cls, w: FreeWord, coeff: int = 1) -> "GroupRingElement":
        return cls({w: coeff})

    @classmethod
    def one(cls) -> "GroupRingElement":
        return cls({FreeWord(): 1})

    @classmethod
    def zero(cls) -> "GroupRingElement":
        return cls()

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return GroupRingElement(out)

    def __neg__(self) -> "GroupRingElement":
        return GroupRingElement({w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "GroupRingElement") -> "GroupRingElement":
        return self + (-other)

    def __mul__(self, other) -> "GroupRingElement":
        if isinstance(other, int):
            return GroupRingElement({w: c * other for w, c in self.terms.items()})
        out: dict[FreeWord, int] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 * w2
                out[w] = out.get(w, 0) + c1 * c2
        return GroupRingElement(out)

    def __rmul__(self, other: int) -> "GroupRingElement":
        return self * other

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupRingElement) and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def anti_involution(self) -> "GroupRingElement":
        """The natural anti-involution #: sum n_j g_j -> sum n_j g_j^-1."""
        out: dict[FreeWord, int] = {}
        for w, c in self.terms.items():
            wi = w.inverse()
            out[wi] = out.get(wi, 0) + c
        return GroupRingElement(out)

    def sorted_terms(self, sig: Optional[Signature] = None) -> list[tuple[FreeWord, int]]:
        """Deterministic term order: by word length, then letters in the global
        generator order a1 < b1 < ... < c1 < ..."""
        if sig is not None:
            rank = {name: i for i, name in enumerate(sig.generators)}
            key = lambda w: (len(w.letters), [(rank[g], -e) for g, e in w.letters])
        else:
            key = lambda w: (len(w.letters), [(g, -e) for g, e in w.letters])
        return sorted(self.terms.items(), key=lambda it: key(it[0]))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.sorted_terms():
            s = str(w)
            parts.append(f"{'+' if c > 0 else '-'} {abs(c) if abs(c) != 1 else ''}{s}".strip())
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else text

    def __repr__(self) -> str:
        return f"GroupRingElement({self})"


def anti_involution(x: GroupRingElement) -> GroupRingElement:
    return x.anti_involution()


def fox_derivative(w: FreeWord, gen: str) -> GroupRingElement:
    """Fox free derivative d(w)/d(gen).

    Base rules d(x)/dx = 1, d(x^-1)/dx = -x^-1, d(y)/dx = 0, extended by the
    product rule d(uv)/dx = du/dx + u dv/dx.
    """
    terms: dict[FreeWord, int] = {}
    prefix = FreeWord()
    for name, exp in w:
        if name == gen:
            if exp == 1:
                t = prefix
                c = 1
            else:
                t = prefix * FreeWord.generator(name, -1)
                c = -1
            terms[t] = terms.get(t, 0) + c
            if terms[t] == 0:
                del terms[t]
        prefix = prefix * FreeWord(((name, exp),))
    return GroupRingElement(terms)


def commutator(x: FreeWord, y: FreeWord) -> FreeWord:
    return x * y * x.inverse() * y.inverse()


def prefix_products(sig: Signature) -> list[FreeWord]:
    """R_0 = 1, R_k = prod_{i<=k} [a_i, b_i], R_{g+i} = R_g c_1...c_i."""
    out = [FreeWord()]
    for k in range(1, sig.g + 1):
        out.append(out[-1] * commutator(sig.gen(f"a{k}"), sig.gen(f"b{k}")))
    for i in range(1, sig.num_marked + 1):
        out.append(out[-1] * sig.gen(f"c{i}"))
    return out


def relator(sig: Signature) -> FreeWord:
    return prefix_products(sig)[-1]


@dataclass(frozen=True)
class DualGenerators:
    """Weil dual generators from the canonical fundamental domain's edge pairing."""

    alphas: tuple[FreeWord, ...]   # alpha_k = R_{k-1} b_k^-1 R_k^-1
    betas: tuple[FreeWord, ...]    # beta_k  = R_k a_k^-1 R_{k-1}^-1
    gammas: tuple[FreeWord, ...]   # gamma_i = R_{g+i-1} c_i^-1 R_{g+i-1}^-1


def dual_generators(sig: Signature) -> DualGenerators:
    R = prefix_products(sig)
    alphas = tuple(
        R[k - 1] * sig.gen(f"b{k}").inverse() * R[k].inverse() for k in range(1, sig.g + 1)
    )
    betas = tuple(
        R[k] * sig.gen(f"a{k}").inverse() * R[k - 1].inverse() for k in range(1, sig.g + 1)
    )
    gammas = tuple(
        R[sig.g + i - 1] * sig.gen(f"c{i}").inverse() * R[sig.g + i - 1].inverse()
        for i in range(1, sig.num_marked + 1)
    )
    return DualGenerators(alphas, betas, gammas)


@dataclass(frozen=True)
class IdentityCheck:
    identity: str
    status: bool
    witness: str = ""

    def as_dict(self) -> dict:
        return {"identity": self.identity, "status": self.status, "witness": self.witness}


@dataclass
class PresentationReport:
    """Outcome of the exact word-identity suite for one signature.

    ``alpha_convention`` records which alpha definition makes
    #dR/da_k = R_{k-1}^-1 (1 - alpha_k) exact; ``beta_sign`` records the sign
    s with #dR/db_k = s * R_k^-1 (1 - beta_k).  Both are determined by free
    reduction, not assumed.
    """

    signature: Signature
    checks: list[IdentityCheck] = field(default_factory=list)
    alpha_convention: Optional[str] = None
    beta_sign: Optional[int] = None

    @property
    def all_pass(self) -> bool:
        return all(c.status for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "signature": {
                "g": self.signature.g,
                "elliptic": list(self.signature.elliptic_orders),
                "cusps": self.signature.cusps,
            },
            "alpha_convention": self.alpha_convention,
            "beta_sign": self.beta_sign,
            "all_pass": self.all_pass,
            "checks": [c.as_dict() for c in self.checks],
        }


def _ring_one_minus(w: FreeWord) -> GroupRingElement:
    return GroupRingElement({FreeWord(): 1, w: -1})


def verify_presentation_identities(sig: Signature) -> PresentationReport:
    """Exact checks of the canonical-domain word identities.

    Verifies [alpha_k, beta_k] = R_{k-1} R_k^-1, the telescoped products
    calR_k = R_k^-1 and calR_g gamma_1...gamma_{m+n} = R^-1, and resolves the
    sharp/Fox identities #dR/da_k, #dR/db_k against both candidate alpha
    definitions and both signs, recording what actually reduces to zero.
    """
    rep = PresentationReport(signature=sig)
    R = prefix_products(sig)
    duals = dual_generators(sig)
    Rword = R[-1]

    calR = FreeWord()
    for k in range(1, sig.g + 1):
        a_k, b_k = duals.alphas[k - 1], duals.betas[k - 1]
        lhs = commutator(a_k, b_k)
        rhs = R[k - 1] * R[k].inverse()
        ok = lhs == rhs
        rep.checks.append(IdentityCheck(
            f"[alpha_{k},beta_{k}] == R_{k - 1} R_{k}^-1", ok,
            "" if ok else str(lhs * rhs.inverse())))
        calR = calR * lhs
        ok = calR == R[k].inverse()
        rep.checks.append(IdentityCheck(
            f"calR_{k} == R_{k}^-1", ok, "" if ok else str(calR * R[k])))

    total = calR
    for gamma in duals.gammas:
        total = total * gamma
    ok = total == Rword.inverse()
    rep.checks.append(IdentityCheck(
        "calR_g gamma_1..gamma_{m+n} == R^-1", ok, "" if ok else str(total * Rword)))

    for k in range(1, sig.g + 1):
        sharp_a = fox_derivative(Rword, f"a{k}").anti_involution()
        alpha_311 = duals.alphas[k - 1]
        alpha_remark = R[k] * sig.gen(f"b{k}").inverse() * R[k].inverse()
        pre = GroupRingElement.from_word(R[k - 1].inverse())
        convention = None
        if sharp_a == pre * _ring_one_minus(alpha_311):
            convention = "section_3.1.1"
        elif sharp_a == pre * _ring_one_minus(alpha_remark):
            convention = "remark_dual"
        rep.checks.append(IdentityCheck(
            f"#dR/da_{k} == R_{k - 1}^-1 (1 - alpha_{k})", convention is not None,
            f"alpha definition: {convention}"))
        if convention is not None:
            if rep.alpha_convention not in (None, convention):
                convention = "inconsistent"
            rep.alpha_convention = convention

        sharp_b = fox_derivative(Rword, f"b{k}").anti_involution()
        base = GroupRingElement.from_word(R[k].inverse()) * _ring_one_minus(duals.betas[k - 1])
        sign = None
        if sharp_b == base:
            sign = 1
        elif sharp_b == -base:
            sign = -1
        rep.checks.append(IdentityCheck(
            f"#dR/db_{k} == s * R_{k}^-1 (1 - beta_{k})", sign is not None,
            f"resolved sign s = {sign}"))
        if sign is not None:
            if rep.beta_sign not in (None, sign):
                sign = 0
            rep.beta_sign = sign

    for i in range(1, sig.num_marked + 1):
        got = fox_derivative(Rword, f"c{i}")
        want = GroupRingElement.from_word(R[sig.g + i - 1])
        ok = got == want
        rep.checks.append(IdentityCheck(
            f"dR/dc_{i} == R_{sig.g + i - 1}", ok, "" if ok else str(got - want)))

    return rep


@dataclass(frozen=True)
class GoldmanSchedule:
    """Fox-derivative terms and marked-generator correction slots of the
    Goldman sum; for a closed signature this is exactly the group-homology
    2-cycle realizing the fundamental class."""

    fox_terms: tuple[tuple[GroupRingElement, str], ...]
    corrections: tuple[str, ...] = ()


def fundamental_class_chain(sig: Signature) -> GoldmanSchedule:
    Rword = relator(sig)
    terms: list[tuple[GroupRingElement, str]] = []
    for k in range(1, sig.g + 1):
        terms.append((fox_derivative(Rword, f"a{k}"), f"a{k}"))
        terms.append((fox_derivative(Rword, f"b{k}"), f"b{k}"))
    for i in range(1, sig.num_marked + 1):
        terms.append((fox_derivative(Rword, f"c{i}"), f"c{i}"))
    corrections = tuple(f"c{i}" for i in range(1, sig.num_marked + 1))
    return GoldmanSchedule(tuple(terms), corrections)


def boundary_pairing(sig: Signature) -> list[tuple[int, FreeWord]]:
    """Edge pairings lambda_i of the canonical domain, N = 2g + m + n of them."""
    duals = dual_generators(sig)
    out: list[tuple[int, FreeWord]] = []
    for k in range(1, sig.g + 1):
        out.append((k, duals.alphas[k - 1].inverse()))
    for k in range(1, sig.g + 1):
        out.append((k + sig.g, duals.betas[k - 1].inverse()))
    for i in range(1, sig.num_marked + 1):
        out.append((2 * sig.g + i, duals.gammas[i - 1].inverse()))
    return out


def random_word(sig: Signature, length: int, rng) -> FreeWord:
    """Random (reduced) word for property tests; rng is a numpy Generator."""
    gens = sig.generators
    letters = []
    for _ in range(length):
        name = gens[int(rng.integers(len(gens)))]
        letters.append((name, 1 if rng.integers(2) else -1))
    return FreeWord(letters)
