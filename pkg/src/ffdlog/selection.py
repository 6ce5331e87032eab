"""Search and validation of the modified polynomial selection.

A candidate h = h1*x^q - h0 is "good" when it has a degree-m irreducible
factor g appearing exactly once, no linear factors, and the unit group of
F_{q^2}[x]/(h/g) shares only q^{2C}-smooth factors with q^{2m}-1. On top of
those four conditions we require gcd(h0, h1) = 1 so every factorbase image
is a unit modulo h and relation rows can be verified there.
"""

import hashlib
import math
from dataclasses import dataclass

from .fq2 import TowerParams, tower_from_text, tower_to_text
from .numutil import primes_upto
from . import polyarith as pa
from .polyarith import Factorization


class SelectionError(Exception):
    """The exhaustive candidate scan found no good polynomial."""


@dataclass(eq=False)
class FieldSetup:
    """An accepted configuration: tower, bounds, h = h1*x^q - h0, and the v*L split."""

    tower: TowerParams
    C: int
    D: int
    h0: tuple[int, ...]
    h1: tuple[int, ...]
    h: tuple[int, ...]
    g: tuple[int, ...]
    h_factorization: Factorization
    v: int
    L: int
    v_factorization: tuple[tuple[int, int], ...]

    @property
    def K(self):
        return self.tower.field

    @property
    def group_order(self) -> int:
        return self.tower.group_order

    @property
    def m(self) -> int:
        return self.tower.m

    @property
    def fb_size(self) -> int:
        return self.K.size + 2

    def cofactors(self):
        """Irreducible factors of h other than the single designated g."""
        out = []
        for f, mult in self.h_factorization.factors:
            if f == self.g:
                if mult > 1:
                    out.append((f, mult - 1))
            else:
                out.append((f, mult))
        return out


def unit_group_order(K, factorization: Factorization) -> int:
    """|(F_{q^2}[x]/f)^x| from f's factorization: prod (Q^d - 1) * Q^(d*(a-1))."""
    if not factorization.factors:
        raise ValueError("constant polynomial has no unit group here")
    Q = K.size
    total = 1
    for f, mult in factorization.factors:
        d = pa.deg(f)
        total *= (Q**d - 1) * Q ** (d * (mult - 1))
    return total


def smooth_split(N: int, bound: int):
    """(v, L, v_factorization): v the largest bound-smooth divisor of N, L = N/v."""
    if N < 1 or bound < 2:
        raise ValueError("need N >= 1 and bound >= 2")
    v = 1
    fact = []
    rest = N
    for p in primes_upto(bound):
        if rest % p == 0:
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            v *= p**e
            fact.append((p, e))
    return v, rest, tuple(fact)


def gcd_subfield_identity(q: int, d: int, m: int) -> int:
    """gcd(q^{2d}-1, q^{2m}-1) = q^{2*gcd(d,m)}-1, without factoring anything."""
    if d < 1 or m < 1:
        raise ValueError("degrees must be positive")
    return q ** (2 * math.gcd(d, m)) - 1


def is_good(K, h, m: int, C: int, h0=None, h1=None):
    """Check the four goodness conditions; returns (ok, diagnostics).

    Diagnostics carry the factorization, the designated g on success, and the
    name of the first failing condition otherwise. When h0/h1 are supplied the
    extra coprimality requirement is enforced as condition "coprime".
    """
    h = pa.norm(h)
    if pa.deg(h) < m:
        raise ValueError("degree of h below m")
    info = {}
    if h0 is not None and h1 is not None:
        if pa.poly_gcd(K, h0, h1) != pa.ONE:
            info["failed"] = "coprime"
            return False, info
    fact = pa.factor(K, h)
    info["factorization"] = fact
    degree_m = [f for f, _ in fact.factors if pa.deg(f) == m]
    if not degree_m:
        info["failed"] = "degree-m-factor"
        return False, info
    g = degree_m[0]
    info["g"] = g
    mult_g = dict(fact.factors)[g]
    if mult_g > 1:
        info["failed"] = "g-squarefree"
        return False, info
    if any(pa.deg(f) == 1 for f, _ in fact.factors):
        info["failed"] = "no-linear-factors"
        return False, info
    bound = K.q ** (2 * C)
    small = set(primes_upto(bound))
    for f, mult in fact.factors:
        cof_mult = mult - 1 if f == g else mult
        if cof_mult == 0:
            continue
        # only the (q^{2d}-1) part can meet q^{2m}-1; the Q^{d(a-1)} part is a p-power
        shared = gcd_subfield_identity(K.q, pa.deg(f), m)
        _, rough, _ = smooth_split(shared, bound)
        if rough != 1:
            info["failed"] = "smooth-gcd"
            info["witness"] = (f, shared)
            return False, info
    info["failed"] = None
    return True, info


def _iter_monic(K, max_deg):
    for d in range(max_deg + 1):
        for enc in range(K.size**d):
            coeffs = []
            x = enc
            for _ in range(d):
                coeffs.append(x % K.size)
                x //= K.size
            yield tuple(coeffs) + (1,)


def _iter_all(K, max_deg):
    for enc in range(K.size ** (max_deg + 1)):
        coeffs = []
        x = enc
        for _ in range(max_deg + 1):
            coeffs.append(x % K.size)
            x //= K.size
        yield pa.norm(coeffs)


def candidate_h(K, h0, h1):
    """h = h1 * x^q - h0."""
    shifted = (0,) * K.q + tuple(h1)
    return pa.poly_sub(K, shifted, h0)


def search_good(tower: TowerParams, C: int, D: int) -> FieldSetup:
    """First good (h0, h1) in deterministic order: monic h1 outer, h0 inner."""
    K = tower.field
    m, q = tower.m, tower.q
    if C < 1 or D < 0:
        raise ValueError("need C >= 1 and D >= 0")
    if m == q and D <= 1:
        raise ValueError("m = q requires D > 1")
    if m == q - 1 and D <= 0:
        raise ValueError("m = q - 1 requires D > 0")
    for h1 in _iter_monic(K, D):
        for h0 in _iter_all(K, D):
            if not h0:
                continue  # h would be divisible by x
            if pa.poly_gcd(K, h0, h1) != pa.ONE:
                continue
            h = candidate_h(K, h0, h1)
            if pa.deg(h) < m:
                continue
            # cheap rejection: a root in F_{q^2} is a linear factor
            if any(pa.poly_eval(K, h, x) == 0 for x in range(K.size)):
                continue
            ok, info = is_good(K, h, m, C, h0=h0, h1=h1)
            if ok:
                v, L, v_fact = smooth_split(tower.group_order, q ** (2 * C))
                return FieldSetup(
                    tower=tower,
                    C=C,
                    D=D,
                    h0=h0,
                    h1=h1,
                    h=h,
                    g=info["g"],
                    h_factorization=info["factorization"],
                    v=v,
                    L=L,
                    v_factorization=v_fact,
                )
    raise SelectionError(f"no good h for q={q}, m={m}, C={C}, D={D}")


def make_setup_unchecked(tower: TowerParams, C: int, D: int, h0, h1) -> FieldSetup:
    """Assemble a FieldSetup without the goodness gate (obstruction probes)."""
    K = tower.field
    h = candidate_h(K, h0, h1)
    fact = pa.factor(K, h)
    degree_m = [f for f, _ in fact.factors if pa.deg(f) == tower.m]
    if not degree_m:
        raise ValueError("candidate has no degree-m factor to designate as g")
    v, L, v_fact = smooth_split(tower.group_order, tower.q ** (2 * C))
    return FieldSetup(
        tower=tower, C=C, D=D, h0=h0, h1=h1, h=h, g=degree_m[0],
        h_factorization=fact, v=v, L=L, v_factorization=v_fact,
    )


# --- text form ----------------------------------------------------------


def setup_to_text(s: FieldSetup) -> str:
    K = s.K
    lines = [tower_to_text(s.tower).strip()]
    lines.append(f"{s.C} {s.D}")
    lines.append(pa.poly_to_text(K, s.h0))
    lines.append(pa.poly_to_text(K, s.h1))
    lines.append(pa.poly_to_text(K, s.g))
    lines.append(str(s.v))
    lines.append(str(s.L))
    lines.append(" ".join(f"{p}^{e}" for p, e in s.v_factorization))
    return "\n".join(lines) + "\n"


def setup_from_text(text: str) -> FieldSetup:
    lines = text.strip().splitlines()
    tower = tower_from_text("\n".join(lines[:2]))
    K = tower.field
    C, D = (int(x) for x in lines[2].split())
    h0 = pa.poly_from_text(K, lines[3])
    h1 = pa.poly_from_text(K, lines[4])
    g = pa.poly_from_text(K, lines[5])
    setup = make_setup_unchecked(tower, C, D, h0, h1)
    if setup.g != g:
        # file may pin a different degree-m factor; honor it
        degree_m = [f for f, _ in setup.h_factorization.factors if f == g]
        if not degree_m:
            raise ValueError("stored g is not a factor of h")
        setup.g = g
    if setup.v != int(lines[6]) or setup.L != int(lines[7]):
        raise ValueError("stored v*L split disagrees with recomputation")
    return setup


def setup_digest(s: FieldSetup) -> str:
    return hashlib.sha256(setup_to_text(s).encode()).hexdigest()[:16]
