"""Arithmetic in the small coefficient field F_{q^2} and tower parameters.

The field F_{q^2} with q = p^e is realized as F_p[y]/(f) for the first
irreducible monic f of degree 2e (ordered by integer encoding of the low
coefficients). Elements are plain ints in [0, q^2): the base-p encoding of
the coordinate vector, least significant digit = constant coordinate.
All operations go through precomputed tables, so q^2 must stay desk-scale.
"""

from dataclasses import dataclass, field

from .numutil import factorize

# Table construction is O(q^4); beyond this the representation is the wrong tool.
MAX_FIELD_SIZE = 1 << 11


def _fp_digits(x: int, p: int, width: int) -> list[int]:
    out = []
    for _ in range(width):
        out.append(x % p)
        x //= p
    return out


def _fp_poly_mulmod(a, b, modulus, p):
    # dense F_p[y] schoolbook product reduced modulo the monic `modulus`
    n = len(modulus) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for k in range(len(prod) - 1, n - 1, -1):
        c = prod[k]
        if c:
            prod[k] = 0
            for t in range(n):
                prod[k - n + t] = (prod[k - n + t] - c * modulus[t]) % p
    return prod[:n] + [0] * (n - len(prod))


def _fp_poly_is_irreducible(coeffs, p):
    """Exhaustive divisor check for a monic F_p polynomial of small degree."""
    n = len(coeffs) - 1
    if n <= 0:
        return False
    for d in range(1, n // 2 + 1):
        for enc in range(p**d):
            div = _fp_digits(enc, p, d) + [1]
            if _fp_poly_divides(div, coeffs, p):
                return False
    return True


def _fp_poly_divides(div, f, p):
    rem = list(f)
    dn = len(div) - 1
    while len(rem) - 1 >= dn:
        lead = rem[-1]
        if lead:
            for t in range(dn + 1):
                rem[len(rem) - 1 - dn + t] = (rem[len(rem) - 1 - dn + t] - lead * div[t]) % p
        rem.pop()
    return all(c == 0 for c in rem)


@dataclass(eq=False)
class Fq2:
    """The field F_{q^2}, q = p^e, with full operation tables and a generator."""

    p: int
    e: int
    q: int = field(init=False)
    size: int = field(init=False)  # q^2
    modulus: tuple[int, ...] = field(init=False)  # monic, degree 2e, F_p coeffs
    lam: int = field(init=False)  # generator of the unit group

    def __post_init__(self):
        from .numutil import is_prime

        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.e < 1:
            raise ValueError("extension exponent must be >= 1")
        self.q = self.p**self.e
        self.size = self.q * self.q
        if self.size > MAX_FIELD_SIZE:
            raise ValueError(f"q^2 = {self.size} exceeds the table bound {MAX_FIELD_SIZE}")
        self._build()

    def _build(self):
        p, deg, size = self.p, 2 * self.e, self.size
        for enc in range(size):
            cand = _fp_digits(enc, p, deg) + [1]
            if _fp_poly_is_irreducible(cand, p):
                self.modulus = tuple(cand)
                break
        else:  # every monic degree has irreducibles; unreachable
            raise AssertionError("no irreducible modulus found")

        digits = [_fp_digits(x, p, deg) for x in range(size)]

        def enc(vec):
            v = 0
            for d in reversed(vec):
                v = v * p + d
            return v

        self._add = [
            [enc([(xa + ya) % p for xa, ya in zip(digits[x], digits[y])]) for y in range(size)]
            for x in range(size)
        ]
        self._neg = [enc([(-d) % p for d in digits[x]]) for x in range(size)]
        mod = list(self.modulus)
        self._mul = [
            [enc(_fp_poly_mulmod(digits[x], digits[y], mod, p)) for y in range(size)]
            for x in range(size)
        ]
        self._inv = [0] * size
        for x in range(1, size):
            row = self._mul[x]
            self._inv[x] = row.index(1)

        self._frob = [self.pow(x, self.q) for x in range(size)]
        self.subfield = tuple(x for x in range(size) if self._frob[x] == x)
        assert len(self.subfield) == self.q

        self.lam = self._find_generator()
        self._dlog = [0] * size  # index by element; 0 unused
        acc = 1
        for k in range(size - 1):
            self._dlog[acc] = k
            acc = self._mul[acc][self.lam]

    def _find_generator(self) -> int:
        n = self.size - 1
        prime_parts = [n // ell for ell, _ in factorize(n)]
        for x in range(2, self.size):
            if all(self.pow(x, c) != 1 for c in prime_parts):
                return x
        return 1  # size == 2 only

    # --- element operations -------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return self._add[a][b]

    def sub(self, a: int, b: int) -> int:
        return self._add[a][self._neg[b]]

    def neg(self, a: int) -> int:
        return self._neg[a]

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inversion of zero")
        return self._inv[a]

    def pow(self, a: int, k) -> int:
        """a^k with arbitrary-precision k, reduced mod q^2-1 for a != 0."""
        if a == 0:
            if k == 0:
                return 1
            if k < 0:
                raise ZeroDivisionError("negative power of zero")
            return 0
        k %= self.size - 1
        r = 1
        while k:
            if k & 1:
                r = self._mul[r][a]
            a = self._mul[a][a]
            k >>= 1
        return r

    def frobenius_q(self, a: int) -> int:
        """The q-th power map; an involution of F_{q^2} fixing F_q."""
        return self._frob[a]

    def small_dlog(self, a: int) -> int:
        """log_lam(a) in [0, q^2-1), by the precomputed exhaustive table."""
        if a == 0:
            raise ZeroDivisionError("dlog of zero")
        return self._dlog[a]

    def from_base(self, c: int) -> int:
        """Embed an integer residue as a base-field constant."""
        return c % self.p

    # --- text form ----------------------------------------------------------

    def elem_digits(self, a: int) -> str:
        """Base-p coordinate string, constant coordinate first."""
        if self.p > 9:
            raise ValueError("digit serialization requires p <= 9")
        return "".join(str(d) for d in _fp_digits(a, self.p, 2 * self.e))

    def elem_from_digits(self, s: str) -> int:
        v = 0
        for ch in reversed(s):
            v = v * self.p + int(ch)
        if v >= self.size:
            raise ValueError(f"element {s!r} out of range")
        return v


@dataclass(frozen=True, eq=False)
class TowerParams:
    """Validated (p, q, m) data for F_p < F_{q^2} with F_{q^{2m}} on top."""

    field: Fq2
    m: int
    n: int | None = None  # embedding mode records the original degree

    def __post_init__(self):
        q = self.field.q
        if not 2 < self.m <= q:
            raise ValueError(f"m = {self.m} violates 2 < m <= q = {q}")

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def group_order(self) -> int:
        """q^{2m} - 1, the unit group order of the top field."""
        return self.field.size**self.m - 1


_FIELD_CACHE: dict[tuple[int, int], Fq2] = {}


def get_field(p: int, e: int) -> Fq2:
    key = (p, e)
    if key not in _FIELD_CACHE:
        _FIELD_CACHE[key] = Fq2(p, e)
    return _FIELD_CACHE[key]


def build_tower(p: int, n: int) -> TowerParams:
    """Embedding-mode tower: q = p^ceil(log_p n), m = largest multiple of n in (q/2, q]."""
    if n < 2:
        raise ValueError("extension degree must be >= 2")
    e = 1
    while p**e < n:
        e += 1
    q = p**e
    m = (q // n) * n
    if not (2 * m > q and m <= q):
        raise AssertionError(f"no multiple of {n} in (q/2, q] for q = {q}")
    if m <= 2:
        raise ValueError(
            f"embedding gives m = {m} <= 2 for (p={p}, n={n}); use standalone mode"
        )
    return TowerParams(field=get_field(p, e), m=m, n=n)


def build_standalone(p: int, e: int, m: int) -> TowerParams:
    """Direct tower over q = p^e with a caller-chosen m, 2 < m <= q."""
    return TowerParams(field=get_field(p, e), m=m)


def tower_to_text(t: TowerParams) -> str:
    mod_digits = " ".join(str(c) for c in t.field.modulus)
    return f"{t.p} {t.field.e} {t.m}\n{mod_digits}\n"


def tower_from_text(text: str) -> TowerParams:
    lines = text.strip().splitlines()
    p, e, m = (int(x) for x in lines[0].split())
    t = build_standalone(p, e, m)
    mod = tuple(int(x) for x in lines[1].split())
    if mod != t.field.modulus:
        raise ValueError("defining polynomial mismatch (non-canonical tower file)")
    return t
