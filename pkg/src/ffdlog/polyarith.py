"""Dense univariate polynomial arithmetic over F_{q^2}.

Polynomials are tuples of field-element ints, ascending degree, with no
trailing zeros; () is the zero polynomial. Every function takes the field
K (an Fq2 instance) as its first argument, pychar2-style.
"""

from dataclasses import dataclass

from .fq2 import Fq2

ZERO: tuple[int, ...] = ()
ONE: tuple[int, ...] = (1,)
X: tuple[int, ...] = (0, 1)


def norm(coeffs) -> tuple[int, ...]:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def deg(f) -> int:
    return len(f) - 1


def poly_add(K: Fq2, f, g):
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] = K.add(out[i], c)
    return norm(out)


def poly_neg(K: Fq2, f):
    return tuple(K.neg(c) for c in f)


def poly_sub(K: Fq2, f, g):
    return poly_add(K, f, poly_neg(K, g))


def poly_scale(K: Fq2, f, c: int):
    if c == 0:
        return ZERO
    return tuple(K.mul(a, c) for a in f)


def poly_mul(K: Fq2, f, g):
    if not f or not g:
        return ZERO
    out = [0] * (len(f) + len(g) - 1)
    mul_t, add_t = K._mul, K._add
    for i, a in enumerate(f):
        if a:
            row = mul_t[a]
            for j, b in enumerate(g):
                if b:
                    k = i + j
                    out[k] = add_t[out[k]][row[b]]
    return tuple(out)


def poly_divmod(K: Fq2, f, g):
    """(quotient, remainder) with deg(remainder) < deg(g); g must be nonzero."""
    if not g:
        raise ZeroDivisionError("division by zero polynomial")
    if len(f) < len(g):
        return ZERO, norm(f)
    rem = list(f)
    dg = len(g) - 1
    inv_lead = K.inv(g[-1])
    mul_t, add_t, neg_t = K._mul, K._add, K._neg
    inv_row = mul_t[inv_lead]
    quot = [0] * (len(f) - dg)
    for k in range(len(f) - 1, dg - 1, -1):
        c = rem[k]
        if c:
            qc = inv_row[c]
            quot[k - dg] = qc
            neg_row = mul_t[neg_t[qc]]
            base = k - dg
            for t in range(dg + 1):
                gt = g[t]
                if gt:
                    rem[base + t] = add_t[rem[base + t]][neg_row[gt]]
    return norm(quot), norm(rem[:dg])


def poly_mod(K: Fq2, f, g):
    return poly_divmod(K, f, g)[1]


def poly_monic(K: Fq2, f):
    """(monic multiple, leading coefficient); f must be nonzero."""
    if not f:
        raise ZeroDivisionError("monic of zero polynomial")
    lead = f[-1]
    if lead == 1:
        return tuple(f), 1
    return poly_scale(K, f, K.inv(lead)), lead


def poly_gcd(K: Fq2, f, g):
    """Monic gcd; errors when both inputs are zero."""
    if not f and not g:
        raise ZeroDivisionError("gcd(0, 0) undefined")
    a, b = norm(f), norm(g)
    while b:
        a, b = b, poly_mod(K, a, b)
    return poly_monic(K, a)[0]


def poly_extgcd(K: Fq2, f, g):
    """(d, s, t) with s*f + t*g = d, d monic."""
    a, b = norm(f), norm(g)
    sa, sb = ONE, ZERO
    ta, tb = ZERO, ONE
    while b:
        q, r = poly_divmod(K, a, b)
        a, b = b, r
        sa, sb = sb, poly_sub(K, sa, poly_mul(K, q, sb))
        ta, tb = tb, poly_sub(K, ta, poly_mul(K, q, tb))
    if not a:
        raise ZeroDivisionError("gcd(0, 0) undefined")
    lead = a[-1]
    if lead != 1:
        c = K.inv(lead)
        a, sa, ta = poly_scale(K, a, c), poly_scale(K, sa, c), poly_scale(K, ta, c)
    return a, sa, ta


def poly_invmod(K: Fq2, f, modulus):
    d, s, _ = poly_extgcd(K, f, modulus)
    if d != ONE:
        raise ZeroDivisionError(f"polynomial not invertible (gcd degree {deg(d)})")
    return poly_mod(K, s, modulus)


def poly_eval(K: Fq2, f, x: int) -> int:
    acc = 0
    mul_t, add_t = K._mul, K._add
    for c in reversed(f):
        acc = add_t[mul_t[acc][x]][c]
    return acc


def poly_pow_mod(K: Fq2, f, k, modulus):
    """f^k mod modulus; negative k via modular inverse."""
    if k < 0:
        return poly_pow_mod(K, poly_invmod(K, f, modulus), -k, modulus)
    base = poly_mod(K, f, modulus)
    result = poly_mod(K, ONE, modulus)
    while k:
        if k & 1:
            result = poly_mod(K, poly_mul(K, result, base), modulus)
        k >>= 1
        if k:
            base = poly_mod(K, poly_mul(K, base, base), modulus)
    return result


def poly_deriv(K: Fq2, f):
    out = []
    for i in range(1, len(f)):
        out.append(K.mul(K.from_base(i), f[i]))
    return norm(out)


def poly_pth_root(K: Fq2, f):
    """Inverse of the p-power map on polynomials with only p-divisible exponents."""
    p = K.p
    root_exp = K.size // p  # a^(q^2/p) is the p-th root of a
    out = []
    for i in range(0, len(f), p):
        out.append(K.pow(f[i], root_exp))
    return norm(out)


# --- factorization ----------------------------------------------------------


@dataclass(frozen=True)
class Factorization:
    """unit * prod(factor^mult) with monic irreducible factors in canonical order."""

    unit: int
    factors: tuple[tuple[tuple[int, ...], int], ...]


def _poly_key(f):
    return (len(f), f)


def squarefree_decomposition(K: Fq2, f):
    """[(g_i, mult_i)] with f monic = prod g_i^mult_i, g_i squarefree and coprime."""
    p = K.p
    out = []
    fp = poly_deriv(K, f)
    if fp:
        c = poly_gcd(K, f, fp)
        w = poly_divmod(K, f, c)[0]
        i = 1
        while w != ONE:
            y = poly_gcd(K, w, c)
            z = poly_divmod(K, w, y)[0]
            if z != ONE:
                out.append((z, i))
            i += 1
            w = y
            c = poly_divmod(K, c, y)[0]
        if c != ONE:
            for g, mult in squarefree_decomposition(K, poly_pth_root(K, c)):
                out.append((g, mult * p))
    else:
        for g, mult in squarefree_decomposition(K, poly_pth_root(K, f)):
            out.append((g, mult * p))
    return out


def _nullspace_rows(K: Fq2, mat, n):
    """Basis of {v : v*mat = 0} for an n x n matrix over K, rows as tuples."""
    # eliminate on columns of mat^T, tracking the combination matrix
    rows = [list(r) for r in mat]
    track = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    pivot_cols = []
    r = 0
    for col in range(n):
        piv = None
        for i in range(r, n):
            if rows[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        track[r], track[piv] = track[piv], track[r]
        inv = K.inv(rows[r][col])
        rows[r] = [K.mul(c, inv) for c in rows[r]]
        track[r] = [K.mul(c, inv) for c in track[r]]
        for i in range(n):
            if i != r and rows[i][col] != 0:
                c = rows[i][col]
                rows[i] = [K.sub(a, K.mul(c, b)) for a, b in zip(rows[i], rows[r])]
                track[i] = [K.sub(a, K.mul(c, b)) for a, b in zip(track[i], track[r])]
        pivot_cols.append(col)
        r += 1
    return [tuple(track[i]) for i in range(r, n)]


def _berlekamp_squarefree(K: Fq2, f):
    """Irreducible factors of a squarefree monic f, deterministic."""
    n = deg(f)
    if n == 1:
        return [f]
    # rows of the Frobenius matrix: x^(i*q^2) mod f
    xq = poly_pow_mod(K, X, K.size, f)
    rows = []
    cur = ONE
    for i in range(n):
        padded = list(cur) + [0] * (n - len(cur))
        padded[i] = K.sub(padded[i], 1)  # subtract identity
        rows.append(padded)
        if i + 1 < n:
            cur = poly_mod(K, poly_mul(K, cur, xq), f)
    basis = _nullspace_rows(K, rows, n)
    r = len(basis)
    factors = [f]
    if r == 1:
        return factors
    for vec in basis:
        v = norm(vec)
        if deg(v) < 1:
            continue
        for s in range(K.size):
            if len(factors) == r:
                return sorted(factors, key=_poly_key)
            shifted = poly_sub(K, v, (s,))
            next_factors = []
            for fac in factors:
                if deg(fac) == 1:
                    next_factors.append(fac)
                    continue
                d = poly_gcd(K, fac, shifted)
                if 0 < deg(d) < deg(fac):
                    next_factors.append(d)
                    next_factors.append(poly_divmod(K, fac, d)[0])
                else:
                    next_factors.append(fac)
            factors = next_factors
    return sorted(factors, key=_poly_key)


def factor(K: Fq2, f) -> Factorization:
    """Complete factorization into monic irreducibles, canonical order."""
    f = norm(f)
    if deg(f) < 1:
        raise ValueError("cannot factor a constant polynomial")
    monic, unit = poly_monic(K, f)
    found: dict[tuple, int] = {}
    for part, mult in squarefree_decomposition(K, monic):
        for irr in _berlekamp_squarefree(K, part):
            found[irr] = found.get(irr, 0) + mult
    # irreducibility of the parts is forced by the Berlekamp dimension count
    # (each squarefree part is split until the nullspace dimension is reached);
    # the property suite re-verifies every factor with is_irreducible.
    factors = tuple(sorted(found.items(), key=lambda kv: _poly_key(kv[0])))
    return Factorization(unit=unit, factors=factors)


def expand(K: Fq2, fact: Factorization):
    out = (fact.unit,)
    for g, mult in fact.factors:
        for _ in range(mult):
            out = poly_mul(K, out, g)
    return out


def is_irreducible(K: Fq2, f) -> bool:
    """Deterministic irreducibility test over F_{q^2}."""
    f = norm(f)
    n = deg(f)
    if n < 1:
        raise ValueError("constant polynomial")
    if n == 1:
        return True
    f = poly_monic(K, f)[0]
    Q = K.size
    # x^(Q^n) == x mod f, and no fixed subfield at proper divisor levels
    if poly_pow_mod(K, X, Q**n, f) != poly_mod(K, X, f):
        return False
    from .numutil import factorize

    for ell, _ in factorize(n):
        power = poly_pow_mod(K, X, Q ** (n // ell), f)
        if poly_gcd(K, f, poly_sub(K, power, X)) != ONE:
            return False
    return True


def splits_into_linears(K: Fq2, f):
    """(unit, ((theta, mult), ...)) when f = unit * prod (x+theta)^mult, else None."""
    f = norm(f)
    if not f:
        raise ValueError("zero polynomial")
    monic, unit = poly_monic(K, f)
    out = []
    for root in range(K.size):
        if deg(monic) == 0:
            break
        mult = 0
        lin = (K.neg(root), 1)  # x - root
        while poly_eval(K, monic, root) == 0:
            monic = poly_divmod(K, monic, lin)[0]
            mult += 1
        if mult:
            out.append((K.neg(root), mult))
    if deg(monic) != 0:
        return None
    out.sort()
    return unit, tuple(out)


# --- text form ----------------------------------------------------------


def poly_to_text(K: Fq2, f) -> str:
    if not f:
        return "-"
    return " ".join(K.elem_digits(c) for c in f)


def poly_from_text(K: Fq2, s: str):
    s = s.strip()
    if s == "-":
        return ZERO
    return norm(K.elem_from_digits(tok) for tok in s.split())
