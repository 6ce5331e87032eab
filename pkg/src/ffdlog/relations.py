"""Factorbase, coset representatives of PGL(2,q) in PGL(2,q^2), relation rows.

A coset of PGL(2,q) is identified by the preimage of P^1(F_q) under the
Mobius map: m and m' produce the same relation row exactly when
m^{-1}(P^1(F_q)) = m'^{-1}(P^1(F_q)), i.e. when m' = tau * m for some
F_q-rational tau (the setwise stabilizer of P^1(F_q) is PGL(2,q), by sharp
3-transitivity). Points of P^1(F_{q^2}) are ints: affine z in [0, q^2),
infinity = q^2. Every unordered point triple lies on exactly one such
preimage circle, so exhaustive enumeration walks triples of circle points
and keeps a circle when the triple is its three smallest points.
"""

import hashlib
import logging
import random
from dataclasses import dataclass, field
from itertools import combinations

from . import polyarith as pa
from .fq2 import Fq2
from .selection import FieldSetup, setup_digest

logger = logging.getLogger(__name__)

# exhaustive coset enumeration is C(q^2+1, 3) triples; cap via q^2
DEFAULT_EXHAUSTIVE_BOUND = 81


@dataclass(frozen=True)
class CosetRep:
    """Normalized matrix (a b; c d) plus the canonical coset invariant."""

    a: int
    b: int
    c: int
    d: int
    invariant: tuple[int, ...]


def _apply_mobius(K: Fq2, a, b, c, d, point):
    inf = K.size
    if point == inf:
        if c == 0:
            return inf
        return K.mul(a, K.inv(c))
    num = K.add(K.mul(a, point), b)
    den = K.add(K.mul(c, point), d)
    if den == 0:
        return inf
    return K.mul(num, K.inv(den))


def coset_invariant(K: Fq2, a, b, c, d) -> tuple[int, ...]:
    """Sorted preimage of P^1(F_q); equal tuples <=> same coset PGL(2,q)*m."""
    # m^{-1} is projectively the adjugate (d, -b; -c, a)
    ia, ib, ic, id_ = d, K.neg(b), K.neg(c), a
    pts = [_apply_mobius(K, ia, ib, ic, id_, z) for z in K.subfield]
    pts.append(_apply_mobius(K, ia, ib, ic, id_, K.size))
    return tuple(sorted(pts))


def _matrix_from_triple(K: Fq2, p0, p1, p2):
    """The Mobius map sending (0, 1, inf) to (p0, p1, p2), as a matrix."""
    inf = K.size

    def proj(pt):
        return (1, 0) if pt == inf else (pt, 1)

    x0, y0 = proj(p0)
    x1, y1 = proj(p1)
    x2, y2 = proj(p2)
    det = K.sub(K.mul(x2, y0), K.mul(x0, y2))
    s = K.mul(K.sub(K.mul(x1, y0), K.mul(x0, y1)), K.inv(det))
    t = K.mul(K.sub(K.mul(x2, y1), K.mul(x1, y2)), K.inv(det))
    a, c = K.mul(s, x2), K.mul(s, y2)
    b, d = K.mul(t, x0), K.mul(t, y0)
    return a, b, c, d


def enumerate_cosets(
    K: Fq2,
    mode: str = "auto",
    sample_count: int | None = None,
    seed: int = 0,
    exhaustive_bound: int = DEFAULT_EXHAUSTIVE_BOUND,
) -> list[CosetRep]:
    """Coset representatives, sorted by invariant.

    Exhaustive mode returns exactly q*(q^2+1) representatives; sampling mode
    draws seeded random invertible matrices until sample_count distinct
    invariants are found.
    """
    q = K.q
    if mode == "auto":
        mode = "exhaustive" if K.size <= exhaustive_bound else "sampled"
    if mode == "exhaustive":
        reps = {}
        npts = K.size + 1
        for i, j, k in combinations(range(npts), 3):
            # n maps (0,1,inf) onto the triple; its inverse maps the triple's
            # circle onto P^1(F_q), so adj(n) is a representative with that
            # circle as its preimage invariant
            na, nb, nc, nd = _matrix_from_triple(K, i, j, k)
            a, b, c, d = nd, K.neg(nb), K.neg(nc), na
            inv = coset_invariant(K, a, b, c, d)
            if inv[0] == i and inv[1] == j and inv[2] == k:
                reps[inv] = CosetRep(a, b, c, d, inv)
        expected = q * (q * q + 1)
        if len(reps) != expected:
            raise AssertionError(f"coset count {len(reps)} != q(q^2+1) = {expected}")
        return [reps[inv] for inv in sorted(reps)]
    if mode == "sampled":
        if sample_count is None:
            raise ValueError("sampling mode needs sample_count")
        rng = random.Random(seed)
        reps = {}
        while len(reps) < sample_count:
            a, b, c, d = (rng.randrange(K.size) for _ in range(4))
            if K.sub(K.mul(a, d), K.mul(b, c)) == 0:
                continue
            inv = coset_invariant(K, a, b, c, d)
            if inv not in reps:
                reps[inv] = CosetRep(a, b, c, d, inv)
        return [reps[inv] for inv in sorted(reps)]
    raise ValueError(f"unknown mode {mode!r}")


# --- factorbase -------------------------------------------------------------


@dataclass(eq=False)
class FactorBase:
    """Ordered columns: 0 -> lambda, 1 -> h1(zeta), 2+theta -> x + theta."""

    K: Fq2
    h1: tuple[int, ...]

    @property
    def size(self) -> int:
        return self.K.size + 2

    def element(self, idx: int) -> tuple[int, ...]:
        if idx == 0:
            return (self.K.lam,)
        if idx == 1:
            return tuple(self.h1)
        theta = idx - 2
        if not 0 <= theta < self.K.size:
            raise IndexError(idx)
        return (theta, 1)

    def elements(self) -> list[tuple[int, ...]]:
        return [self.element(i) for i in range(self.size)]

    def label(self, idx: int) -> str:
        if idx == 0:
            return "lambda"
        if idx == 1:
            return "h1"
        return "x+" + self.K.elem_digits(idx - 2)


def factorbase(setup: FieldSetup) -> FactorBase:
    return FactorBase(K=setup.K, h1=setup.h1)


# --- relation rows ----------------------------------------------------------


@dataclass(eq=False)
class RelationMatrix:
    ncols: int
    rows: list[list[int]]
    provenance: list[object]  # "lambda-order" or the producing invariant
    setup_digest: str
    duplicates: int = 0


def numerator(K: Fq2, rep: CosetRep, setup: FieldSetup):
    """N(x) = (c a^q - a c^q) x h0 + (d a^q - b c^q) h0 + (c b^q - a d^q) x h1 + (d b^q - b d^q) h1."""
    a, b, c, d = rep.a, rep.b, rep.c, rep.d
    fq = K.frobenius_q
    aq, bq, cq, dq = fq(a), fq(b), fq(c), fq(d)
    co_xh0 = K.sub(K.mul(c, aq), K.mul(a, cq))
    co_h0 = K.sub(K.mul(d, aq), K.mul(b, cq))
    co_xh1 = K.sub(K.mul(c, bq), K.mul(a, dq))
    co_h1 = K.sub(K.mul(d, bq), K.mul(b, dq))
    xh0 = pa.poly_mul(K, pa.X, setup.h0)
    xh1 = pa.poly_mul(K, pa.X, setup.h1)
    n = pa.poly_scale(K, xh0, co_xh0)
    n = pa.poly_add(K, n, pa.poly_scale(K, setup.h0, co_h0))
    n = pa.poly_add(K, n, pa.poly_scale(K, xh1, co_xh1))
    n = pa.poly_add(K, n, pa.poly_scale(K, setup.h1, co_h1))
    return n


def try_relation(rep: CosetRep, setup: FieldSetup, fb: FactorBase):
    """Relation row for rep when its numerator splits into linears, else None.

    Left side contributes +1 on the monic linear columns from (c zeta + d) and
    the q maps (a - alpha c) zeta + (b - alpha d); degenerate constants fold
    into the lambda column, as does the unit mismatch with the numerator.
    """
    K = setup.K
    n = numerator(K, rep, setup)
    if not n:
        return None
    split = pa.splits_into_linears(K, n)
    if split is None:
        return None
    unit, linears = split
    row = [0] * fb.size
    a, b, c, d = rep.a, rep.b, rep.c, rep.d
    u_left = 1
    if c != 0:
        row[2 + K.mul(d, K.inv(c))] += 1
        u_left = K.mul(u_left, c)
    else:
        u_left = K.mul(u_left, d)
    for alpha in K.subfield:
        ca = K.sub(a, K.mul(alpha, c))
        cb = K.sub(b, K.mul(alpha, d))
        if ca != 0:
            row[2 + K.mul(cb, K.inv(ca))] += 1
            u_left = K.mul(u_left, ca)
        else:
            u_left = K.mul(u_left, cb)
    row[1] += 1
    for theta, mult in linears:
        row[2 + theta] -= mult
    row[0] = K.small_dlog(K.mul(u_left, K.inv(unit)))
    return row


def lambda_order_row(fb: FactorBase) -> list[int]:
    row = [0] * fb.size
    row[0] = fb.K.size - 1
    return row


def verify_row(setup: FieldSetup, row, modulus=None) -> bool:
    """True iff prod_beta beta^{e_beta} = 1 modulo h (or the given modulus)."""
    K = setup.K
    if modulus is None:
        modulus = setup.h
    fb = factorbase(setup)
    acc = pa.ONE
    for idx, e in enumerate(row):
        if e == 0:
            continue
        term = pa.poly_pow_mod(K, fb.element(idx), e, modulus)
        acc = pa.poly_mod(K, pa.poly_mul(K, acc, term), modulus)
    return acc == pa.ONE


def generate_all(setup: FieldSetup, cosets=None, check=True) -> RelationMatrix:
    """All relation rows: the lambda-order row first, then one per splitting coset."""
    fb = factorbase(setup)
    if cosets is None:
        cosets = enumerate_cosets(setup.K)
    rows = [lambda_order_row(fb)]
    provenance: list[object] = ["lambda-order"]
    seen = {tuple(rows[0])}
    duplicates = 0
    for rep in cosets:
        row = try_relation(rep, setup, fb)
        if row is None:
            continue
        if check and not verify_row(setup, row):
            raise AssertionError(f"relation row fails verification: {rep}")
        key = tuple(row)
        if key in seen:
            duplicates += 1
        seen.add(key)
        rows.append(row)
        provenance.append(rep.invariant)
    if len(rows) < fb.size:
        logger.warning(
            "only %d relation rows for %d columns; solvers may report rank failure",
            len(rows), fb.size,
        )
    return RelationMatrix(
        ncols=fb.size,
        rows=rows,
        provenance=provenance,
        setup_digest=setup_digest(setup),
        duplicates=duplicates,
    )


# --- text form ----------------------------------------------------------


def matrix_to_text(setup: FieldSetup, mat: RelationMatrix) -> str:
    fb = factorbase(setup)
    lines = [f"{mat.ncols} {len(mat.rows)} {mat.setup_digest}"]
    lines.extend(fb.label(i) for i in range(fb.size))
    for row in mat.rows:
        lines.append(" ".join(str(x) for x in row))
    return "\n".join(lines) + "\n"


def matrix_from_text(setup: FieldSetup, text: str) -> RelationMatrix:
    lines = text.strip().splitlines()
    ncols, nrows, digest = lines[0].split()
    ncols, nrows = int(ncols), int(nrows)
    if digest != setup_digest(setup):
        raise ValueError("relation matrix was produced for a different setup")
    rows = [[int(x) for x in line.split()] for line in lines[1 + ncols : 1 + ncols + nrows]]
    return RelationMatrix(
        ncols=ncols, rows=rows, provenance=["file"] * nrows, setup_digest=digest
    )
