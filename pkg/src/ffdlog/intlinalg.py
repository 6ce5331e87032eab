"""Exact integer linear algebra: Smith normal form with transforms,
gcd-splitting triangularization modulo a composite of unknown factorization,
Pohlig-Hellman in smooth-order groups, and CRT.

Matrices are lists of lists of Python ints (arbitrary precision).
"""

import math
from dataclasses import dataclass, field
from typing import Callable

from .numutil import crt_pair


class RankDeficiencyError(Exception):
    """The matrix cannot reach the required pivot count modulo the named factor."""

    def __init__(self, modulus, at_column, witness=None):
        self.modulus = modulus
        self.at_column = at_column
        self.witness = witness
        super().__init__(
            f"rank deficiency modulo {modulus} at column {at_column}"
            + (f" (witness gcd {witness})" if witness else "")
        )


def identity_matrix(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        Oi = out[i]
        for t in range(k):
            a = Ai[t]
            if a:
                Bt = B[t]
                for j in range(m):
                    Oi[j] += a * Bt[j]
    return out


def mat_vec(v, A):
    """Row vector times matrix."""
    m = len(A[0])
    out = [0] * m
    for t, c in enumerate(v):
        if c:
            At = A[t]
            for j in range(m):
                out[j] += c * At[j]
    return out


# --- Smith normal form -------------------------------------------------------


@dataclass(eq=False)
class InvariantDecomposition:
    """U*M*V = diag(d_1..d_k) with d_i | d_{i+1}; 0 encodes infinite order.

    diag is padded to the column count so diag[-1] always corresponds to the
    largest invariant factor of Z^cols / (row span). Basis vectors e(i) for the
    quotient decomposition are the rows of Vinv. U/Uinv are None when left
    transforms were not tracked.
    """

    diag: list[int]
    V: list[list[int]]
    Vinv: list[list[int]]
    U: list[list[int]] | None = None
    Uinv: list[list[int]] | None = None

    def basis_vector(self, i: int) -> list[int]:
        return list(self.Vinv[i])


def _extgcd(a, b):
    r0, r1, s0, s1, t0, t1 = a, b, 1, 0, 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return r0, s0, t0


def _hermite_reduce(basis: dict):
    """Size-reduce an upper-triangular row basis: every entry above a pivot
    ends in [0, pivot). Pivot columns are processed left to right so already
    reduced columns stay reduced."""
    cols_present = sorted(basis)
    for j in cols_present:
        bj = basis[j]
        p = bj[j]
        for i in cols_present:
            if i >= j:
                break
            bi = basis[i]
            q = bi[j] // p
            if q:
                for s in range(j, len(bi)):
                    bi[s] -= q * bj[s]


def hnf_rows(M) -> list[list[int]]:
    """Row span basis in Hermite upper-triangular form, size-reduced.

    Only unimodular row operations are used, so the lattice spanned by the
    rows (and hence every invariant factor) is preserved; per-insertion size
    reduction keeps entries bounded by the lattice determinant.
    """
    basis: dict[int, list[int]] = {}
    for row in M:
        r = list(row)
        while True:
            col = next((j for j, x in enumerate(r) if x), None)
            if col is None:
                break
            b = basis.get(col)
            if b is None:
                if r[col] < 0:
                    r = [-x for x in r]
                basis[col] = r
                break
            a, v = b[col], r[col]
            if v % a == 0:
                q = v // a
                r = [x - q * y for x, y in zip(r, b)]
            else:
                g, x, y = _extgcd(a, v)
                ap, vp = a // g, v // g
                nb = [x * u + y * w for u, w in zip(b, r)]
                nr = [vp * u - ap * w for u, w in zip(b, r)]
                basis[col] = nb
                r = nr
        _hermite_reduce(basis)
    return [basis[c] for c in sorted(basis)]


def snf(M, track_left: bool = True) -> InvariantDecomposition:
    """Smith normal form by unimodular 2x2 gcd combinations, min-|pivot| selection.

    With track_left=False the matrix is first compressed by a row-only
    Hermite pass (the quotient only needs the right transform), which keeps
    the elimination swell-free on relation matrices.
    """
    if not track_left and len(M) > len(M[0]):
        reduced = hnf_rows(M)
        if not reduced:
            reduced = [[0] * len(M[0])]
        M = reduced
    rows, cols = len(M), len(M[0])
    A = [list(r) for r in M]
    V = identity_matrix(cols)
    Vinv = identity_matrix(cols)
    U = identity_matrix(rows) if track_left else None
    Uinv = identity_matrix(rows) if track_left else None

    def row_swap(i, j):
        if i == j:
            return
        A[i], A[j] = A[j], A[i]
        if U is not None:
            U[i], U[j] = U[j], U[i]
            for r in Uinv:
                r[i], r[j] = r[j], r[i]

    def row_addmul(i, j, c):
        # row_i += c * row_j
        if c == 0:
            return
        Ai, Aj = A[i], A[j]
        for t in range(cols):
            Ai[t] += c * Aj[t]
        if U is not None:
            Ui, Uj = U[i], U[j]
            for t in range(rows):
                Ui[t] += c * Uj[t]
            for r in Uinv:
                r[j] -= c * r[i]

    def row_combine(t, i):
        # unimodular: (row_t, row_i) <- (x*row_t + y*row_i, b'*row_t - a'*row_i)
        # where x*a + y*b = g for a = A[t][t], b = A[i][t]; leaves A[i][t] = 0
        a, b = A[t][t], A[i][t]
        if b == 0:
            return
        if a and b % a == 0:
            row_addmul(i, t, -(b // a))
            return
        g, x, y = _extgcd(a, b)
        ap, bp = a // g, b // g
        At, Ai = A[t], A[i]
        for s in range(cols):
            u, w = At[s], Ai[s]
            At[s] = x * u + y * w
            Ai[s] = bp * u - ap * w
        if U is not None:
            Ut, Ui = U[t], U[i]
            for s in range(rows):
                u, w = Ut[s], Ui[s]
                Ut[s] = x * u + y * w
                Ui[s] = bp * u - ap * w
            for r in Uinv:
                u, w = r[t], r[i]
                r[t] = ap * u + bp * w
                r[i] = y * u - x * w

    def row_negate(i):
        A[i] = [-x for x in A[i]]
        if U is not None:
            U[i] = [-x for x in U[i]]
            for r in Uinv:
                r[i] = -r[i]

    def col_swap(i, j):
        if i == j:
            return
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]
        Vinv[i], Vinv[j] = Vinv[j], Vinv[i]

    def col_combine(t, j):
        # unimodular: (col_t, col_j) <- (x*col_t + y*col_j, b'*col_t - a'*col_j)
        a, b = A[t][t], A[t][j]
        if b == 0:
            return
        if a and b % a == 0:
            c = -(b // a)
            for r in A:
                r[j] += c * r[t]
            for r in V:
                r[j] += c * r[t]
            Vt, Vj = Vinv[t], Vinv[j]
            for s in range(cols):
                Vt[s] -= c * Vj[s]
            return
        g, x, y = _extgcd(a, b)
        ap, bp = a // g, b // g
        for r in A:
            u, w = r[t], r[j]
            r[t] = x * u + y * w
            r[j] = bp * u - ap * w
        for r in V:
            u, w = r[t], r[j]
            r[t] = x * u + y * w
            r[j] = bp * u - ap * w
        Vt, Vj = Vinv[t], Vinv[j]
        for s in range(cols):
            u, w = Vt[s], Vj[s]
            Vt[s] = ap * u + bp * w
            Vj[s] = y * u - x * w

    t = 0
    limit = min(rows, cols)
    while t < limit:
        best = None
        for i in range(t, rows):
            Ai = A[i]
            for j in range(t, cols):
                x = Ai[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        if best is None:
            break
        row_swap(t, best[1])
        col_swap(t, best[2])
        while True:
            for i in range(t + 1, rows):
                row_combine(t, i)
            for j in range(t + 1, cols):
                col_combine(t, j)
            # a col combination may repopulate column t below the pivot
            if all(A[i][t] == 0 for i in range(t + 1, rows)):
                break
        # divisibility fix: pivot must divide every trailing entry
        fixed = True
        p = A[t][t]
        for i in range(t + 1, rows):
            Ai = A[i]
            for j in range(t + 1, cols):
                if Ai[j] % p:
                    row_addmul(t, i, 1)
                    fixed = False
                    break
            if not fixed:
                break
        if not fixed:
            continue
        if A[t][t] < 0:
            row_negate(t)
        t += 1

    diag = [A[i][i] if i < limit else 0 for i in range(cols)]
    for i in range(len(diag) - 1):  # chain sanity; guaranteed by construction
        if diag[i] and diag[i + 1] % diag[i]:
            raise AssertionError("divisibility chain violated")
    return InvariantDecomposition(diag=diag, V=V, Vinv=Vinv, U=U, Uinv=Uinv)


def project_theta(kappa, dec: InvariantDecomposition) -> int:
    """Coefficient of e(|F|) in the class of kappa, modulo d_{|F|}."""
    coords = mat_vec(list(kappa), dec.V)
    d = dec.diag[-1]
    return coords[-1] % d if d else coords[-1]


# --- CRT and Pohlig-Hellman ---------------------------------------------------


def crt(residues) -> tuple[int, int]:
    """(x, M) solving all (value, modulus) pairs; moduli must be pairwise coprime."""
    residues = list(residues)
    if not residues:
        return 0, 1
    x, m = residues[0][0] % residues[0][1], residues[0][1]
    for r, n in residues[1:]:
        x, m = crt_pair(x, m, r % n, n)
    return x, m


class MembershipError(Exception):
    """Target lies outside the cyclic group generated by the base."""


@dataclass(frozen=True)
class GroupOps:
    """Minimal multiplicative interface for generic group algorithms."""

    mul: Callable
    one: object


def _gpow(ops: GroupOps, x, k: int):
    r = ops.one
    while k:
        if k & 1:
            r = ops.mul(r, x)
        x = ops.mul(x, x)
        k >>= 1
    return r


def pohlig_hellman_with_order(ops: GroupOps, base, target, order_factorization):
    """(x, ord(base)) with base^x = target; raises MembershipError per prime."""
    order = 1
    for p, e in order_factorization:
        order *= p**e
    residues = []
    for p, e in order_factorization:
        cof = order // p**e
        b = _gpow(ops, base, cof)
        t = _gpow(ops, target, cof)
        # actual order of b is p^k
        k = 0
        probe = b
        while probe != ops.one:
            probe = _gpow(ops, probe, p)
            k += 1
        if k == 0:
            if t != ops.one:
                raise MembershipError(f"target has {p}-part outside trivial subgroup")
            continue
        pk = p**k
        gamma = _gpow(ops, b, p ** (k - 1))  # order p exactly
        b_inv = _gpow(ops, b, pk - 1)
        x = 0
        for i in range(k):
            shifted = ops.mul(t, _gpow(ops, b_inv, x))
            cur = _gpow(ops, shifted, p ** (k - 1 - i))
            # exhaustive digit search in the order-p subgroup
            d = 0
            probe = ops.one
            while probe != cur:
                probe = ops.mul(probe, gamma)
                d += 1
                if d >= p:
                    raise MembershipError(f"no digit at prime {p}")
            x += d * p**i
        residues.append((x, pk))
    return crt(residues)


def pohlig_hellman(ops: GroupOps, base, target, order_factorization) -> int:
    """x reduced modulo ord(base) with base^x = target."""
    return pohlig_hellman_with_order(ops, base, target, order_factorization)[0]


# --- gcd-splitting triangularization -----------------------------------------


def split_modulus(r: int, L: int) -> int:
    """L-hat = L / (M_1 M_2 ... M_i) where M_1 = gcd(r, L), M_2 = gcd(r, L/M_1), ...

    The removed product is the largest factor of L supported on primes shared
    with r; the returned L-hat is the complementary (coprime-to-r) part.
    """
    rest = L
    while True:
        m = math.gcd(r, rest)
        if m == 1:
            return rest
        rest //= m


@dataclass(eq=False)
class ModBlock:
    """Triangular form of the matrix modulo one coprime factor of L."""

    modulus: int
    tri: list[list[int]]
    perm: list[int]  # perm[position] = original column index
    script: list[tuple]
    pivots: list[int]
    gen_col: int | None = None  # original column with no pivot (relation mode)
    col_logs: list[int] | None = None  # class of column beta as multiple of gen
    rhs: list[list[int]] | None = None


@dataclass(eq=False)
class ModSplitResult:
    modulus: int
    blocks: list[ModBlock]

    @property
    def factors(self) -> list[int]:
        return [b.modulus for b in self.blocks]


def _triangularize(A, rhs, perm, script, t, L, want_pivots):
    """Recursive unit-pivot triangularization with gcd splits; returns blocks."""
    rows, cols = len(A), len(perm)
    A = [[x % L for x in row] for row in A]
    rhs = [row[:] for row in rhs] if rhs is not None else None
    perm = perm[:]
    script = script[:]
    while t < want_pivots:
        pivot = None
        for i in range(t, rows):
            Ai = A[i]
            for j in range(t, cols):
                if math.gcd(Ai[j], L) == 1:
                    pivot = (i, j)
                    break
            if pivot:
                break
        if pivot is None:
            # look for an entry that splits L into nontrivial coprime parts
            witness = None
            for i in range(t, rows):
                Ai = A[i]
                for j in range(t, cols):
                    x = Ai[j]
                    if x % L:
                        witness = math.gcd(x, L)
                        lhat = split_modulus(x, L)
                        if 1 < lhat < L:
                            left = _triangularize(A, rhs, perm, script, t, lhat, want_pivots)
                            right = _triangularize(A, rhs, perm, script, t, L // lhat, want_pivots)
                            return left + right
            raise RankDeficiencyError(L, t, witness)
        i, j = pivot
        if i != t:
            A[i], A[t] = A[t], A[i]
            if rhs is not None:
                rhs[i], rhs[t] = rhs[t], rhs[i]
            script.append(("rswap", i, t))
        if j != t:
            for row in A:
                row[j], row[t] = row[t], row[j]
            perm[j], perm[t] = perm[t], perm[j]
            script.append(("cswap", j, t))
        inv = pow(A[t][t], -1, L)
        At = A[t]
        for i in range(t + 1, rows):
            Ai = A[i]
            if Ai[t]:
                c = (-Ai[t] * inv) % L
                for s in range(cols):
                    Ai[s] = (Ai[s] + c * At[s]) % L
                if rhs is not None:
                    Ri, Rt = rhs[i], rhs[t]
                    for s in range(len(Ri)):
                        Ri[s] = (Ri[s] + c * Rt[s]) % L
                script.append(("raddmul", i, t, c))
        t += 1
    block = ModBlock(
        modulus=L,
        tri=A,
        perm=perm,
        script=script,
        pivots=[A[i][i] % L for i in range(want_pivots)],
        rhs=rhs,
    )
    return [block]


def gcd_split_reduce(M, L: int) -> ModSplitResult:
    """Relation-matrix triangularization modulo L per the splitting lemma.

    Requires rank |F|-1 modulo every prime of L. Each block gets unit pivots
    on cols-1 columns; the surviving pivotless column's class generates the
    quotient modulo the block modulus, and back-substitution expresses every
    column as a multiple of it. Trailing entries in the open column must
    vanish modulo the block modulus and are checked.
    """
    cols = len(M[0])
    if L == 1:
        return ModSplitResult(modulus=1, blocks=[])
    blocks = _triangularize(M, None, list(range(cols)), [], 0, L, cols - 1)
    for blk in blocks:
        Lb = blk.modulus
        last = cols - 1
        for i in range(cols - 1, len(blk.tri)):
            if blk.tri[i][last] % Lb:
                raise AssertionError(
                    f"trailing entry x({i}) = {blk.tri[i][last]} nonzero mod {Lb}; "
                    "input rows are not relations"
                )
        # express alpha(perm[t]) in terms of alpha(perm[last])
        coeff = [0] * cols
        coeff[blk.perm[last]] = 1
        vals = {last: 1}
        for t in range(cols - 2, -1, -1):
            acc = 0
            row = blk.tri[t]
            for k in range(t + 1, cols):
                acc += row[k] * vals[k]
            c = (-pow(row[t], -1, Lb) * acc) % Lb
            vals[t] = c
            coeff[blk.perm[t]] = c
        blk.gen_col = blk.perm[last]
        blk.col_logs = coeff
    prod = 1
    for blk in blocks:
        if math.gcd(prod, blk.modulus) != 1:
            raise AssertionError("split factors are not pairwise coprime")
        prod *= blk.modulus
    if prod != L:
        raise AssertionError("split factors do not multiply to L")
    blocks.sort(key=lambda b: b.modulus)
    return ModSplitResult(modulus=L, blocks=blocks)


def solve_full_rank_mod(M, rhs, L: int):
    """Solve M * x = rhs modulo L with full column rank mod every prime of L.

    rhs rows are integer vectors (one per matrix row); the solution is one
    vector per matrix column, combined across split blocks by CRT. Raises
    RankDeficiencyError when a block cannot pivot every column, ValueError
    when leftover rows are inconsistent.
    """
    rows, cols = len(M), len(M[0])
    if rows < cols:
        raise RankDeficiencyError(L, rows, None)
    width = len(rhs[0]) if rhs else 0
    if L == 1:
        return [[0] * width for _ in range(cols)]
    blocks = _triangularize(M, rhs, list(range(cols)), [], 0, L, cols)
    per_block = []
    for blk in blocks:
        Lb = blk.modulus
        for i in range(cols, rows):
            if any(x % Lb for x in blk.rhs[i]):
                raise ValueError(f"inconsistent system modulo {Lb}")
        sol = [None] * cols
        for t in range(cols - 1, -1, -1):
            acc = list(blk.rhs[t])
            row = blk.tri[t]
            for k in range(t + 1, cols):
                ck = row[k]
                if ck:
                    xk = sol[k]
                    for s in range(width):
                        acc[s] -= ck * xk[s]
            inv = pow(row[t], -1, Lb)
            sol[t] = [(inv * x) % Lb for x in acc]
        by_col = [None] * cols
        for t in range(cols):
            by_col[blk.perm[t]] = sol[t]
        per_block.append((Lb, by_col))
    out = []
    for c in range(cols):
        vec = []
        for s in range(width):
            x, _ = crt([(bc[c][s], Lb) for Lb, bc in per_block])
            vec.append(x)
        out.append(vec)
    return out


def replay_script(M, script, L: int):
    """Apply a recorded operation script to M modulo L (for audit/replay)."""
    A = [[x % L for x in row] for row in M]
    for op in script:
        if op[0] == "rswap":
            _, i, j = op
            A[i], A[j] = A[j], A[i]
        elif op[0] == "cswap":
            _, i, j = op
            for row in A:
                row[i], row[j] = row[j], row[i]
        elif op[0] == "raddmul":
            _, i, j, c = op
            Ai, Aj = A[i], A[j]
            for s in range(len(Ai)):
                Ai[s] = (Ai[s] + c * Aj[s]) % L
        else:
            raise ValueError(f"unknown opcode {op[0]!r}")
    return A


# --- text form ----------------------------------------------------------------


def decomposition_to_text(dec: InvariantDecomposition) -> str:
    lines = ["diag " + " ".join(str(d) for d in dec.diag)]
    for name, mat in (("V", dec.V), ("Vinv", dec.Vinv), ("U", dec.U), ("Uinv", dec.Uinv)):
        if mat is None:
            continue
        lines.append(name)
        lines.extend(" ".join(str(x) for x in row) for row in mat)
    return "\n".join(lines) + "\n"


def modsplit_to_text(res: ModSplitResult) -> str:
    lines = [f"modulus {res.modulus}", f"blocks {len(res.blocks)}"]
    for blk in res.blocks:
        lines.append(f"block {blk.modulus}")
        lines.append("perm " + " ".join(str(x) for x in blk.perm))
        lines.append("gen_col " + str(blk.gen_col))
        if blk.col_logs is not None:
            lines.append("logs " + " ".join(str(x) for x in blk.col_logs))
        for row in blk.tri:
            lines.append("tri " + " ".join(str(x) for x in row))
        for op in blk.script:
            lines.append("op " + " ".join(str(x) for x in op))
    return "\n".join(lines) + "\n"
