"""Brute-force ground truth for tiny fields.

Everything here is deliberately independent of the solver machinery: the
generator is found by scanning field elements, logs come from walking its
powers, subgroup structure comes from closure under the generating set, and
matrix ranks come from a standalone elimination. The only shared code is
basic field/polynomial arithmetic.
"""

import itertools
import logging
import math
import random
from dataclasses import dataclass

from . import polyarith as pa
from .fq2 import TowerParams
from .numutil import factorize
from .relations import RelationMatrix, factorbase, generate_all
from .selection import FieldSetup, make_setup_unchecked, unit_group_order

logger = logging.getLogger(__name__)

FULL_TABLE_BOUND = 1 << 25
CLOSURE_BOUND = 1 << 21


@dataclass(eq=False)
class LogTable:
    """Logs to a brute-found generator of F_g^x; complete or target-restricted."""

    generator: tuple
    order: int
    logs: dict
    complete: bool

    def __getitem__(self, elem):
        return self.logs[elem]

    def __contains__(self, elem):
        return elem in self.logs


def brute_generator(setup: FieldSetup):
    """First generator of F_g^x in coefficient order, certified by order tests."""
    K = setup.K
    N = setup.group_order
    checks = [N // ell for ell, _ in factorize(N)]
    size, m = K.size, setup.m
    for enc in range(1, size**m):
        coeffs = []
        x = enc
        for _ in range(m):
            coeffs.append(x % size)
            x //= size
        cand = pa.norm(coeffs)
        if all(pa.poly_pow_mod(K, cand, c, setup.g) != pa.ONE for c in checks):
            return cand
    raise AssertionError("cyclic group without generator")


def _walk_logs(setup: FieldSetup, gen, targets):
    """One multiplicative pass gen^0, gen^1, ... recording logs of targets.

    targets=None records every element (full table). Characteristic 2 runs on
    integers with packed bit-field coordinates so the whole-group walk at
    q^{2m} ~ 2^24 stays affordable.
    """
    K = setup.K
    N = setup.group_order
    m = setup.m
    want = None if targets is None else {t for t in targets}
    logs = {}
    if K.p == 2:
        bits = 2 * K.e
        mask = K.size - 1

        def pack(poly):
            v = 0
            for i, c in enumerate(poly):
                v |= c << (bits * i)
            return v

        # multiplication by gen is F_{q^2}-linear: table per coefficient slot
        slot = []
        for i in range(m):
            xi_gen = pa.poly_mod(K, pa.poly_mul(K, (0,) * i + (1,), gen), setup.g)
            slot.append([pack(pa.poly_scale(K, xi_gen, c)) for c in range(K.size)])
        want_packed = None if want is None else {pack(t) for t in want}
        back = {} if want is None else {pack(t): t for t in want}
        cur = pack(pa.ONE)
        for k in range(N):
            if want_packed is None:
                coeffs = [(cur >> (bits * i)) & mask for i in range(m)]
                logs[pa.norm(coeffs)] = k
            elif cur in want_packed:
                logs[back[cur]] = k
                if len(logs) == len(want_packed):
                    break
            nxt = 0
            v = cur
            for i in range(m):
                c = v & mask
                if c:
                    nxt ^= slot[i][c]
                v >>= bits
            cur = nxt
    else:
        cur = pa.ONE
        for k in range(N):
            if want is None:
                logs[cur] = k
            elif cur in want:
                logs[cur] = k
                if len(logs) == len(want):
                    break
            cur = pa.poly_mod(K, pa.poly_mul(K, cur, gen), setup.g)
    return logs


def brute_logs(setup: FieldSetup, targets=None) -> LogTable:
    """Exhaustive log table in F_g^x (or just the requested targets)."""
    N = setup.group_order
    if targets is None and N > FULL_TABLE_BOUND:
        raise ValueError(f"group order {N} above the full-table bound")
    gen = brute_generator(setup)
    targets = None if targets is None else [pa.poly_mod(setup.K, t, setup.g) for t in targets]
    logs = _walk_logs(setup, gen, targets)
    if targets is None and len(logs) != N:
        raise AssertionError("walk did not visit the whole group")
    return LogTable(generator=gen, order=N, logs=logs, complete=targets is None)


# --- group structure ----------------------------------------------------------


@dataclass(eq=False)
class GroupStructureReport:
    mode: str  # "closure" or "per-prime"
    order: int | None
    invariants: list[int] | None
    per_prime: dict  # ell -> {"cyclic": bool, "rank": int, "full_rank": bool}
    fb_order_upper: int  # |F_h^x| from the factorization


def _rank_mod(rows, ell: int) -> int:
    A = [[x % ell for x in r] for r in rows]
    rank = 0
    ncols = len(A[0]) if A else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(A)) if A[i][col]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][col], -1, ell)
        for i in range(len(A)):
            if i != rank and A[i][col]:
                c = A[i][col] * inv % ell
                A[i] = [(a - c * b) % ell for a, b in zip(A[i], A[rank])]
        rank += 1
        if rank == len(A):
            break
    return rank


def _closure_coordinates(setup: FieldSetup):
    """Coordinates of the factorbase images in prod F_{f_i}^x (squarefree h).

    Returns (moduli, generator coordinate vectors), using per-factor log
    tables built by exhaustive walks.
    """
    K = setup.K
    fb = factorbase(setup)
    moduli = []
    coords = [[] for _ in range(fb.size)]
    for f, mult in setup.h_factorization.factors:
        assert mult == 1
        d = pa.deg(f)
        order = K.size**d - 1
        moduli.append(order)
        # generator of F_f^x by scan
        checks = [order // ell for ell, _ in factorize(order)]
        gen = None
        for enc in range(1, K.size**d):
            cs = []
            x = enc
            for _ in range(d):
                cs.append(x % K.size)
                x //= K.size
            cand = pa.norm(cs)
            if all(pa.poly_pow_mod(K, cand, c, f) != pa.ONE for c in checks):
                gen = cand
                break
        table = {}
        cur = pa.ONE
        for k in range(order):
            table[cur] = k
            cur = pa.poly_mod(K, pa.poly_mul(K, cur, gen), f)
        for idx in range(fb.size):
            img = pa.poly_mod(K, fb.element(idx), f)
            coords[idx].append(table[img])
    return moduli, coords


def _close_subgroup(moduli, gens):
    """Closure of the generated subgroup of prod Z/N_i, elements packed as ints."""

    def pack(vec):
        v = 0
        for x, n in zip(vec, moduli):
            v = v * n + x % n
        return v

    def add(a, b):
        out = 0
        mult = 1
        res = []
        for n in reversed(moduli):
            res.append(((a % n) + (b % n)) % n)
            a //= n
            b //= n
        for x, n in zip(reversed(res), moduli):
            out = out * n + x
        return out

    group = {0}
    members = [0]
    for gvec in gens:
        g = pack(gvec)
        if g in group:
            continue
        # relative order of g over the current subgroup
        k = 1
        cur = g
        while cur not in group:
            cur = add(cur, g)
            k += 1
        shift = 0
        new = []
        for _ in range(k - 1):
            shift = add(shift, g)
            new.extend(add(x, shift) for x in members)
        group.update(new)
        members.extend(new)
    return group, add, pack


def _invariants_from_counts(order: int, torsion_count) -> list[int]:
    """Invariant factors from |G| and a counter of ell^k-torsion sizes."""
    per_prime = {}
    for ell, v in factorize(order):
        exps = []
        prev = 0
        for k in range(1, v + 1):
            nk = torsion_count(ell, k)
            rank_k = 0
            n = nk
            while n > 1:
                n //= ell
                rank_k += 1
            # rank_k = sum_j min(k, e_j); first differences recover the partition
            exps.append(rank_k - prev)
            prev = rank_k
        # exps[k-1] = #{j : e_j >= k}; convert to the partition e_1 >= e_2 >= ...
        partition = []
        for k, cnt in enumerate(exps, start=1):
            while len(partition) < cnt:
                partition.append(0)
            for j in range(cnt):
                partition[j] = k
        per_prime[ell] = sorted(partition, reverse=True)
    nfac = max((len(v) for v in per_prime.values()), default=0)
    invariants = []
    for i in range(nfac):
        d = 1
        for ell, partition in per_prime.items():
            if i < len(partition):
                d *= ell ** partition[i]
        invariants.append(d)
    invariants.reverse()  # ascending, divisibility chain
    return invariants


def group_structure(setup: FieldSetup, relmat: RelationMatrix | None = None,
                    closure_bound: int = CLOSURE_BOUND) -> GroupStructureReport:
    """Structure of <F_h>: closure enumeration when affordable, else exact
    per-prime checks on the generator ell-parts. Always reports, for every
    prime ell | q^{2m}-1 with ell > q^{2C}, whether the ell-primary part is
    cyclic and the rank of the relation matrix mod ell.
    """
    K = setup.K
    N = setup.group_order
    fb = factorbase(setup)
    h_units = unit_group_order(K, setup.h_factorization)
    bigger = [ell for ell, _ in factorize(N) if ell > K.q ** (2 * setup.C)]
    if relmat is None:
        relmat = generate_all(setup)
    squarefree = all(m == 1 for _, m in setup.h_factorization.factors)
    per_prime = {}
    order = None
    invariants = None
    if squarefree and h_units <= closure_bound:
        moduli, coords = _closure_coordinates(setup)
        group, add, pack = _close_subgroup(moduli, coords)
        order = len(group)

        def torsion_count(ell, k):
            # enumerate the ambient ell^k-torsion and test membership
            ranges = []
            for n in moduli:
                g = 1
                nn = n
                while nn % ell == 0 and g < ell**k:
                    nn //= ell
                    g *= ell
                step = n // g
                ranges.append([j * step for j in range(g)])
            count = 0
            for combo in itertools.product(*ranges):
                if pack(list(combo)) in group:
                    count += 1
            return count

        invariants = _invariants_from_counts(order, torsion_count)
        total = 1
        for d in invariants:
            total *= d
        assert total == order
        for ell in bigger:
            cyc = torsion_count(ell, 1) <= ell
            rank = _rank_mod(relmat.rows, ell)
            per_prime[ell] = {
                "cyclic": cyc, "rank": rank, "full_rank": rank == fb.size - 1,
            }
        report_mode = "closure"
    else:
        col_elems = [pa.poly_mod(K, fb.element(i), setup.h) for i in range(fb.size)]
        for ell in bigger:
            a = 0
            nn = h_units
            while nn % ell == 0:
                nn //= ell
                a += 1
            if a == 0:
                per_prime[ell] = {
                    "cyclic": True,
                    "rank": _rank_mod(relmat.rows, ell),
                    "full_rank": _rank_mod(relmat.rows, ell) == fb.size - 1,
                }
                continue
            cof = h_units // ell**a
            proj = cof * pow(cof, -1, ell**a)
            parts = [pa.poly_pow_mod(K, c, proj, setup.h) for c in col_elems]

            def ell_order(x):
                k = 0
                while x != pa.ONE:
                    x = pa.poly_pow_mod(K, x, ell, setup.h)
                    k += 1
                return k

            orders = [ell_order(x) for x in parts]
            kmax = max(orders)
            x = parts[orders.index(kmax)]
            powers = {pa.ONE}
            cur = pa.ONE
            for _ in range(ell**kmax - 1):
                cur = pa.poly_mod(K, pa.poly_mul(K, cur, x), setup.h)
                powers.add(cur)
            cyc = all(p in powers for p in parts)
            rank = _rank_mod(relmat.rows, ell)
            per_prime[ell] = {
                "cyclic": cyc, "rank": rank, "full_rank": rank == fb.size - 1,
            }
        report_mode = "per-prime"
    return GroupStructureReport(
        mode=report_mode, order=order, invariants=invariants,
        per_prime=per_prime, fb_order_upper=h_units,
    )


# --- obstruction probe ----------------------------------------------------------


@dataclass(eq=False)
class ProbeReport:
    setup: FieldSetup
    structure: GroupStructureReport
    obstructed: bool  # some large prime has non-cyclic ell-primary part
    rank_deficient: bool  # some large prime has rank < |F|-1
    consistent: bool  # the two flags agree prime by prime

    def text(self) -> str:
        lines = [
            f"mode {self.structure.mode}",
            f"order {self.structure.order if self.structure.order else '-'}",
            f"obstructed {int(self.obstructed)}",
            f"rank_deficient {int(self.rank_deficient)}",
            f"consistent {int(self.consistent)}",
        ]
        for ell, info in sorted(self.structure.per_prime.items()):
            lines.append(
                f"prime {ell} cyclic {int(info['cyclic'])} rank {info['rank']}"
            )
        return "\n".join(lines) + "\n"


def obstruction_probe(h0, h1, tower: TowerParams, C: int,
                      relmat: RelationMatrix | None = None) -> ProbeReport:
    """Relation generation + group structure for a candidate h, goodness bypassed."""
    setup = make_setup_unchecked(tower, C, max(pa.deg(h0), pa.deg(h1)), h0, h1)
    if relmat is None:
        relmat = generate_all(setup)
    structure = group_structure(setup, relmat)
    obstructed = any(not info["cyclic"] for info in structure.per_prime.values())
    deficient = any(not info["full_rank"] for info in structure.per_prime.values())
    consistent = all(
        info["cyclic"] == info["full_rank"] for info in structure.per_prime.values()
    )
    return ProbeReport(
        setup=setup, structure=structure, obstructed=obstructed,
        rank_deficient=deficient, consistent=consistent,
    )


def find_obstructed_candidate(tower: TowerParams, C: int, D: int):
    """(h0, h1) with two distinct degree-m factors, no linear factors, and a
    shared prime > q^{2C}; None when the bounded scan finds nothing."""
    K = tower.field
    m, q = tower.m, tower.q
    N = tower.group_order
    if not any(ell > q ** (2 * C) for ell, _ in factorize(N)):
        return None
    from .selection import _iter_all, _iter_monic, candidate_h

    for h1 in _iter_monic(K, D):
        for h0 in _iter_all(K, D):
            if not h0 or pa.poly_gcd(K, h0, h1) != pa.ONE:
                continue
            h = candidate_h(K, h0, h1)
            if pa.deg(h) != 2 * m:
                continue
            if any(pa.poly_eval(K, h, x) == 0 for x in range(K.size)):
                continue
            fact = pa.factor(K, h)
            degm = [f for f, mult in fact.factors if pa.deg(f) == m and mult == 1]
            if len(degm) == 2 and len(fact.factors) == 2:
                return h0, h1
    return None


# --- pipeline verification -------------------------------------------------------


def verify_pipeline(setup: FieldSetup, relmat: RelationMatrix | None = None,
                    dlog_pairs: int = 5, seed: int = 0):
    """End-to-end check of factorbase logs and descent dlogs against brute force.

    Returns (ok, report_lines); any mismatch is reported with its witness.
    """
    from .descent import dlog, make_context
    from .fbsolve import factorbase_logs
    from .intlinalg import snf

    K = setup.K
    N = setup.group_order
    fb = factorbase(setup)
    report = []
    if relmat is None:
        relmat = generate_all(setup)
    from .relations import verify_row

    for i, row in enumerate(relmat.rows):
        if not verify_row(setup, row):
            cols = [fb.label(j) for j, e in enumerate(row) if e]
            report.append(f"FAIL relation row {i} does not hold; columns {cols}")
            return False, report
    report.append(f"relations: {len(relmat.rows)} rows verified")
    dec = snf([r[:] for r in relmat.rows], track_left=False)
    logs = factorbase_logs(dec, setup)
    rng = random.Random(seed)
    pairs = []
    for _ in range(dlog_pairs):
        while True:
            ga = pa.norm([rng.randrange(K.size) for _ in range(setup.m)])
            et = pa.norm([rng.randrange(K.size) for _ in range(setup.m)])
            ga = pa.poly_mod(K, ga, setup.g)
            et = pa.poly_mod(K, et, setup.g)
            if ga and et and pa.deg(ga) >= 1 and pa.deg(et) >= 1:
                pairs.append((ga, et))
                break
    targets = [pa.poly_mod(K, fb.element(i), setup.g) for i in range(fb.size)]
    targets.append(logs.mu)
    for ga, et in pairs:
        targets.extend([ga, et])
    table = brute_logs(setup, targets=targets)
    t_mu = table[logs.mu]
    for idx in range(fb.size):
        beta = targets[idx]
        if (t_mu * logs.thetas[idx] - table[beta]) % N:
            report.append(
                f"FAIL theta mismatch at {fb.label(idx)}: "
                f"theta={logs.thetas[idx]} brute={table[beta]} t_mu={t_mu}"
            )
            return False, report
    report.append(f"factorbase logs: {fb.size} columns match brute table")
    ctx = make_context(setup, seed=seed)
    for ga, et in pairs:
        x = dlog(ga, et, setup, logs, dec, ctx)
        tg, te = table[ga], table[et]
        if x is None:
            # brute check: no j can work iff gcd(te, N) does not divide tg
            if tg % math.gcd(te, N) == 0:
                report.append(f"FAIL dlog missed a solution for {ga} base {et}")
                return False, report
        elif (te * x - tg) % N:
            report.append(f"FAIL dlog {ga} base {et}: got {x}")
            return False, report
    report.append(f"descent dlogs: {len(pairs)} pairs match brute table")
    return True, report
