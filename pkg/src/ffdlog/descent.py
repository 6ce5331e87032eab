"""Degree-halving descent with salvaged trap relations.

A step relates the F_{q^2} translates of the target P (stripped of factors
shared with h/g) and the appearing factors of h/g themselves to polynomials
of at most half the degree, modulo g. Factors of h/g are never discarded:
they become extra solvable columns. Expressions are valid in the L-torsion
of F_g^x; the smooth complement is handled directly by Pohlig-Hellman on
the original targets, so it never touches the descent.
"""

import logging
import math
import random
from dataclasses import dataclass, field

from . import polyarith as pa
from .intlinalg import (MembershipError, RankDeficiencyError, crt,
                        pohlig_hellman_with_order, project_theta,
                        solve_full_rank_mod)
from .fbsolve import FactorbaseLogs, solve_scaled_log, group_ops_mod
from .relations import CosetRep, enumerate_cosets, factorbase
from .selection import FieldSetup

logger = logging.getLogger(__name__)


class DescentError(Exception):
    """A descent step failed after exhausting its retry budget."""


@dataclass(eq=False)
class DescentRelation:
    """One accepted coset row: trap exponents, translate exponents, rhs ledger."""

    trap_exps: dict[int, int]  # index into h cofactors -> s_exponent
    translate_exps: dict[int, int]  # beta -> 0/1
    rhs_small: dict[tuple, int]  # irreducible poly (deg <= bound) -> exponent
    c_lambda: int
    c_h1: int
    coset: CosetRep


@dataclass(eq=False)
class DescentNode:
    target: tuple
    w: int
    relations: list[DescentRelation]
    gp: list[int]  # cofactor indices appearing with nonzero trap exponent
    vp: list[tuple]  # union of small rhs polynomials, canonical order
    expressions: dict  # column key -> exponent vector over vp + [lambda, h1]
    children: list[tuple]  # vp members of degree > 1
    rejected_g: int  # cosets dropped because g divides the numerator
    depth: int


@dataclass(eq=False)
class DescentContext:
    setup: FieldSetup
    cosets: list[CosetRep]
    rng: random.Random
    retry_budget: int = 5
    memo: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)

    @property
    def cofactors(self):
        return self.setup.cofactors()


def make_context(setup: FieldSetup, seed: int = 0, retry_budget: int = 5,
                 cosets=None) -> DescentContext:
    if cosets is None:
        cosets = enumerate_cosets(setup.K)
    return DescentContext(setup=setup, cosets=cosets,
                          rng=random.Random(seed), retry_budget=retry_budget)


def randomize_if_shared(P, setup: FieldSetup, rng: random.Random, max_tries: int = 64):
    """A power-of-P representative coprime to h, with the exponent used.

    P^r is reduced modulo g (reduction modulo h provably cannot clear a
    shared factor of P itself); the class modulo g is P's class to the r-th
    power, which is all the descent consumes. r is kept coprime to the full
    group order so the final logarithm can be unscaled.
    """
    K = setup.K
    N = setup.group_order
    if pa.poly_mod(K, P, setup.g) == pa.ZERO:
        raise ValueError("target is divisible by g; logarithm undefined")
    if pa.poly_gcd(K, P, setup.h) == pa.ONE:
        return P, 1
    for _ in range(max_tries):
        r = rng.randrange(2, N)
        if math.gcd(r, N) != 1:
            continue
        cand = pa.poly_pow_mod(K, P, r, setup.g)
        if pa.poly_gcd(K, cand, setup.h) == pa.ONE:
            return cand, r
    raise DescentError("randomization failed to reach a representative coprime to h")


def descent_numerator(K, rep: CosetRep, P, setup: FieldSetup):
    """(N, e) with (cP+d) prod_alpha ((a-alpha c)P + (b-alpha d)) = N / h1^e mod h.

    N = (cP+d)(a^q Q + b^q h1^w) - (aP+b)(c^q Q + d^q h1^w) where Q is the
    coefficient-q-powered P evaluated at h0/h1 and cleared of denominators;
    deg N <= (1 + max deg(h0, h1)) * w.
    """
    a, b, c, d = rep.a, rep.b, rep.c, rep.d
    fq = K.frobenius_q
    w = pa.deg(P)
    # Q = sum p~_i h0^i h1^(w-i)
    h0_pows = [pa.ONE]
    h1_pows = [pa.ONE]
    for _ in range(w):
        h0_pows.append(pa.poly_mul(K, h0_pows[-1], setup.h0))
        h1_pows.append(pa.poly_mul(K, h1_pows[-1], setup.h1))
    Q = pa.ZERO
    for i, coeff in enumerate(P):
        if coeff:
            term = pa.poly_scale(K, pa.poly_mul(K, h0_pows[i], h1_pows[w - i]), fq(coeff))
            Q = pa.poly_add(K, Q, term)
    h1w = h1_pows[w]
    cPd = pa.poly_add(K, pa.poly_scale(K, P, c), (d,) if d else pa.ZERO)
    aPb = pa.poly_add(K, pa.poly_scale(K, P, a), (b,) if b else pa.ZERO)
    left = pa.poly_add(K, pa.poly_scale(K, Q, fq(a)), pa.poly_scale(K, h1w, fq(b)))
    right = pa.poly_add(K, pa.poly_scale(K, Q, fq(c)), pa.poly_scale(K, h1w, fq(d)))
    N = pa.poly_sub(K, pa.poly_mul(K, cPd, left), pa.poly_mul(K, aPb, right))
    return N, w


def child_degree_bound(w: int) -> int:
    """Degree cap for descent children: ceil(w/2), never below 1."""
    return max(1, (w + 1) // 2)


def _translate_data(P, setup: FieldSetup, cofactors):
    """Per-beta stripped translates: (t_beta poly, capped valuations per cofactor)."""
    K = setup.K
    out = {}
    for beta in range(K.size):
        t = pa.poly_sub(K, P, (beta,) if beta else pa.ZERO)
        vals = []
        for gi, ai in cofactors:
            v = 0
            while True:
                quot, rem = pa.poly_divmod(K, t, gi)
                if rem != pa.ZERO or v == ai:
                    break
                t = quot
                v += 1
            vals.append(v)
        out[beta] = (t, vals)
    return out


def try_descent_relation(rep: CosetRep, P, setup: FieldSetup, translates,
                         cofactors):
    """DescentRelation for rep, or None when the numerator misses the degree cut.

    Acceptance: every irreducible factor of N has degree <= ceil(w/2) or is a
    factor of h; a factor equal to g itself rejects the coset (the congruence
    degenerates modulo g).
    """
    K = setup.K
    w = pa.deg(P)
    bound = child_degree_bound(w)
    N, h1_pow = descent_numerator(K, rep, P, setup)
    if not N:
        return None
    fact = pa.factor(K, N)
    cof_index = {gi: i for i, (gi, _) in enumerate(cofactors)}
    n_exp = {}
    rhs_small = {}
    for f, mult in fact.factors:
        if f == setup.g:
            return "rejected-g"
        if f in cof_index:
            n_exp[cof_index[f]] = n_exp.get(cof_index[f], 0) + mult
        elif pa.deg(f) <= bound:
            rhs_small[f] = rhs_small.get(f, 0) + mult
        else:
            return None
    # left side: distinct translates with unit bookkeeping
    a, b, c, d = rep.a, rep.b, rep.c, rep.d
    u_left = 1
    lhs = []
    if c != 0:
        lhs.append(K.neg(K.mul(d, K.inv(c))))
        u_left = K.mul(u_left, c)
    else:
        u_left = K.mul(u_left, d)
    for alpha in K.subfield:
        ca = K.sub(a, K.mul(alpha, c))
        cb = K.sub(b, K.mul(alpha, d))
        if ca != 0:
            lhs.append(K.neg(K.mul(cb, K.inv(ca))))
            u_left = K.mul(u_left, ca)
        else:
            u_left = K.mul(u_left, cb)
    if len(set(lhs)) != len(lhs):
        raise AssertionError("translate exponents must be 0/1")
    trap = {}
    translate_exps = {}
    for beta in lhs:
        translate_exps[beta] = 1
        _, vals = translates[beta]
        for i, v in enumerate(vals):
            if v:
                trap[i] = trap.get(i, 0) + v
    for i, n in n_exp.items():
        trap[i] = trap.get(i, 0) - n
    trap = {i: s for i, s in trap.items() if s}
    c_lambda = K.small_dlog(K.mul(fact.unit, K.inv(u_left)))
    return DescentRelation(
        trap_exps=trap,
        translate_exps=translate_exps,
        rhs_small=rhs_small,
        c_lambda=c_lambda,
        c_h1=-h1_pow,
        coset=rep,
    )


def verify_descent_relation(rel: DescentRelation, P, setup: FieldSetup,
                            translates, cofactors) -> bool:
    """Evaluate the relation in F_g^x: both sides must agree exactly."""
    K = setup.K
    g = setup.g
    lhs = pa.ONE

    def mulpow(acc, poly, e):
        return pa.poly_mod(K, pa.poly_mul(K, acc, pa.poly_pow_mod(K, poly, e, g)), g)

    for i, s in rel.trap_exps.items():
        lhs = mulpow(lhs, cofactors[i][0], s)
    for beta, e in rel.translate_exps.items():
        lhs = mulpow(lhs, translates[beta][0], e)
    rhs = pa.poly_pow_mod(K, (K.lam,), rel.c_lambda, g)
    rhs = mulpow(rhs, setup.h1, rel.c_h1)
    for u, e in rel.rhs_small.items():
        rhs = mulpow(rhs, u, e)
    return lhs == rhs


def build_system(P, setup: FieldSetup, ctx: DescentContext, depth: int) -> DescentNode:
    """Collect relations over the cosets and assemble the MP system."""
    K = setup.K
    cofactors = ctx.cofactors
    translates = _translate_data(P, setup, cofactors)
    relations = []
    rejected_g = 0
    for rep in ctx.cosets:
        rel = try_descent_relation(rep, P, setup, translates, cofactors)
        if rel == "rejected-g":
            rejected_g += 1
            continue
        if rel is None:
            continue
        if not verify_descent_relation(rel, P, setup, translates, cofactors):
            raise AssertionError(f"descent relation fails evaluation: {rel.coset}")
        relations.append(rel)
    gp = sorted({i for rel in relations for i in rel.trap_exps})
    vp = sorted({u for rel in relations for u in rel.rhs_small},
                key=lambda f: (len(f), f))
    children = [u for u in vp if pa.deg(u) > 1]
    return DescentNode(
        target=P, w=pa.deg(P), relations=relations, gp=gp, vp=vp,
        expressions={}, children=children, rejected_g=rejected_g, depth=depth,
    )


def solve_step(node: DescentNode, setup: FieldSetup, ctx: DescentContext):
    """Express every column (stripped translates and trap factors) over
    vp + [lambda, h1] in F_g^x[L]; trivial when L = 1."""
    K = setup.K
    L = setup.L
    q2 = K.size
    cols = [("g", i) for i in node.gp] + [("t", beta) for beta in range(q2)]
    basis = list(node.vp) + ["lambda", "h1"]
    width = len(basis)
    if L == 1:
        node.expressions = {key: [0] * width for key in cols}
        return node.expressions
    col_pos = {key: i for i, key in enumerate(cols)}
    vp_pos = {u: i for i, u in enumerate(node.vp)}
    rows = []
    rhs = []
    for rel in node.relations:
        row = [0] * len(cols)
        for i, s in rel.trap_exps.items():
            row[col_pos[("g", i)]] = s
        for beta, e in rel.translate_exps.items():
            row[col_pos[("t", beta)]] = e
        vec = [0] * width
        for u, e in rel.rhs_small.items():
            vec[vp_pos[u]] = e
        vec[width - 2] = rel.c_lambda
        vec[width - 1] = rel.c_h1
        rows.append(row)
        rhs.append(vec)
    if len(rows) < len(cols):
        raise RankDeficiencyError(L, len(rows), None)
    sol = solve_full_rank_mod(rows, rhs, L)
    node.expressions = {key: sol[i] for key, i in col_pos.items()}
    # verify in the L-torsion: col^v == expr^v in F_g
    cofactors = ctx.cofactors
    translates = _translate_data(node.target, setup, cofactors)
    v = setup.v
    for key, expr in node.expressions.items():
        elem = cofactors[key[1]][0] if key[0] == "g" else translates[key[1]][0]
        lhs = pa.poly_pow_mod(K, elem, v, setup.g)
        rhs_val = pa.ONE
        for u, e in zip(node.vp, expr):
            rhs_val = pa.poly_mod(
                K, pa.poly_mul(K, rhs_val, pa.poly_pow_mod(K, u, e * v, setup.g)), setup.g
            )
        rhs_val = pa.poly_mod(
            K, pa.poly_mul(K, rhs_val,
                           pa.poly_pow_mod(K, (K.lam,), expr[width - 2] * v, setup.g)),
            setup.g,
        )
        rhs_val = pa.poly_mod(
            K, pa.poly_mul(K, rhs_val,
                           pa.poly_pow_mod(K, setup.h1, expr[width - 1] * v, setup.g)),
            setup.g,
        )
        if lhs != rhs_val:
            raise AssertionError(f"descent expression fails L-torsion check at {key}")
    return node.expressions


def full_descent(P, setup: FieldSetup, ctx: DescentContext, depth: int = 1):
    """Exponent vector over the factorbase expressing P's class in F_g^x[L].

    Children of degree > 1 are descended recursively with memoization; the
    recorded trace keeps one block per node for offline inspection. Rank
    failures re-randomize the target with a fresh coprime power, up to the
    context's retry budget.
    """
    K = setup.K
    L = setup.L
    size = setup.fb_size
    P = pa.poly_mod(K, P, setup.g)
    if not P:
        raise ValueError("zero target")
    lam_part = 0
    monic, lead = pa.poly_monic(K, P)
    if lead != 1:
        lam_part = K.small_dlog(lead)
    P = monic

    def with_lambda(inner):
        out = list(inner)
        out[0] += lam_part
        if L > 1:
            out[0] %= L
        return out

    if pa.deg(P) == 0:
        vec = [0] * size
        vec[0] = lam_part
        return vec
    if pa.deg(P) == 1:
        vec = [0] * size
        vec[0] = lam_part
        vec[2 + P[0]] += 1
        return vec
    if P in ctx.memo:
        return with_lambda(ctx.memo[P])
    if pa.poly_gcd(K, P, setup.h) != pa.ONE:
        P2, r = randomize_if_shared(P, setup, ctx.rng)
        inner = full_descent(P2, setup, ctx, depth)
        r_inv = pow(r, -1, L) if L > 1 else 0
        inner = [(x * r_inv) % L for x in inner] if L > 1 else [0] * size
        ctx.memo[P] = inner
        return with_lambda(inner)

    attempts = 0
    last_err = None
    cur, scale, cur_lam = P, 1, 0  # class(cur) = class(P)^scale * lam^{-cur_lam}
    while True:
        try:
            node = build_system(cur, setup, ctx, depth)
            ctx.trace.append(node)
            solve_step(node, setup, ctx)
            break
        except (RankDeficiencyError, ValueError) as exc:
            last_err = exc
            attempts += 1
            if attempts > ctx.retry_budget:
                raise DescentError(
                    f"descent from degree {pa.deg(P)} failed after "
                    f"{ctx.retry_budget} retries: {last_err}"
                )
            while True:
                r = ctx.rng.randrange(2, setup.group_order)
                if math.gcd(r, setup.group_order) != 1:
                    continue
                cand = pa.poly_pow_mod(K, P, r, setup.g)
                if not cand:
                    continue
                cand, lead2 = pa.poly_monic(K, cand)
                if pa.deg(cand) >= 2 and pa.poly_gcd(K, cand, setup.h) == pa.ONE:
                    cur, scale = cand, r
                    cur_lam = K.small_dlog(lead2) if lead2 != 1 else 0
                    break

    # cur is coprime to h, so its beta=0 translate is cur itself
    expr = node.expressions[("t", 0)]
    inner = [0] * size
    for u, e in zip(node.vp, expr):
        if pa.deg(u) == 1:
            inner[2 + u[0]] += e
            continue
        if e == 0 and L > 1:
            continue
        # when L = 1 every exponent vanishes but the recursion tree is still
        # walked (memoized) so each V_P member decomposes down to linears
        child = full_descent(u, setup, ctx, depth + 1)
        for i in range(size):
            inner[i] += e * child[i]
    inner[0] += expr[len(node.vp)]
    inner[1] += expr[len(node.vp) + 1]
    if scale != 1:
        # class(P)^scale = lam^{cur_lam} * class(cur)
        inner[0] += cur_lam
        r_inv = pow(scale, -1, L) if L > 1 else 0
        inner = [x * r_inv for x in inner]
    inner = [x % L for x in inner] if L > 1 else [0] * size
    ctx.memo[P] = inner
    return with_lambda(inner)


def dlog(gamma, eta, setup: FieldSetup, logs: FactorbaseLogs | None, dec,
         ctx: DescentContext | None = None):
    """log_eta(gamma) in F_g^x, or None when gamma is outside <eta>.

    The L-part descends both elements to factorbase expressions and compares
    invariant-factor coordinates; the smooth part runs Pohlig-Hellman on the
    v-torsion projections directly. Any returned value is re-verified.
    """
    K = setup.K
    g = setup.g
    gamma = pa.poly_mod(K, gamma, g)
    eta = pa.poly_mod(K, eta, g)
    if not gamma or not eta:
        raise ValueError("zero element has no logarithm")
    if ctx is None:
        ctx = make_context(setup)
    residues = []
    if setup.L > 1:
        a_vec = full_descent(gamma, setup, ctx)
        b_vec = full_descent(eta, setup, ctx)
        th_a = project_theta(a_vec, dec) % setup.L
        th_b = project_theta(b_vec, dec) % setup.L
        sol = solve_scaled_log(th_a, th_b, setup.L)
        if sol is None:
            return None
        residues.append(sol)
    if setup.v > 1:
        ops = group_ops_mod(setup, g)
        gv = pa.poly_pow_mod(K, gamma, setup.L, g)
        ev = pa.poly_pow_mod(K, eta, setup.L, g)
        try:
            residues.append(pohlig_hellman_with_order(ops, ev, gv, setup.v_factorization))
        except MembershipError:
            return None
    x, _ = crt([(r, m) for r, m in residues if m > 1] or [(0, 1)])
    if pa.poly_pow_mod(K, eta, x, g) != gamma:
        raise AssertionError("dlog verification failed on a claimed success")
    return x


# --- trace text ---------------------------------------------------------------


def trace_to_text(setup: FieldSetup, ctx: DescentContext) -> str:
    K = setup.K
    lines = []
    for node in ctx.trace:
        lines.append(f"node target={pa.poly_to_text(K, node.target)} w={node.w} "
                     f"depth={node.depth}")
        lines.append(f"  relations={len(node.relations)} |GP|={len(node.gp)} "
                     f"|VP|={len(node.vp)} rejected_g={node.rejected_g}")
        lines.append("  children " + (" ".join(pa.poly_to_text(K, c) for c in node.children) or "-"))
        for key, expr in sorted(node.expressions.items()):
            label = f"g{key[1]}" if key[0] == "g" else f"t{key[1]}"
            lines.append(f"  expr {label} " + " ".join(str(x) for x in expr))
    return "\n".join(lines) + "\n"
