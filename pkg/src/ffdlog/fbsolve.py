"""Factorbase discrete logarithms.

Algorithm I works from the Smith decomposition of the relation matrix: the
class of the largest invariant-factor basis vector carries the rough part
of q^{2m}-1, the smooth part is found by a direct generator search, and the
two are glued with idempotent exponents. Algorithm II triangularizes the
relation matrix modulo L with gcd splitting and reads the logs off the
per-block back-substitution, never factoring L.
"""

import math
from dataclasses import dataclass

from . import polyarith as pa
from .intlinalg import (GroupOps, InvariantDecomposition, MembershipError,
                        ModSplitResult, crt, gcd_split_reduce,
                        pohlig_hellman_with_order, project_theta)
from .numutil import is_smooth
from .relations import RelationMatrix, factorbase
from .selection import FieldSetup, unit_group_order


class ObstructionError(Exception):
    """A heuristic or obstruction condition failed; diagnostics in args."""


@dataclass(eq=False)
class FactorbaseLogs:
    """Generator mu of F_g^x and theta_beta with mu^theta_beta = beta."""

    mu: tuple[int, ...]
    mu_vec: list[int]
    thetas: list[int]
    method: str


@dataclass(eq=False)
class AlgIIResult:
    """Generator of F_h^x[L] and per-column logs of the L-torsion images."""

    alpha: tuple[int, ...]
    alpha_vec: list[int]
    logs: list[int]
    split: ModSplitResult


def fb_product(setup: FieldSetup, vec, modulus=None):
    """prod_beta beta^{vec_beta} reduced modulo g (or a given modulus)."""
    K = setup.K
    if modulus is None:
        modulus = setup.g
    fb = factorbase(setup)
    acc = pa.ONE
    for idx, e in enumerate(vec):
        if e == 0:
            continue
        term = pa.poly_pow_mod(K, fb.element(idx), e, modulus)
        acc = pa.poly_mod(K, pa.poly_mul(K, acc, term), modulus)
    return acc


def check_snf_condition(dec: InvariantDecomposition, setup: FieldSetup) -> bool:
    """gcd(d_{|F|-1}, q^{2m}-1) must be q^{2C}-smooth; d = 0 counts as gcd = N."""
    d = dec.diag[-2]
    g = math.gcd(d, setup.group_order) if d else setup.group_order
    return g == 1 or is_smooth(g, setup.K.q ** (2 * setup.C))


def _theta_mod_L(vec, dec: InvariantDecomposition, setup: FieldSetup) -> int:
    # project_theta is taken modulo d_{|F|}; L divides d_{|F|} whenever the
    # smoothness condition holds, so reduction mod L is well defined
    return project_theta(vec, dec) % setup.L if setup.L > 1 else 0


def solve_scaled_log(th_a: int, th_b: int, L: int):
    """(j, modulus) with th_a = j*th_b mod L, or None; modulus = L/gcd(th_b, L)."""
    if L == 1:
        return 0, 1
    g = math.gcd(th_b, L)
    if th_a % g:
        return None
    m = L // g
    j = (th_a // g) * pow(th_b // g, -1, m) % m
    return j, m


def group_ops_mod(setup: FieldSetup, modulus) -> GroupOps:
    K = setup.K
    return GroupOps(
        mul=lambda x, y: pa.poly_mod(K, pa.poly_mul(K, x, y), modulus),
        one=pa.ONE,
    )


def subgroup_dlog(a_vec, b_vec, dec: InvariantDecomposition, setup: FieldSetup):
    """j with prod beta^{a} = (prod beta^{b})^j in F_g^x, or None.

    The L-part is solved on invariant-factor coordinates with extended
    Euclid; the v-part projects to the v-torsion by L-th powers and runs
    Pohlig-Hellman; CRT glues the parts across the base's order.
    """
    if not check_snf_condition(dec, setup):
        raise ObstructionError("second-largest invariant factor shares rough primes")
    K = setup.K
    residues = []
    if setup.L > 1:
        th_a = _theta_mod_L(a_vec, dec, setup)
        th_b = _theta_mod_L(b_vec, dec, setup)
        sol = solve_scaled_log(th_a, th_b, setup.L)
        if sol is None:
            return None
        residues.append(sol)
    if setup.v > 1:
        ops = group_ops_mod(setup, setup.g)
        a_v = pa.poly_pow_mod(K, fb_product(setup, a_vec), setup.L, setup.g)
        b_v = pa.poly_pow_mod(K, fb_product(setup, b_vec), setup.L, setup.g)
        try:
            residues.append(pohlig_hellman_with_order(ops, b_v, a_v, setup.v_factorization))
        except MembershipError:
            return None
    j, _ = crt([(r, m) for r, m in residues if m > 1] or [(0, 1)])
    return j


def _order_divisible_by_v(setup: FieldSetup, elem) -> bool:
    K = setup.K
    N = setup.group_order
    for ell, _ in setup.v_factorization:
        if pa.poly_pow_mod(K, elem, N // ell, setup.g) == pa.ONE:
            return False
    return True


def _vpart_candidates(size: int):
    """Deterministic exponent-vector candidates: multisets of <= 3 columns."""
    for i in range(size):
        vec = [0] * size
        vec[i] = 1
        yield vec
    for i in range(size):
        for j in range(i, size):
            vec = [0] * size
            vec[i] += 1
            vec[j] += 1
            yield vec
    for i in range(size):
        for j in range(i, size):
            for k in range(j, size):
                vec = [0] * size
                vec[i] += 1
                vec[j] += 1
                vec[k] += 1
                yield vec


def find_generator(dec: InvariantDecomposition, setup: FieldSetup):
    """(mu, mu_vec): a generator of F_g^x of order q^{2m}-1 with its F-expression.

    The L-part is phi(e(|F|)) raised to v*(v^{-1} mod L), which pins an
    element of order exactly L by the sufficiency lemma; the v-part is a
    search over small factorbase products whose order is divisible by v,
    projected onto the v-torsion.
    """
    if not check_snf_condition(dec, setup):
        raise ObstructionError("factorbase logs unavailable: smoothness condition fails")
    K = setup.K
    v, L = setup.v, setup.L
    size = setup.fb_size
    mu_vec = [0] * size
    if L > 1:
        exp_l = v * pow(v, -1, L)
        e_last = dec.basis_vector(size - 1)
        mu_vec = [c * exp_l for c in e_last]
        gamma_l = fb_product(setup, mu_vec)
        if pa.poly_pow_mod(K, gamma_l, L, setup.g) != pa.ONE:
            raise ObstructionError("phi(e(|F|)) does not carry the full L-torsion")
    if v > 1:
        exp_v = L * pow(L, -1, v) if v > 1 else 0
        for cand in _vpart_candidates(size):
            if _order_divisible_by_v(setup, fb_product(setup, cand)):
                for i in range(size):
                    mu_vec[i] += cand[i] * exp_v
                break
        else:
            raise ObstructionError(
                "no factorbase product of weight <= 3 has order divisible by v"
            )
    mu = fb_product(setup, mu_vec)
    return mu, mu_vec


def factorbase_logs(dec: InvariantDecomposition, setup: FieldSetup) -> FactorbaseLogs:
    """theta_beta for every column, each verified by mu^theta = beta in F_g."""
    K = setup.K
    mu, mu_vec = find_generator(dec, setup)
    fb = factorbase(setup)
    thetas = []
    for idx in range(setup.fb_size):
        unit = [0] * setup.fb_size
        unit[idx] = 1
        theta = subgroup_dlog(unit, mu_vec, dec, setup)
        if theta is None:
            raise ObstructionError(f"column {fb.label(idx)} not in <mu>")
        beta = pa.poly_mod(K, fb.element(idx), setup.g)
        if pa.poly_pow_mod(K, mu, theta, setup.g) != beta:
            raise AssertionError(f"verification mu^theta != beta at column {fb.label(idx)}")
        thetas.append(theta)
    return FactorbaseLogs(mu=mu, mu_vec=mu_vec, thetas=thetas, method="SNF")


def algII_solve(R: RelationMatrix, setup: FieldSetup) -> AlgIIResult:
    """Generator of F_h^x[L] plus per-column L-torsion logs, by gcd splitting.

    Per block L_i, the pivotless column's image generates F_h^x[L_i]; columns
    project into the L_i-torsion with idempotent exponents and every log is
    verified in F_h before CRT recombination.
    """
    K = setup.K
    L = setup.L
    fb = factorbase(setup)
    size = setup.fb_size
    if L == 1:
        return AlgIIResult(alpha=pa.ONE, alpha_vec=[0] * size,
                           logs=[0] * size, split=ModSplitResult(modulus=1, blocks=[]))
    split = gcd_split_reduce(R.rows, L)
    h_units = unit_group_order(K, setup.h_factorization)
    col_elems = [pa.poly_mod(K, fb.element(i), setup.h) for i in range(size)]
    per_block = []
    for blk in split.blocks:
        Li = blk.modulus
        cof = h_units // Li
        if math.gcd(cof, Li) != 1:
            raise AssertionError("L_i-torsion projection exponent is not idempotent")
        proj = cof * pow(cof, -1, Li)
        alpha_i = pa.poly_pow_mod(K, col_elems[blk.gen_col], proj, setup.h)
        for idx in range(size):
            c = blk.col_logs[idx]
            lhs = pa.poly_pow_mod(K, col_elems[idx], proj, setup.h)
            if pa.poly_pow_mod(K, alpha_i, c, setup.h) != lhs:
                raise ObstructionError(
                    f"block {Li}: column {fb.label(idx)} log fails verification"
                )
        per_block.append((blk, proj, alpha_i))
    alpha = pa.ONE
    alpha_vec = [0] * size
    for blk, proj, alpha_i in per_block:
        Li = blk.modulus
        lift = (L // Li) * pow(L // Li, -1, Li)
        alpha = pa.poly_mod(
            K, pa.poly_mul(K, alpha, pa.poly_pow_mod(K, alpha_i, lift, setup.h)), setup.h
        )
        alpha_vec[blk.gen_col] += proj * lift
    logs = []
    for idx in range(size):
        val, _ = crt([(blk.col_logs[idx], blk.modulus) for blk, _, _ in per_block])
        logs.append(val)
    # final check against the L-torsion projection of each column
    cof_L = h_units // L
    proj_L = cof_L * pow(cof_L, -1, L)
    for idx in range(size):
        want = pa.poly_pow_mod(K, col_elems[idx], proj_L, setup.h)
        if pa.poly_pow_mod(K, alpha, logs[idx], setup.h) != want:
            raise AssertionError(f"CRT-combined log fails at column {fb.label(idx)}")
    return AlgIIResult(alpha=alpha, alpha_vec=alpha_vec, logs=logs, split=split)


# --- text form ----------------------------------------------------------


def logs_to_text(setup: FieldSetup, logs: FactorbaseLogs) -> str:
    fb = factorbase(setup)
    lines = [pa.poly_to_text(setup.K, logs.mu)]
    lines.extend(f"{fb.label(i)} {t}" for i, t in enumerate(logs.thetas))
    return "\n".join(lines) + "\n"


def logs_from_text(setup: FieldSetup, text: str) -> FactorbaseLogs:
    lines = text.strip().splitlines()
    mu = pa.poly_from_text(setup.K, lines[0])
    thetas = [int(line.split()[1]) for line in lines[1:]]
    return FactorbaseLogs(mu=mu, mu_vec=[], thetas=thetas, method="file")
