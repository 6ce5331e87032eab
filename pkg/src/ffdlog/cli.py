"""Command-line driver: deterministic, file-based pipeline stages.

Each command reads its predecessor's outputs from --out-dir and appends a
stage record (file digest, timing) to manifest.json, so a run can be audited
and replayed byte for byte. Exit codes: 0 success, 1 usage/missing input,
2 heuristic or obstruction failure.
"""

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import polyarith as pa
from .bruteforce import find_obstructed_candidate, obstruction_probe, verify_pipeline
from .descent import DescentError, dlog, full_descent, make_context, trace_to_text
from .fbsolve import ObstructionError, algII_solve, factorbase_logs, logs_to_text
from .fq2 import build_standalone, build_tower, tower_from_text, tower_to_text
from .intlinalg import RankDeficiencyError, decomposition_to_text, modsplit_to_text, snf
from .relations import (enumerate_cosets, factorbase, generate_all,
                        matrix_from_text, matrix_to_text, try_relation)
from .selection import (SelectionError, search_good, setup_from_text,
                        setup_to_text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


class Stages:
    def __init__(self, out_dir: str):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.dir / "manifest.json"
        if self.manifest_path.exists():
            self.manifest = json.loads(self.manifest_path.read_text())
        else:
            self.manifest = {"params": {}, "stages": {}}

    def write(self, name: str, filename: str, text: str, seconds: float):
        path = self.dir / filename
        path.write_text(text)
        self.manifest["stages"][name] = {
            "file": filename,
            "sha256": _digest(path),
            "seconds": round(seconds, 3),
        }
        self.manifest_path.write_text(json.dumps(self.manifest, indent=1, sort_keys=True))

    def read(self, filename: str) -> str:
        path = self.dir / filename
        if not path.exists():
            sys.stderr.write(f"error: missing stage file {path}; run the earlier stage\n")
            sys.exit(1)
        return path.read_text()

    def record_params(self, args):
        for key in ("p", "e", "n", "m", "C", "D", "seed", "coset_mode",
                    "samples", "threads", "retry_budget"):
            val = getattr(args, key, None)
            if val is not None:
                self.manifest["params"][key] = val


def _load_setup(st: Stages):
    return setup_from_text(st.read("setup.txt"))


def cmd_setup(args, st: Stages):
    t0 = time.time()
    if args.n is not None:
        tower = build_tower(args.p, args.n)
    else:
        if args.e is None or args.m is None:
            sys.stderr.write("error: setup needs --n or both --e and --m\n")
            return 1
        tower = build_standalone(args.p, args.e, args.m)
    st.record_params(args)
    st.write("setup", "tower.txt", tower_to_text(tower), time.time() - t0)
    print(f"tower: p={tower.p} q={tower.q} m={tower.m}")
    return 0


def cmd_select(args, st: Stages):
    tower = tower_from_text(st.read("tower.txt"))
    t0 = time.time()
    try:
        setup = search_good(tower, args.C, args.D)
    except SelectionError as exc:
        sys.stderr.write(f"selection failed: {exc}\n")
        return 2
    st.record_params(args)
    st.write("select", "setup.txt", setup_to_text(setup), time.time() - t0)
    print(f"good h found: deg(h)={pa.deg(setup.h)} v={setup.v} L={setup.L}")
    return 0


def cmd_relgen(args, st: Stages):
    setup = _load_setup(st)
    t0 = time.time()
    cosets = enumerate_cosets(
        setup.K, mode=args.coset_mode, sample_count=args.samples, seed=args.seed
    )
    if args.threads > 1:
        fb = factorbase(setup)
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(lambda rep: try_relation(rep, setup, fb), cosets))
        keep = [rep for rep, row in zip(cosets, rows) if row is not None]
        mat = generate_all(setup, cosets=keep)
    else:
        mat = generate_all(setup, cosets=cosets)
    st.record_params(args)
    st.write("relgen", "relations.txt", matrix_to_text(setup, mat), time.time() - t0)
    print(f"relations: {len(mat.rows)} rows over {mat.ncols} columns "
          f"({mat.duplicates} duplicates)")
    return 0


def cmd_solve(args, st: Stages):
    setup = _load_setup(st)
    mat = matrix_from_text(setup, st.read("relations.txt"))
    t0 = time.time()
    dec = snf([r[:] for r in mat.rows], track_left=False)
    try:
        logs = factorbase_logs(dec, setup)
        res2 = algII_solve(mat, setup)
    except (ObstructionError, RankDeficiencyError) as exc:
        sys.stderr.write(f"obstruction: {exc}\n")
        return 2
    elapsed = time.time() - t0
    st.write("solve.decomposition", "decomposition.txt",
             decomposition_to_text(dec), elapsed)
    st.write("solve.modsplit", "modsplit.txt", modsplit_to_text(res2.split), 0.0)
    st.write("solve", "logs.txt", logs_to_text(setup, logs), elapsed)
    print(f"factorbase logs solved for {setup.fb_size} columns "
          f"(algII blocks: {res2.split.factors or 'trivial'})")
    return 0


def cmd_descend(args, st: Stages):
    setup = _load_setup(st)
    target = pa.poly_from_text(setup.K, args.target)
    ctx = make_context(setup, seed=args.seed, retry_budget=args.retry_budget)
    t0 = time.time()
    try:
        vec = full_descent(target, setup, ctx)
    except (DescentError, ValueError) as exc:
        sys.stderr.write(f"descent failed: {exc}\n")
        return 2
    fb = factorbase(setup)
    expr = " ".join(f"{fb.label(i)}^{e}" for i, e in enumerate(vec) if e)
    text = trace_to_text(setup, ctx) + f"result {expr or '1'}\n"
    st.record_params(args)
    st.write("descend", "descent.txt", text, time.time() - t0)
    print(f"descent complete: {len(ctx.trace)} nodes; expression {expr or '1'}")
    return 0


def cmd_dlog(args, st: Stages):
    setup = _load_setup(st)
    mat = matrix_from_text(setup, st.read("relations.txt"))
    K = setup.K
    gamma = pa.poly_from_text(K, args.gamma)
    eta = pa.poly_from_text(K, args.eta)
    dec = snf([r[:] for r in mat.rows], track_left=False)
    try:
        logs = factorbase_logs(dec, setup)
        ctx = make_context(setup, seed=args.seed, retry_budget=args.retry_budget)
        x = dlog(gamma, eta, setup, logs, dec, ctx)
    except (ObstructionError, DescentError, RankDeficiencyError) as exc:
        sys.stderr.write(f"dlog failed: {exc}\n")
        return 2
    if x is None:
        print("none (gamma is not in the subgroup generated by eta)")
    else:
        print(x)
    return 0


def cmd_verify(args, st: Stages):
    setup = _load_setup(st)
    relmat = None
    if (st.dir / "relations.txt").exists():
        relmat = matrix_from_text(setup, st.read("relations.txt"))
    try:
        ok, report = verify_pipeline(setup, relmat=relmat,
                                     dlog_pairs=args.pairs, seed=args.seed)
    except (ObstructionError, DescentError) as exc:
        sys.stderr.write(f"verification aborted: {exc}\n")
        return 2
    for line in report:
        print(line)
    return 0 if ok else 2


def cmd_probe(args, st: Stages):
    tower = tower_from_text(st.read("tower.txt"))
    K = tower.field
    if args.h0 and args.h1:
        h0 = pa.poly_from_text(K, args.h0)
        h1 = pa.poly_from_text(K, args.h1)
    else:
        found = find_obstructed_candidate(tower, args.C, args.D)
        if found is None:
            print("no obstructed candidate of the special form within bounds")
            return 0
        h0, h1 = found
    report = obstruction_probe(h0, h1, tower, args.C)
    text = report.text()
    st.write("probe", "probe.txt", text, 0.0)
    print(text, end="")
    return 2 if report.obstructed else 0


def main(argv=None) -> int:
    parser = _Parser(prog="ffdlog", description=__doc__)
    parser.add_argument("--out-dir", default="ffdlog-run")
    sub = parser.add_subparsers(dest="command", required=True)

    p_setup = sub.add_parser("setup", help="build the tower")
    p_setup.add_argument("--p", type=int, required=True)
    p_setup.add_argument("--e", type=int)
    p_setup.add_argument("--m", type=int)
    p_setup.add_argument("--n", type=int, help="embedding mode target degree")

    p_select = sub.add_parser("select", help="search a good h")
    p_select.add_argument("--C", type=int, default=2)
    p_select.add_argument("--D", type=int, default=3)

    p_rel = sub.add_parser("relgen", help="generate relation rows")
    p_rel.add_argument("--coset-mode", dest="coset_mode", default="auto",
                       choices=["auto", "exhaustive", "sampled"])
    p_rel.add_argument("--samples", type=int, default=None)
    p_rel.add_argument("--seed", type=int, default=0)
    p_rel.add_argument("--threads", type=int, default=1)

    p_solve = sub.add_parser("solve", help="factorbase logs via both solvers")

    p_desc = sub.add_parser("descend", help="descend a target polynomial")
    p_desc.add_argument("--target", required=True)
    p_desc.add_argument("--seed", type=int, default=0)
    p_desc.add_argument("--retry-budget", dest="retry_budget", type=int, default=5)

    p_dlog = sub.add_parser("dlog", help="log of gamma base eta")
    p_dlog.add_argument("--gamma", required=True)
    p_dlog.add_argument("--eta", required=True)
    p_dlog.add_argument("--seed", type=int, default=0)
    p_dlog.add_argument("--retry-budget", dest="retry_budget", type=int, default=5)

    p_verify = sub.add_parser("verify", help="brute-force pipeline verification")
    p_verify.add_argument("--pairs", type=int, default=5)
    p_verify.add_argument("--seed", type=int, default=0)

    p_probe = sub.add_parser("probe", help="obstruction probe for a candidate h")
    p_probe.add_argument("--h0", default=None)
    p_probe.add_argument("--h1", default=None)
    p_probe.add_argument("--C", type=int, default=1)
    p_probe.add_argument("--D", type=int, default=3)

    args = parser.parse_args(argv)
    st = Stages(args.out_dir)
    handlers = {
        "setup": cmd_setup, "select": cmd_select, "relgen": cmd_relgen,
        "solve": cmd_solve, "descend": cmd_descend, "dlog": cmd_dlog,
        "verify": cmd_verify, "probe": cmd_probe,
    }
    return handlers[args.command](args, st)


if __name__ == "__main__":
    sys.exit(main())
