"""Command line interface.

Exit codes: 0 success (or "similar"), 1 not similar / check failed, 2 usage
or I/O error, 3 mathematical precondition violated.  JSON results go to
stdout (or ``--output``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from .errors import GraphCanonError, InputError, PreconditionError, ShapeMismatch
from .numerics import DEFAULT_TOLERANCES, PAIR_TOLERANCES, ToleranceConfig, as_complex_matrix
from .oracles import random_similarity, random_unitary
from .pairs import canonical_pairs_equal, canonicalize_pair, is_g_canonical_pair
from .serialization import (
    SCHEMA_VERSION,
    decomposition_document,
    load_result,
    pair_residuals,
    pair_result_document,
    parse_matrix,
    serialize,
    unitary_residuals,
    unitary_result_document,
)
from .unitary import canonical_forms_equal, canonicalize_unitary, decompose, is_g_canonical

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_PRECONDITION = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # raise instead of exiting so cli_main can return the code
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol-eig", type=float, help="relative eigenvalue clustering radius")
    common.add_argument("--tol-zero", type=float, help="relative zero threshold")
    common.add_argument("--tol-residual", type=float, help="accepted backward error")
    common.add_argument("--seed", type=int, help="run a randomized self-check with this seed")
    common.add_argument("--output", "-o", help="write the JSON document here instead of stdout")
    common.add_argument("--quiet", "-q", action="store_true", help="no diagnostics on stderr")

    p = _Parser(prog="graphcanon", description="Canonical forms of nonderogatory matrices and matrix pairs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = sub.add_parser("canon", parents=[common], help="unitary canonical form of a matrix")
    c.add_argument("matrix")
    c = sub.add_parser("canon-pair", parents=[common], help="canonical form of a pair under similarity")
    c.add_argument("m")
    c.add_argument("n")
    c = sub.add_parser("similar", parents=[common], help="decide unitary similarity of two matrices")
    c.add_argument("a")
    c.add_argument("b")
    c = sub.add_parser("similar-pair", parents=[common], help="decide similarity of two pairs")
    for name in ("m1", "n1", "m2", "n2"):
        c.add_argument(name)
    c = sub.add_parser("decompose", parents=[common], help="split the canonical form into indecomposable parts")
    c.add_argument("matrix")
    c = sub.add_parser("check", parents=[common], help="re-verify a stored canonical result")
    c.add_argument("result")
    return p


def _tolerances(args, pair: bool) -> ToleranceConfig:
    base = PAIR_TOLERANCES if pair else DEFAULT_TOLERANCES
    try:
        tol = ToleranceConfig.from_env(base=base)
        return tol.with_overrides(tol_eig=args.tol_eig, tol_zero=args.tol_zero, tol_residual=args.tol_residual)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _matrix(path: str) -> np.ndarray:
    return as_complex_matrix(parse_matrix(_read(path)), square=True)


class _Session:
    def __init__(self, args):
        self.args = args

    def say(self, msg: str) -> None:
        if not self.args.quiet:
            print(msg, file=sys.stderr)

    def emit(self, doc: dict) -> None:
        text = serialize(doc)
        if self.args.output:
            with open(self.args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _check_residual(s: _Session, residuals: dict, tol: ToleranceConfig, label: str) -> None:
    worst = max(residuals.values())
    if worst > tol.tol_residual:
        s.say(f"warning: {label} residual {worst:.3e} exceeds tol_residual {tol.tol_residual:.1e}")


def _cmd_canon(s: _Session, tol: ToleranceConfig) -> int:
    m = _matrix(s.args.matrix)
    cr = canonicalize_unitary(m, tol)
    res = unitary_residuals(m, cr)
    _check_residual(s, res, tol, "similarity")
    doc = unitary_result_document(cr, tol, res)
    if s.args.seed is not None:
        u = random_unitary(m.shape[0], s.args.seed)
        same, reason = canonical_forms_equal(cr, canonicalize_unitary(u.conj().T @ m @ u, tol), _rtol(tol))
        doc["diagnostics"]["self_check"] = {"seed": s.args.seed, "passed": same, "reason": reason}
        s.say(f"self-check with seed {s.args.seed}: {reason}")
    s.emit(doc)
    return EXIT_OK


def _cmd_canon_pair(s: _Session, tol: ToleranceConfig) -> int:
    m, n_mat = _matrix(s.args.m), _matrix(s.args.n)
    if m.shape != n_mat.shape:
        raise ShapeMismatch(f"pair matrices have shapes {m.shape} and {n_mat.shape}")
    cpr = canonicalize_pair(m, n_mat, tol)
    res = pair_residuals(m, n_mat, cpr)
    doc = pair_result_document(cpr, tol, res)
    if s.args.seed is not None:
        sim = random_similarity(m.shape[0], s.args.seed)
        si = np.linalg.inv(sim)
        other = canonicalize_pair(si @ m @ sim, si @ n_mat @ sim, tol)
        same, reason = canonical_pairs_equal(cpr, other, max(_rtol(tol), 1e-7))
        doc["diagnostics"]["self_check"] = {"seed": s.args.seed, "passed": same, "reason": reason}
        s.say(f"self-check with seed {s.args.seed}: {reason}")
    s.emit(doc)
    return EXIT_OK


def _rtol(tol: ToleranceConfig) -> float:
    return max(tol.tol_zero, 1e-8)


def _verdict(s: _Session, kind: str, same: bool, reason: str) -> int:
    s.emit({"schema_version": SCHEMA_VERSION, "kind": kind, "similar": same, "reason": reason})
    s.say("similar" if same else f"not similar: {reason}")
    return EXIT_OK if same else EXIT_NO


def _cmd_similar(s: _Session, tol: ToleranceConfig) -> int:
    a, b = _matrix(s.args.a), _matrix(s.args.b)
    if a.shape != b.shape:
        return _verdict(s, "unitary-similarity", False, "different sizes")
    same, reason = canonical_forms_equal(canonicalize_unitary(a, tol), canonicalize_unitary(b, tol), _rtol(tol))
    return _verdict(s, "unitary-similarity", same, reason)


def _cmd_similar_pair(s: _Session, tol: ToleranceConfig) -> int:
    m1, n1, m2, n2 = (_matrix(getattr(s.args, k)) for k in ("m1", "n1", "m2", "n2"))
    for x, y in ((m1, n1), (m2, n2)):
        if x.shape != y.shape:
            raise ShapeMismatch(f"pair matrices have shapes {x.shape} and {y.shape}")
    if m1.shape != m2.shape:
        return _verdict(s, "pair-similarity", False, "different sizes")
    r1, r2 = canonicalize_pair(m1, n1, tol), canonicalize_pair(m2, n2, tol)
    same, reason = canonical_pairs_equal(r1, r2, max(_rtol(tol), 1e-7))
    return _verdict(s, "pair-similarity", same, reason)


def _cmd_decompose(s: _Session, tol: ToleranceConfig) -> int:
    cr = canonicalize_unitary(_matrix(s.args.matrix), tol)
    summands, perm = decompose(cr, tol)
    s.emit(decomposition_document(summands, perm, tol))
    s.say(f"{len(summands)} indecomposable summand(s)")
    return EXIT_OK


def _cmd_check(s: _Session, tol: ToleranceConfig) -> int:
    kind, f = load_result(_read(s.args.result))
    if kind == "unitary-canonical":
        ok = is_g_canonical(f["m_can"], f["partition"], f["g"], tol)
    else:
        ok = is_g_canonical_pair(f["lam"], f["b_can"], f["g"], tol)
    s.emit({"schema_version": SCHEMA_VERSION, "kind": "check", "checked": kind, "canonical": ok})
    s.say("canonical" if ok else "not canonical for the stored graph")
    return EXIT_OK if ok else EXIT_NO


_COMMANDS = {
    "canon": (_cmd_canon, False),
    "canon-pair": (_cmd_canon_pair, True),
    "similar": (_cmd_similar, False),
    "similar-pair": (_cmd_similar_pair, True),
    "decompose": (_cmd_decompose, False),
    "check": (_cmd_check, None),
}


def cli_main(argv=None) -> int:
    """Run one command and return its exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    s = _Session(args)
    func, pair = _COMMANDS[args.command]
    try:
        if pair is None:
            # a stored result records its own tolerances; flags still win
            pair = _result_is_pair(args.result)
        tol = _tolerances(args, pair)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = func(s, tol)
        for w in caught:
            s.say(f"warning: {w.message}")
        return code
    except _UsageError as exc:
        s.say(f"error: {exc}")
        return EXIT_USAGE
    except (InputError, OSError) as exc:
        s.say(f"error: {exc}")
        return EXIT_USAGE
    except PreconditionError as exc:
        s.say(f"precondition violated: {type(exc).__name__}: {exc}")
        return EXIT_PRECONDITION
    except GraphCanonError as exc:
        s.say(f"error: {type(exc).__name__}: {exc}")
        return EXIT_PRECONDITION


def _result_is_pair(path: str) -> bool:
    try:
        kind, _ = load_result(_read(path))
    except (GraphCanonError, OSError):
        return False
    return kind == "pair-canonical"


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
