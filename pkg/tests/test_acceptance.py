"""Acceptance criteria 1-12.

Each criterion is one test named ``test_criterion_NN_*``; ``conftest.py``
prints a PASS/FAIL line per criterion at the end of the run.  Instance
families are built once (cached) so that the forest-bound and
decomposition criteria can revisit every canonical result produced by the
others.
"""

import time
from functools import lru_cache
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest

from builders import (
    EX_PAIR_ONES,
    EX_TREE_EDGES,
    five_block_tree,
    five_vertex_pair,
    path_form,
    star_pair,
)
from graphcanon.cli import cli_main
from graphcanon.errors import CycleError
from graphcanon.forests import DiForest, Forest
from graphcanon.numerics import ToleranceConfig, max_norm
from graphcanon.oracles import (
    phase_match_oracle,
    random_diag_pair,
    random_nonderogatory,
    random_obser_form,
    random_phases,
    random_scales,
    random_similarity,
    random_unitary,
    rng_for,
    scale_match_oracle,
    trace_word_invariants,
)
from graphcanon.pairs import (
    DiagPair,
    canonical_pairs_equal,
    canonicalize_diag_pair,
    canonicalize_pair,
    decompose_pair,
    is_g_canonical_pair,
    reassemble_pair,
)
from graphcanon.triangularize import BlockPartition
from graphcanon.unitary import (
    canonical_forms_equal,
    canonicalize_unitary,
    decompose,
    is_g_canonical,
    reassemble,
    zero_blocks,
)

# Jordan blocks of size 3 split into eigenvalue clusters of relative width
# ~1e-5, so the mixed-partition families use a wider clustering radius.
MIXED = ToleranceConfig(tol_eig=1e-4)
SITE_ACCEPT = 60
FIXTURES = Path(__file__).parent / "fixtures"

CYCLE_ERRORS = []


def _canon(m, tol=ToleranceConfig()):
    try:
        return canonicalize_unitary(m, tol)
    except CycleError as exc:  # recorded for criterion 5, then re-raised
        CYCLE_ERRORS.append(exc)
        raise


def _conj(u, m):
    return u.conj().T @ m @ u


def _similar(s, m):
    return np.linalg.solve(s, m @ s)


def _free_entry_diff(r1, r2):
    return max_norm(r1.m_can - r2.m_can)


# instance families


@lru_cache(maxsize=None)
def family_1():
    out = []
    start = time.perf_counter()
    for seed in range(50):
        n = 2 + seed % 7
        a = path_form(n, seed)
        m = _conj(random_unitary(n, seed), a)
        out.append((a, _canon(m)))
    return out, time.perf_counter() - start


@lru_cache(maxsize=None)
def family_2():
    a, part = five_block_tree(2)
    cr = _canon(a)
    conjugates = [_canon(_conj(random_unitary(a.shape[0], 100 + k), a)) for k in range(20)]
    return a, part, cr, conjugates


def _mixed_sizes(rng, n):
    sizes = []
    while sum(sizes) < n:
        sizes.append(int(min(rng.integers(1, 4), n - sum(sizes))))
    return sizes


@lru_cache(maxsize=None)
def family_3():
    trials = []
    start = time.perf_counter()
    for seed in range(200):
        rng = rng_for(seed, SITE_ACCEPT)
        n = 2 + seed % 9
        sizes = _mixed_sizes(rng, n)
        fill = float(rng.choice([0.0, 0.3, 0.6, 1.0]))
        m = random_nonderogatory(sizes, fill, seed)
        m2 = _conj(random_unitary(n, seed + 10_000), m)
        trials.append((m, m2, _canon(m, MIXED), _canon(m2, MIXED)))
    return trials, time.perf_counter() - start


@lru_cache(maxsize=None)
def family_4():
    """20 obser forms over 4 shared partitions, plus 20 phase-perturbed clones.

    Even-numbered clones apply a genuine block-scalar unitary; odd-numbered
    clones rotate one off-diagonal block by a phase, which is realizable only
    when no other constraint fixes that block's phase.
    """
    partitions = [
        BlockPartition((1, 1, 1, 1), (-1, 0, 1j, 2)),
        BlockPartition((2, 1, 2), (0, 1 - 1j, 1 + 1j)),
        BlockPartition((1, 2, 1, 1, 1), (-2, -1, 0, 1, 2)),
        BlockPartition((1, 1, 1), (0, 1, 2)),
    ]
    bases = []
    for k in range(20):
        part = partitions[k % 4]
        fill = (0.3, 0.6, 1.0)[k % 3]
        bases.append((random_obser_form(part, fill, 400 + k), part))
    clones = []
    for k, (a, part) in enumerate(bases):
        d = np.repeat(random_phases(part.t, 500 + k), part.sizes)
        b = d.conj()[:, None] * a * d[None, :]
        if k % 2:
            nonzero = [
                (i, j)
                for i in range(1, part.t + 1)
                for j in range(i + 1, part.t + 1)
                if np.any(b[part.block(i), part.block(j)])
            ]
            if nonzero:
                i, j = nonzero[k % len(nonzero)]
                b[part.block(i), part.block(j)] *= np.exp(0.7j)
        clones.append((b, part))
    mats = bases + clones
    results = [_canon(a) for a, _ in mats]
    return mats, results


@lru_cache(maxsize=None)
def family_6():
    out = []
    for seed in range(50):
        n = 2 + seed % 7
        m, b = star_pair(n, seed)
        r = canonicalize_pair(m, b)
        conj = []
        for k in range(20):
            s = random_similarity(n, 1000 * seed + k, condition=1e3)
            conj.append(canonicalize_pair(_similar(s, m), _similar(s, b)))
        out.append((m, b, r, conj))
    return out


@lru_cache(maxsize=None)
def family_7():
    m, b = five_vertex_pair(3)
    r = canonicalize_pair(m, b)
    conj = []
    for k in range(20):
        s = random_similarity(5, 700 + k, condition=1e3)
        conj.append(canonicalize_pair(_similar(s, m), _similar(s, b)))
    return m, b, r, conj


@lru_cache(maxsize=None)
def family_8():
    trials = []
    start = time.perf_counter()
    for seed in range(200):
        rng = rng_for(seed, SITE_ACCEPT + 1)
        n = 2 + seed % 9
        m, b = random_diag_pair(n, float(rng.uniform(0.2, 1.0)), seed)
        # a unitary change of basis makes m non-diagonal without adding to
        # the conditioning budget, which the similarity s uses up in full
        v = random_unitary(n, seed, site=SITE_ACCEPT + 2)
        m, b = v @ m @ v.conj().T, v @ b @ v.conj().T
        s = random_similarity(n, seed + 20_000, condition=1e3)
        trials.append((b, canonicalize_pair(m, b), canonicalize_pair(_similar(s, m), _similar(s, b))))
    return trials, time.perf_counter() - start


@lru_cache(maxsize=None)
def family_9():
    """20 DiagPairs over 4 shared spectra, plus 20 scaled clones (odd ones with one entry perturbed)."""
    pairs = []
    for k in range(20):
        n = 3 + k % 4
        m, _ = random_diag_pair(n, 0.5, 800 + k % 4)
        _, b = random_diag_pair(n, (0.3, 0.5, 0.8)[k % 3], 900 + k)
        pairs.append((list(np.diag(m)), b))
    clones = []
    for k, (lam, b) in enumerate(pairs):
        n = len(lam)
        d = random_scales(n, 950 + k)
        b2 = (b / d[:, None]) * d[None, :]
        if k % 2:
            nz = np.argwhere((np.abs(b2) > 0) & ~np.eye(n, dtype=bool))
            if len(nz):
                p, q = nz[k % len(nz)]
                b2[p, q] *= 1.3
        clones.append((lam, b2))
    everything = pairs + clones
    results = [canonicalize_diag_pair(DiagPair(lam, b, np.eye(len(lam), dtype=complex))) for lam, b in everything]
    return everything, results


def all_unitary_results():
    out = [cr for _, cr in family_1()[0]]
    _, _, cr, conj = family_2()
    out += [cr, *conj]
    for _, _, r1, r2 in family_3()[0]:
        out += [r1, r2]
    out += family_4()[1]
    return out


def all_pair_results():
    out = []
    for _, _, r, conj in family_6():
        out += [r, *conj]
    _, _, r, conj = family_7()
    out += [r, *conj]
    for _, r1, r2 in family_8()[0]:
        out += [r1, r2]
    out += family_9()[1]
    return out


# criteria


def test_criterion_01_path_form_fixture():
    results, elapsed = family_1()
    for a, cr in results:
        t = a.shape[0]
        assert cr.g.edges == [(i, i + 1) for i in range(1, t)]
        assert cr.partition.sizes == (1,) * t
        assert np.all(np.tril(cr.m_can, -1) == 0)
        assert max_norm(cr.m_can - a) <= 1e-8 * max_norm(a)
    assert elapsed < 5.0, f"took {elapsed:.2f} s"


def test_criterion_02_five_block_tree_fixture():
    a, part, cr, conjugates = family_2()
    assert is_g_canonical(a, part, Forest(5, EX_TREE_EDGES))
    assert set(cr.g.edges) == EX_TREE_EDGES
    assert cr.partition.sizes == part.sizes
    assert max_norm(cr.m_can - a) <= 1e-8 * max_norm(a)
    again = _canon(cr.m_can)
    assert again.g.edges == cr.g.edges
    for other in conjugates:
        assert other.g.edges == cr.g.edges
        assert max_norm(other.m_can - a) <= 1e-8 * max_norm(a)


def test_criterion_03_unitary_invariance():
    trials, elapsed = family_3()
    failures = []
    for k, (m, _, r1, r2) in enumerate(trials):
        same = (
            r1.g.edges == r2.g.edges
            and r1.partition.sizes == r2.partition.sizes
            and zero_blocks(r1) == zero_blocks(r2)
            and r1.marked == r2.marked
            and _free_entry_diff(r1, r2) <= 1e-8 * max_norm(m)
        )
        if not same:
            failures.append((k, canonical_forms_equal(r1, r2)[1]))
    assert not failures, failures[:5]
    assert elapsed < 30.0, f"took {elapsed:.2f} s"


def test_criterion_04_phase_oracle_agreement():
    mats, results = family_4()
    disagreements = []
    counts = {True: 0, False: 0}
    for i, j in combinations(range(len(mats)), 2):
        (a, pa), (b, pb) = mats[i], mats[j]
        if pa == pb:
            oracle = phase_match_oracle(a, b, pa).equivalent
        else:
            oracle = False  # different block structure: not even similar
        ours = canonical_forms_equal(results[i], results[j])[0]
        counts[oracle] += 1
        if oracle != ours:
            disagreements.append((i, j, oracle, ours))
    assert sum(counts.values()) == 780
    assert counts[True] >= 10  # the family must exercise both verdicts
    assert not disagreements, disagreements[:5]


def test_criterion_05_forest_bound():
    results = all_unitary_results()
    assert not CYCLE_ERRORS
    for cr in results:
        assert len(cr.g.edges) <= cr.partition.t - 1
        Forest(cr.partition.t, cr.g.edges)  # rebuilding raises CycleError on a cycle


def test_criterion_06_star_fixture():
    for m, b, r, conj in family_6():
        n = m.shape[0]
        assert r.g.edges == [(1, q) for q in range(2, n + 1)]
        assert r.b_can[0, 0] == pytest.approx(b[0, 0], abs=1e-12 * max_norm(b))
        assert np.all(r.b_can[0, 1:] == 1)
        for other in conj:
            assert other.g.edges == r.g.edges and other.ones == r.ones
            assert max_norm(other.b_can - r.b_can) <= 1e-7 * max_norm(b)


def test_criterion_07_five_vertex_pair_fixture():
    m, b, r, conj = family_7()
    lam = list(np.diag(m))
    g = DiForest(5, [(2, 1), (1, 3), (4, 3), (1, 5)])
    assert is_g_canonical_pair(lam, b, g)
    assert set(r.g.edges) == set(g.edges) and set(r.ones) == EX_PAIR_ONES
    assert max_norm(r.b_can - b) <= 1e-12 * max_norm(b)
    for other in conj:
        assert other.g.edges == r.g.edges and other.ones == r.ones


def test_criterion_08_similarity_invariance():
    trials, elapsed = family_8()
    failures = []
    for k, (b, r1, r2) in enumerate(trials):
        if not (r1.g.edges == r2.g.edges and r1.ones == r2.ones):
            failures.append((k, "graph"))
        elif max_norm(r1.b_can - r2.b_can) > 1e-7 * max_norm(b):
            failures.append((k, f"entries {max_norm(r1.b_can - r2.b_can):.2e}"))
    assert not failures, failures[:5]
    assert elapsed < 30.0, f"took {elapsed:.2f} s"


def test_criterion_09_scale_oracle_agreement():
    pairs, results = family_9()
    disagreements = []
    counts = {True: 0, False: 0}
    for i, j in combinations(range(len(pairs)), 2):
        (lam1, b1), (lam2, b2) = pairs[i], pairs[j]
        if len(lam1) == len(lam2):
            oracle = scale_match_oracle(b1, b2, lam=lam1, lam2=lam2).equivalent
        else:
            oracle = False
        ours = canonical_pairs_equal(results[i], results[j])[0]
        counts[oracle] += 1
        if oracle != ours:
            disagreements.append((i, j, oracle, ours))
    assert sum(counts.values()) == 780
    assert counts[True] >= 10
    assert not disagreements, disagreements[:5]


def test_criterion_10_decomposition():
    for cr in all_unitary_results():
        summands, perm = decompose(cr)
        permuted = cr.m_can[np.ix_(perm, perm)]
        pos = 0
        for s in summands:
            k = s.matrix.shape[0]
            assert not np.any(permuted[pos : pos + k, pos + k :])
            assert not np.any(permuted[pos + k :, pos : pos + k])
            assert is_g_canonical(s.matrix, s.partition, s.tree, scale=cr.scale)
            pos += k
        assert np.array_equal(reassemble(summands, perm), cr.m_can)
    for r in all_pair_results():
        summands, perm = decompose_pair(r)
        permuted = r.b_can[np.ix_(perm, perm)]
        pos = 0
        for lam_i, b_i, tree_i, _ in summands:
            k = len(lam_i)
            assert not np.any(permuted[pos : pos + k, pos + k :])
            assert not np.any(permuted[pos + k :, pos : pos + k])
            assert is_g_canonical_pair(lam_i, b_i, tree_i, scale=r.scale)
            pos += k
        lam, b = reassemble_pair(summands, perm)
        assert np.array_equal(b, r.b_can) and np.array_equal(lam, np.array(r.lam))


def test_criterion_11_trace_words():
    checked = 0
    for m, m2, r1, r2 in family_3()[0]:
        if m.shape[0] > 4 or not canonical_forms_equal(r1, r2)[0]:
            continue
        w1 = trace_word_invariants(m, 6)
        w2 = trace_word_invariants(m2, 6)
        bound = 1e-6 * max(1.0, max_norm(m) ** 6)
        assert [w for w, _ in w1] == [w for w, _ in w2]
        assert max(abs(x - y) for (_, x), (_, y) in zip(w1, w2)) <= bound
        checked += 1
        if checked == 50:
            break
    assert checked == 50


@pytest.mark.parametrize("phase", ["derogatory", "repeated", "malformed"])
def test_criterion_12_exit_codes(phase, capsys):
    cases = {
        "derogatory": (3, [["canon", FIXTURES / f] for f in (
            "derogatory_diag.json", "derogatory_two_jordan_blocks.json", "derogatory_scalar.json")]),
        "repeated": (3, [["canon-pair", FIXTURES / m, FIXTURES / n] for m, n in (
            ("repeated_identity_m.json", "pair_n3.json"),
            ("repeated_jordan_m.json", "pair_n2.json"),
            ("repeated_conjugated_m.json", "pair_n3.json"))]),
        "malformed": (2, [["canon", FIXTURES / f] for f in (
            "malformed_truncated.json", "malformed_trailing_comma.json", "malformed_not_json.json")]),
    }
    expected, argvs = cases[phase]
    for argv in argvs:
        assert cli_main([str(x) for x in argv]) == expected
    capsys.readouterr()
