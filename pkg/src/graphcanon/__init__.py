"""Canonical forms for nonderogatory matrices under unitary similarity and
for matrix pairs ``(M, N)`` with ``M`` diagonalizable with distinct
eigenvalues under simultaneous similarity.

Typical use::

    from graphcanon import canonicalize_unitary, canonical_forms_equal
    r1 = canonicalize_unitary(a)
    r2 = canonicalize_unitary(b)
    same, reason = canonical_forms_equal(r1, r2)
"""

from .errors import *  # noqa: F401,F403
from .forests import DiForest, Forest, LabeledUnionFind, PathStep
from .numerics import (
    DEFAULT_TOLERANCES,
    PAIR_TOLERANCES,
    Cluster,
    ToleranceConfig,
    approx_zero,
    cluster_values,
    lex_compare,
)
from .oracles import (
    OracleVerdict,
    phase_match_oracle,
    random_diag_pair,
    random_nonderogatory,
    random_obser_form,
    random_similarity,
    random_unitary,
    scale_match_oracle,
    trace_word_invariants,
)
from .pairs import (
    CanonicalPairResult,
    DiagPair,
    IllConditionedWarning,
    canonical_pairs_equal,
    canonicalize_diag_pair,
    canonicalize_pair,
    decompose_pair,
    diagonalize_distinct,
    is_g_canonical_pair,
    reassemble_pair,
    to_diag_pair,
)
from .serialization import matrix_document, parse_matrix, serialize, serialize_matrix
from .triangularize import (
    BlockPartition,
    ObserForm,
    SchurForm,
    block_partition_of,
    is_nonderogatory,
    obser_form,
    positivize_superdiagonal,
    schur_ordered,
    sorted_eigenvalues,
)
from .unitary import (
    CanonicalBlockSummand,
    CanonicalResult,
    canonical_forms_equal,
    canonicalize_obser,
    canonicalize_unitary,
    decompose,
    is_g_canonical,
    obss_reduce,
    reassemble,
)

__version__ = "0.1.0"
