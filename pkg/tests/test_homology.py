import numpy as np
import pytest
from oracles import all_complexes, betti_oracle

from multibubble.errors import ClosureError, InconsistencyError, UnderdeterminedError
from multibubble.homology import (EdgeNormalAssignment, IncidenceComplex, build_complex,
                                  fundamental_cycle_violation, homology_ranks, rank_rational, recover_B)
from multibubble.pullback import PullbackCluster, simplicial_cluster
from multibubble.simplex import e_basis


@pytest.mark.parametrize("q", [1, 2, 3, 4, 5])
def test_exhaustive_against_gf2_oracle(q):
    count = 0
    for V, E, T in all_complexes(q):
        assert homology_ranks(IncidenceComplex(V, E, T)) == betti_oracle(V, E, T)
        count += 1
    assert count == {1: 1, 2: 2, 3: 9, 4: 113, 5: 6212}[q]


def test_named_complexes():
    full = IncidenceComplex.from_json({"q": 4, "edges": [[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]],
                                       "triangles": [[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]]})
    assert homology_ranks(full) == (1, 0)
    hollow = IncidenceComplex.from_json({"q": 3, "edges": [[1, 2], [2, 3], [1, 3]]})
    assert homology_ranks(hollow) == (1, 1)
    # boundary of a tetrahedron is a sphere: b1 = 0 even without the 3-cell
    assert homology_ranks(IncidenceComplex(full.vertices, full.edges, full.triangles)) == (1, 0)
    assert homology_ranks(IncidenceComplex.from_json({"q": 3})) == (3, 0)


def test_closure_violations():
    with pytest.raises(ClosureError):
        IncidenceComplex.from_json({"q": 3, "triangles": [[1, 2, 3]]})
    with pytest.raises(ClosureError):
        IncidenceComplex.from_json({"q": 2, "edges": [[1, 3]]})
    with pytest.raises(ClosureError):
        IncidenceComplex.from_json({"edges": []})
    with pytest.raises(ClosureError):
        IncidenceComplex(frozenset({0, 1}), frozenset({(0, 0)}), frozenset())


def test_json_roundtrip():
    S = IncidenceComplex(frozenset(range(4)), frozenset({(0, 1), (1, 2), (0, 2), (2, 3)}), frozenset({(0, 1, 2)}))
    assert IncidenceComplex.from_json(S.to_json()) == S


def test_boundary_of_boundary_vanishes():
    S = IncidenceComplex.from_json({"q": 4, "edges": [[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]],
                                    "triangles": [[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]]})
    d1, d2 = S.boundary_matrices()
    assert not np.any(d1 @ d2)


def test_rank_rational_exact():
    M = np.array([[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    assert rank_rational(M) == np.linalg.matrix_rank(M) == 2
    assert rank_rational(np.zeros((3, 2), dtype=int)) == 0


@pytest.mark.parametrize("q,n", [(2, 1), (3, 2), (4, 3), (4, 5), (5, 4)])
def test_simplicial_complexes_are_complete(q, n):
    rng = np.random.default_rng(q * n)
    lam = 0.3 * rng.standard_normal(q)
    S = build_complex(simplicial_cluster(q, n, lam=lam - lam.mean()))
    assert len(S.edges) == q * (q - 1) // 2
    assert len(S.triangles) == q * (q - 1) * (q - 2) // 6
    assert homology_ranks(S) == (1, 0)


def test_line_cluster_complex():
    C = PullbackCluster(np.array([[-1.0, 0.0, 1.0]]), np.array([0.5, -1.0, 0.5]))
    S = build_complex(C)
    assert S.edges == {(0, 1), (1, 2)} and not S.triangles
    assert homology_ranks(S) == (1, 0)


@pytest.mark.parametrize("q,n", [(3, 2), (4, 3), (5, 6)])
def test_recover_B_on_simplicial_normals(q, n):
    C = simplicial_cluster(q, n)
    edges = [(i, j) for i in range(q) for j in range(i + 1, q)]
    rec = recover_B(q, EdgeNormalAssignment.from_cluster(C, edges))
    assert rec.residual <= 1e-8 and rec.cycle_violation <= 1e-12
    U = e_basis(q)
    np.testing.assert_allclose(2 * U.T @ rec.B.T @ rec.B @ U, np.eye(q - 1), atol=1e-8)
    np.testing.assert_allclose(rec.B, C.B, atol=1e-12)


def test_recover_B_respects_complex():
    C = simplicial_cluster(3, 2)
    S = IncidenceComplex.from_json({"q": 3, "edges": [[1, 2]]})
    normals = EdgeNormalAssignment.from_cluster(C, [(0, 1), (1, 2)])
    with pytest.raises(ClosureError):
        recover_B(S, normals)
    with pytest.raises(UnderdeterminedError):
        recover_B(3, EdgeNormalAssignment.from_cluster(C, [(0, 1)]))


def test_cycle_condition():
    t = np.array([1.0, 0.0])
    # n_01 + n_12 + n_20 = t + t - t misses closing up by |t| = 1
    assert fundamental_cycle_violation(3, EdgeNormalAssignment({(0, 1): t, (1, 2): t, (0, 2): t})) == \
        pytest.approx(1.0)
    bad = EdgeNormalAssignment({(0, 1): t, (1, 2): np.array([0.0, 1.0]), (0, 2): -t})
    with pytest.raises(InconsistencyError):
        recover_B(3, bad)
    assert EdgeNormalAssignment({(2, 0): t})[(0, 2)] @ t == pytest.approx(-1.0)


def test_normals_must_be_antisymmetric_units():
    with pytest.raises(ValueError):
        EdgeNormalAssignment({(0, 1): np.array([2.0, 0.0])})
    with pytest.raises(ValueError):
        EdgeNormalAssignment({(0, 1): np.array([1.0, 0.0]), (1, 0): np.array([1.0, 0.0])})
    a = EdgeNormalAssignment({(0, 1): np.array([1.0, 0.0]), (1, 0): np.array([-1.0, 0.0])})
    np.testing.assert_array_equal(a[(1, 0)], [-1.0, 0.0])
