import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from avgdyn.generate import ModelParams, gen_k_regular_clustered, gen_regular_sbm, generate
from avgdyn.exceptions import (
    DegenerateInputError,
    GraphParseError,
    InconsistencyError,
    ParameterError,
)
from avgdyn.graph import (
    ClusteredGraph,
    ExpectedMatrix,
    Graph,
    RegularityProfile,
    community_indicators,
    dumps_graph,
    expected_matrix,
    load_graph,
    loads_graph,
    partition_vector,
    save_graph,
    validate_clustered_regular,
    validate_gamma_clustered,
)


@pytest.fixture
def four_cycle():
    # V1 = {0, 1}, V2 = {2, 3}, edges 01, 23, 03, 12
    return ClusteredGraph.from_edges([(0, 1, 1), (2, 3, 1), (0, 3, 1), (1, 2, 1)], 2)


def test_four_cycle_basic(four_cycle):
    g = four_cycle
    assert g.num_nodes == 4 and g.num_communities == 2 and g.community_size == 2
    assert g.degrees.tolist() == [2, 2, 2, 2]
    assert g.truth.tolist() == [0, 0, 1, 1]
    assert g.num_edges == 4
    assert g.multiplicity(0, 3) == 1 and g.multiplicity(0, 2) == 0
    assert g.cross_degrees().tolist() == [1, 1, 1, 1]


def test_validate_regular_four_cycle(four_cycle):
    ok, bad = validate_clustered_regular(four_cycle, 2, 1)
    assert ok and bad == []
    ok, bad = validate_clustered_regular(four_cycle, 2, 2)
    assert not ok and bad == [0, 1, 2, 3]


def test_validate_regular_rejects_k3():
    g = gen_k_regular_clustered(ModelParams("k-regular-clustered", 4, 1, 1, k=3))
    with pytest.raises(ParameterError):
        validate_clustered_regular(g, 3, 1)
    with pytest.raises(ParameterError):
        partition_vector(g)


def test_validate_regular_on_regular_sbm():
    g = gen_regular_sbm(ModelParams("regular-sbm", 100, 6, 4, seed=5))
    assert validate_clustered_regular(g, 10, 4).ok


def test_gamma_regular_case(four_cycle):
    ok, gstar = validate_gamma_clustered(four_cycle, RegularityProfile(2, 1, 0.0))
    assert ok and gstar == 0.0


def test_gamma_star_graph():
    # star centered at 0 over 6 nodes, halves {0,1,2}, {3,4,5}
    edges = [(0, v, 1) for v in range(1, 6)]
    g = ClusteredGraph.from_edges(edges, 3)
    ok, gstar = validate_gamma_clustered(g, RegularityProfile(2, 1, 0.1))
    assert not ok
    # node 0: degree 5 against d=2 -> |5-2|/2; cross 3 against b=1 -> 1
    assert gstar == pytest.approx(1.5)


def test_gamma_rejects_bad_d(four_cycle):
    with pytest.raises(ParameterError):
        RegularityProfile(0, 0)
    with pytest.raises(ParameterError):
        RegularityProfile(2, 3)


def test_profile_nu():
    assert RegularityProfile(4, 1).nu == 0.5
    assert RegularityProfile(24, 4).nu == pytest.approx(2 / 3)


def test_expected_matrix_examples():
    assert np.array_equal(expected_matrix(1, 1, 0).toarray(), np.eye(2))
    B = expected_matrix(2, 2, 1)
    want = np.array([[1, 1, .5, .5], [1, 1, .5, .5], [.5, .5, 1, 1], [.5, .5, 1, 1]])
    assert np.array_equal(B.toarray(), want)
    chi = np.array([1.0, 1, -1, -1])
    np.testing.assert_allclose(want @ chi, 1.0 * chi)
    np.testing.assert_allclose(B @ chi, chi)


def test_expected_matrix_errors():
    with pytest.raises(ParameterError):
        expected_matrix(3, 4, 1)
    with pytest.raises(ParameterError):
        expected_matrix(3, 1, 2)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 100), data=st.data())
def test_expected_matrix_matvec_matches_dense(n, data):
    a = data.draw(st.floats(0, n))
    b = data.draw(st.floats(0, a))
    B = ExpectedMatrix(n, a, b)
    dense = B.toarray()
    x = np.random.default_rng(n).standard_normal((2 * n, 3))
    np.testing.assert_allclose(B @ x, dense @ x, atol=1e-10, rtol=0)
    np.testing.assert_allclose(dense.sum(axis=1), a + b, atol=1e-12)
    assert len(np.unique(dense)) <= 2


def test_partition_vector(four_cycle):
    chi = partition_vector(four_cycle)
    assert chi.tolist() == [1, 1, -1, -1]
    assert chi @ np.ones(4) == 0
    assert chi @ chi == 4


def test_community_indicators():
    g = gen_k_regular_clustered(ModelParams("k-regular-clustered", 4, 1, 1, k=3))
    ind = community_indicators(g)
    assert ind.shape == (12, 3)
    assert np.array_equal(ind.sum(axis=1), np.ones(12))
    assert np.array_equal(ind.sum(axis=0), [4, 4, 4])


def test_round_trip(tmp_path, four_cycle):
    p = tmp_path / "g.txt"
    save_graph(four_cycle, p)
    h = load_graph(p)
    assert h == four_cycle
    assert (h.adjacency != four_cycle.adjacency).nnz == 0


def test_round_trip_multigraph_with_loops():
    g = ClusteredGraph.from_edges([(0, 0, 2), (0, 1, 3), (1, 2, 1), (2, 3, 2), (3, 3, 1)], 2)
    assert g.degrees.tolist() == [5, 4, 3, 3]
    assert loads_graph(dumps_graph(g)) == g


def test_save_is_byte_deterministic(tmp_path):
    p = ModelParams("regular-sbm", 20, 4, 2, seed=9)
    save_graph(generate(p), tmp_path / "a.txt")
    save_graph(generate(p), tmp_path / "b.txt")
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()


def test_load_asymmetric_record():
    text = "4 2 2\n0 0 1 1\n0 1 1\n3 2 1\n"
    with pytest.raises(InconsistencyError):
        loads_graph(text)


def test_load_conflicting_records():
    text = "4 2 2\n0 0 1 1\n0 1 1\n1 0 2\n"
    with pytest.raises(InconsistencyError):
        loads_graph(text)


def test_load_reverse_pair_consistent():
    text = "4 2 2\n0 0 1 1\n0 1 1\n1 0 1\n"
    g = loads_graph(text)
    assert g.multiplicity(0, 1) == 1


def test_load_wrong_community_sizes():
    text = "6 2 3\n0 0 0 1 1 1\n"
    loads_graph(text)
    with pytest.raises(GraphParseError) as exc:
        loads_graph("5 2 3\n0 0 0 1 1\n")
    assert exc.value.lineno == 1
    with pytest.raises(GraphParseError) as exc:
        loads_graph("6 2 3\n# sizes 4 and 2\n0 0 0 0 1 1\n")
    assert exc.value.lineno == 3


def test_load_parse_errors_carry_line():
    with pytest.raises(GraphParseError) as exc:
        loads_graph("4 2 2\n0 0 1 1\n0 1\n")
    assert exc.value.lineno == 3 and "line 3" in str(exc.value)
    with pytest.raises(GraphParseError):
        loads_graph("4 2 2\n0 0 1 1\n0 9 1\n")
    with pytest.raises(GraphParseError):
        loads_graph("4 2 2\n0 0 1 1\n0 1 0\n")
    with pytest.raises(GraphParseError):
        loads_graph("")
    with pytest.raises(InconsistencyError):
        loads_graph("4 2 2\n0 1 0 1\n")


def test_graph_rejects_asymmetric():
    with pytest.raises(InconsistencyError):
        Graph(np.array([[0, 1], [0, 0]]))


def test_graph_is_immutable(four_cycle):
    with pytest.raises(ValueError):
        four_cycle.degrees[0] = 7
    with pytest.raises(ValueError):
        four_cycle.adjacency.data[0] = 7


def test_isolated_and_connectivity():
    g = ClusteredGraph.from_edges([(0, 1, 1)], 2)
    assert g.has_isolated_nodes()
    assert not g.is_connected()
    with pytest.raises(DegenerateInputError):
        g.require_no_isolated()


def test_transition_matrices(four_cycle):
    P = four_cycle.transition_matrix().toarray()
    np.testing.assert_allclose(P.sum(axis=1), 1.0)
    Nm = four_cycle.normalized_adjacency().toarray()
    np.testing.assert_allclose(Nm, Nm.T)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.sampled_from([10, 20, 40]))
def test_symmetry_and_degree_bookkeeping(seed, n):
    g = generate(ModelParams("bernoulli-sbm", n, n / 3, n / 6, seed=seed))
    rng = np.random.default_rng(seed)
    dense = g.toarray()
    us, vs = rng.integers(0, g.num_nodes, size=(2, 10_000))
    assert np.array_equal(dense[us, vs], dense[vs, us])
    assert np.array_equal(np.asarray(g.adjacency.sum(axis=1)).ravel(), g.degrees)
    assert partition_vector(g) @ np.ones(g.num_nodes) == 0


def test_probe_symmetry_regular_multigraph():
    g = generate(ModelParams("regular-sbm", 30, 6, 3, seed=1))
    rng = np.random.default_rng(0)
    for u, v in rng.integers(0, 60, size=(10_000, 2)):
        assert g.multiplicity(u, v) == g.multiplicity(v, u)


def test_from_sparse_and_equality():
    A = sp.csr_matrix(np.array([[0, 2, 0, 1], [2, 0, 1, 0], [0, 1, 0, 3], [1, 0, 3, 0]]))
    g = ClusteredGraph(A, 2)
    h = ClusteredGraph(A.toarray(), 2)
    assert g == h
    assert g != Graph(A)
    assert g.degrees.tolist() == [3, 3, 4, 4]
