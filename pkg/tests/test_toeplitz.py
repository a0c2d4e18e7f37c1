import random

import pytest

from corpus import corpus, family_graphs, kernel_triples, relative_witness_cases
from terms import random_element
from graphk.graph import AdmissiblePair, Graph, RelativeGraph, family_e, family_f, quotient_relative_graph
from graphk.toeplitz import (
    AlgMatrix,
    Element,
    NotInKernel,
    adjoint,
    build_VP,
    build_VPU,
    foureqs_report,
    gap_residue,
    index_oracle,
    index_sets,
    multiply,
    verify_foureqs,
    verify_partial_isometry,
    witness_index,
)

LOOP = Graph(["v"], {("v", "v"): 1})
E_LOOP = ("v", "v", 1)


# -- products ---------------------------------------------------------------------------


def test_multiply_examples():
    e, f, loop = ("v", "w", 1), ("v", "w", 2), ("w", "w", 1)
    assert Element.s_star(e) * Element.s(e) == Element.p("w")
    assert multiply(Element.s_star(e), Element.s(f)) == 0
    assert Element.p("v") * Element.p("w") == 0
    assert Element.s(e) * Element.p("w") == Element.s(e)
    # (s_a s_b^*)(s_b s_d^*) = s_a s_d^*
    a, b, d = ("v", (e, loop)), ("v", (e,)), ("v", (f,))
    assert Element.monomial(a, ("w", (loop,))) * Element.monomial(("w", (loop,)), b) == Element.monomial(a, b)
    assert Element.monomial(a, b) * Element.monomial(b, d) == Element.monomial(a, d)
    # prefix cases extend one side
    assert Element.monomial(b, b) * Element.monomial(a, a) == Element.monomial(a, a)
    assert Element.monomial(a, a) * Element.monomial(b, b) == Element.monomial(a, a)


def test_adjoint_examples():
    assert adjoint(Element.s(E_LOOP)) == Element.s_star(E_LOOP)
    assert Element.p("v").adjoint() == Element.p("v")
    a, b = ("v", (E_LOOP, E_LOOP)), ("v", (E_LOOP,))
    assert Element.monomial(a, b, 2).adjoint() == Element.monomial(b, a, 2)


def test_monomial_rejects_mismatched_ranges():
    with pytest.raises(ValueError):
        Element.monomial(("v", (("v", "w", 1),)), ("v", ()))


def test_random_associativity_and_adjoint():
    rng = random.Random(41)
    graphs = [
        Graph(["v"], {("v", "v"): 2}),
        Graph.from_matrix([[1, 1], [1, 0]]),
        Graph.from_matrix([[0, 2, 1], [1, 0, 1], [1, 1, 0]]),
    ]
    nonzero = 0
    for _ in range(400):
        g = rng.choice(graphs)
        a, b, c = (random_element(rng, g) for _ in range(3))
        assert (a * b) * c == a * (b * c)
        assert (a * b).adjoint() == b.adjoint() * a.adjoint()
        assert (a + b) * c == a * c + b * c
        nonzero += bool(a * b * c)
    assert nonzero > 50


def test_algmatrix_product_matches_entrywise():
    rng = random.Random(2)
    g = Graph.from_matrix([[1, 1], [1, 0]])
    for _ in range(30):
        m = AlgMatrix(2, {(i, j): random_element(rng, g, 2) for i in range(2) for j in range(2)})
        n = AlgMatrix(2, {(i, j): random_element(rng, g, 2) for i in range(2) for j in range(2)})
        prod = m * n
        for i in range(2):
            for j in range(2):
                assert prod[i, j] == m[i, 0] * n[0, j] + m[i, 1] * n[1, j]
        assert prod.adjoint() == n.adjoint() * m.adjoint()


# -- witnesses ----------------------------------------------------------------------------


def test_witness_loop():
    w = witness_index(RelativeGraph.full(LOOP), [1])
    assert w.upindex == (("v", 1),)
    assert w.downindex == ((E_LOOP, 1),)
    assert w.h == 1 and w.check_goodchoice()


def test_witness_zero_vector():
    rg = RelativeGraph.full(LOOP)
    w = witness_index(rg, [0])
    assert w.h == 0 and w.upindex == w.downindex == ()
    V, P = build_VP(rg, w)
    assert V.size == P.size == 0
    assert verify_foureqs(rg, w, V, P)
    assert gap_residue(rg, w, V, P) == [0]


def test_witness_family_e_quotient():
    rq = quotient_relative_graph(family_e(2, 1, 0), AdmissiblePair({"v1"}))
    w = witness_index(rq, [1, 0, -1])
    # (v2,1) plus one index per edge out of v4
    assert w.h == 3
    assert sum(1 for item, _ in w.upindex if isinstance(item, str)) == 1
    assert w.check_goodchoice()


def test_witness_rejects_non_kernel_vectors():
    rg = RelativeGraph.full(family_e(3, 1, 1))
    with pytest.raises(NotInKernel):
        witness_index(rg, [1, 0, 0])
    with pytest.raises(NotInKernel):
        witness_index(rg, {"v1": 1})


def test_loop_VPU():
    rg = RelativeGraph.full(LOOP)
    w = witness_index(rg, [1])
    V, P, U = build_VPU(rg, w)
    assert V[0, 0] == Element.s(E_LOOP)
    assert P[0, 0] == Element.p("v")
    assert U[0, 0] == Element.s(E_LOOP)
    assert all(verify_partial_isometry(V, P).values())
    assert (V * V.adjoint())[0, 0] == Element.range_projection(E_LOOP)
    assert verify_foureqs(rg, w, V, P)
    assert gap_residue(rg, w, V, P) == [1]


def expected_counts(rg, x):
    """Per-vertex sizes of the up and down range classes, straight from the adjacency matrix."""
    g = rg.graph
    up, down = {}, {}
    for v in g.vertices:
        up[v] = max(x.get(v, 0), 0) + sum(max(-x.get(w, 0), 0) * g.mult(w, v) for w in x)
        down[v] = max(-x.get(v, 0), 0) + sum(max(x.get(w, 0), 0) * g.mult(w, v) for w in x)
    return up, down


def test_matchup_and_equal_counts():
    cases = 0
    for rg, x in relative_witness_cases(corpus()):
        xd = dict(zip(rg.relset_ordered, x))
        up, down = index_sets(rg, {v: c for v, c in xd.items() if c})
        want_up, want_down = expected_counts(rg, xd)
        for v in rg.graph.vertices:
            got_up = sum(1 for item, _ in up if (item if isinstance(item, str) else item[1]) == v)
            got_down = sum(1 for item, _ in down if (item if isinstance(item, str) else item[1]) == v)
            assert (got_up, got_down) == (want_up[v], want_down[v])
            assert got_up == got_down
        assert len(up) == len(down)
        cases += 1
    assert cases > 100


def test_identities_on_corpus_witnesses():
    for rg, x in relative_witness_cases(corpus()[::3]):
        w = witness_index(rg, x)
        V, P = build_VP(rg, w)
        assert all(foureqs_report(rg, w, V, P).values())
        assert all(verify_partial_isometry(V, P).values())
        assert gap_residue(rg, w, V, P) == list(x)


def test_residue_independent_of_pairing():
    rng = random.Random(99)
    for rg, x in list(relative_witness_cases(family_graphs()))[:25]:
        for _ in range(10):
            w = witness_index(rg, x, rng=rng)
            assert w.check_goodchoice()
            V, P = build_VP(rg, w)
            assert verify_foureqs(rg, w, V, P)
            assert gap_residue(rg, w, V, P) == list(x)


# -- the index map ------------------------------------------------------------------------


def test_oracle_family_e():
    for x, y, z in [(3, 1, 1), (0, 2, 4), (2, 2, 2)]:
        res = index_oracle(family_e(x, y, z), AdmissiblePair({"v1"}), [1, 0, -1])
        assert res.vector == [x - z]


def test_oracle_family_f_at_four():
    for y in range(1, 4):
        res = index_oracle(family_f(y, 4), AdmissiblePair({"v1"}, {"v3"}), [-2, 1])
        assert res.vector == [-2 * y, 1]


def test_oracle_zero_vector():
    res = index_oracle(family_f(2, 4), AdmissiblePair({"v1"}, {"v3"}), [0, 0])
    assert res.witness.h == 0 and res.vector == [0, 0]


def test_oracle_matches_matrix_on_sample():
    count = 0
    for g, p, seq, x in kernel_triples(corpus()[::4]):
        res = index_oracle(g, p, x)
        assert seq.K0_ideal.equal(res.vector, seq.decomposition.partial1_matrix().apply(x))
        count += 1
    assert count > 30
