import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from bogomolov.intlattice import (AbelianType, LatticeAccumulator, abelian_type, determinant,
                                  hermite_normal_form, in_lattice, inverse_unimodular,
                                  lattice_basis, matmul, quotient_invariants, smith_normal_form,
                                  xgcd)


def g9_tail_matrix(p):
    return [[0, 0, 1, 0, 0, 0, 0, p, 0, 0, 0],
            [0, 0, 0, 1, 0, 0, 0, 0, p, 0, 0],
            [0, 0, 0, 0, 1, 0, 0, 0, 0, p, 0],
            [0, 0, 0, 0, 1, 0, 0, 0, 0, 0, p]]


def naive_invariants(M, cols):
    """Reference elementary divisors: diagonalize using only row t and column t
    pivots, then repair divisibility with gcd/lcm on the diagonal."""
    A = [list(r) for r in M]
    m, n = len(A), cols
    diag = []
    for t in range(min(m, n)):
        while True:
            cand = [(abs(A[i][t]), i, t) for i in range(t, m) if A[i][t]]
            cand += [(abs(A[t][j]), t, j) for j in range(t, n) if A[t][j]]
            if not cand:
                rest = [(i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
                if not rest:
                    break
                i, j = rest[0]
            else:
                _, i, j = min(cand)
            A[t], A[i] = A[i], A[t]
            for r in A:
                r[t], r[j] = r[j], r[t]
            piv = A[t][t]
            for i in range(t + 1, m):
                q = A[i][t] // piv
                A[i] = [x - q * y for x, y in zip(A[i], A[t])]
            for j in range(t + 1, n):
                q = A[t][j] // piv
                for r in A:
                    r[j] -= q * r[t]
            if not any(A[i][t] for i in range(t + 1, m)) and not any(A[t][t + 1:]):
                break
        if A[t][t] == 0:
            break
        diag.append(abs(A[t][t]))
    for a in range(len(diag)):
        for b in range(a + 1, len(diag)):
            x, y = diag[a], diag[b]
            g = math.gcd(x, y)
            diag[a], diag[b] = g, x * y // g
    return diag


def determinantal_divisors(M):
    m, n = len(M), len(M[0])
    out, prev = [], 1
    for k in range(1, min(m, n) + 1):
        g = 0
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                g = math.gcd(g, determinant([[M[i][j] for j in cols] for i in rows]))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


def check_decomposition(M, cols):
    D = smith_normal_form(M, cols)
    assert matmul(matmul(D.P, M), D.Q) == D.S
    assert abs(determinant(D.P)) == 1 and abs(determinant(D.Q)) == 1
    for i, row in enumerate(D.S):
        for j, x in enumerate(row):
            assert x == 0 or i == j
    d = [x for x in D.diagonal if x]
    assert all(x > 0 for x in d)
    assert all(b % a == 0 for a, b in zip(d, d[1:]))
    return d


def random_matrix(rng, max_size=8, lo=-9, hi=9):
    m, n = rng.randint(1, max_size), rng.randint(1, max_size)
    return [[rng.randint(lo, hi) for _ in range(n)] for _ in range(m)], n


def test_xgcd():
    for a in range(-20, 21):
        for b in range(-20, 21):
            g, s, t = xgcd(a, b)
            assert g == math.gcd(a, b) and s * a + t * b == g


def test_hermite_doc_example():
    assert hermite_normal_form([[2, 4], [6, 8]]) == [[2, 0], [0, 4]]


def test_g9_matrix():
    for p in (5, 7):
        T = g9_tail_matrix(p)
        d = check_decomposition(T, 11)
        assert d == [1, 1, 1, p]


def test_printed_transforms_for_g9():
    # the hand-chosen P, Q also work: P T Q has entries 1, 1, 1, p
    p = 5
    P = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, -1, 1]]
    Q = [[int(i == j) for j in range(11)] for i in range(11)]
    Q[2][7] = Q[3][8] = Q[4][9] = -p
    Q[10][9] = 1
    S = matmul(matmul(P, g9_tail_matrix(p)), Q)
    assert sorted(x for r in S for x in r if x) == [1, 1, 1, p]
    assert determinant(P) == 1 and determinant(Q) == 1


@pytest.mark.parametrize("M, torsion, free", [
    ([[0]], (), 1),
    ([[5, 0], [0, 5]], (5, 5), 0),
    ([[2, 0], [0, 3]], (6,), 0),
    ([[1, 2, 3]], (), 2),
])
def test_quotient_examples(M, torsion, free):
    assert quotient_invariants(M, len(M[0])) == AbelianType(torsion, free)


def test_abelian_type_str():
    assert str(AbelianType((5,), 7)) == "Z_5 x " + " x ".join(["Z"] * 7)
    assert str(AbelianType((), 0)) == "0"
    assert abelian_type([1, 1, 5, 0], 6) == AbelianType((5,), 3)


def test_snf_random_500_against_naive():
    rng = random.Random(2024)
    for _ in range(500):
        M, n = random_matrix(rng)
        d = check_decomposition(M, n)
        assert d == naive_invariants(M, n), M


def test_snf_against_determinantal_divisors():
    rng = random.Random(7)
    for _ in range(120):
        M, n = random_matrix(rng, max_size=4)
        assert [x for x in smith_normal_form(M, n).diagonal if x] == determinantal_divisors(M)


def test_snf_against_sympy():
    sympy = pytest.importorskip("sympy")
    from sympy.matrices.normalforms import smith_normal_form as sympy_snf
    rng = random.Random(11)
    for _ in range(60):
        M, n = random_matrix(rng, max_size=6)
        S = sympy_snf(sympy.Matrix(M), domain=sympy.ZZ)
        ref = sorted(abs(int(S[i, i])) for i in range(min(S.shape)) if S[i, i])
        assert sorted(x for x in smith_normal_form(M, n).diagonal if x) == ref


def test_hermite_spans_same_lattice_500():
    rng = random.Random(99)
    for _ in range(500):
        M, n = random_matrix(rng)
        H = [r for r in hermite_normal_form(M, n) if any(r)]
        assert all(in_lattice(r, H) for r in M)
        B = lattice_basis(H, n)
        assert all(in_lattice(r, lattice_basis(M, n)) for r in H)
        assert B == H
        D1 = smith_normal_form(M, n).diagonal
        D2 = smith_normal_form(H, n).diagonal if H else []
        assert [x for x in D1 if x] == [x for x in D2 if x]


def test_hermite_shape():
    rng = random.Random(5)
    for _ in range(200):
        M, n = random_matrix(rng)
        H = hermite_normal_form(M, n)
        lead = []
        for r in H:
            nz = [j for j, x in enumerate(r) if x]
            if not nz:
                continue
            c = nz[0]
            assert r[c] > 0
            lead.append(c)
        assert lead == sorted(set(lead))
        for i, c in enumerate(lead):
            assert all(0 <= H[k][c] < H[i][c] for k in range(i))


def test_big_integers():
    big = 10 ** 30
    M = [[big, 0], [0, 3 * big]]
    assert smith_normal_form(M).diagonal == [big, 3 * big]
    acc = LatticeAccumulator(2)
    acc.add([[big, 1], [1, 0]])
    assert acc.basis == [[1, 0], [0, 1]]


def test_accumulator_keeps_only_new_rows():
    acc = LatticeAccumulator(3)
    assert acc.add([[2, 0, 0], [4, 0, 0], [0, 3, 0], [2, 3, 0]], tags="abcd") == 2
    assert [t for _, t in acc.kept] == ["a", "c"]
    assert acc.add([[1, 0, 0]]) == 1
    assert acc.basis == [[1, 0, 0], [0, 3, 0]]


def test_inverse_unimodular():
    rng = random.Random(3)
    for _ in range(50):
        D = smith_normal_form(*random_matrix(rng))
        Qi = inverse_unimodular(D.Q)
        k = len(D.Q)
        assert matmul(D.Q, Qi) == [[int(i == j) for j in range(k)] for i in range(k)]
    with pytest.raises(ValueError):
        inverse_unimodular([[2, 0], [0, 1]])


@settings(max_examples=150, deadline=None)
@given(st.lists(st.lists(st.integers(-50, 50), min_size=3, max_size=3), max_size=12))
def test_monotone_under_redundant_rows(rows):
    # appending rows already in the lattice changes nothing
    B = lattice_basis(rows, 3)
    extra = [[sum(a * b for a, b in zip(col, [1, -2, 3][:len(B)])) for col in zip(*B)]] if B else []
    assert lattice_basis(rows + extra + B, 3) == B
    assert quotient_invariants(rows + extra, 3) == quotient_invariants(rows, 3)
