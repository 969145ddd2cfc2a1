import numpy as np
import pytest

from magiclab.states import apply_circuit, zero_state
from magiclab.subset_phase import (
    IRREDUCIBLE_POLY,
    FeistelPermutation,
    HypergraphPolynomial,
    KWiseFunction,
    SubsetPhaseSpec,
    build_subset_phase_state,
    compile_hypergraph_circuit,
    gf_mul,
    hypergraph_spec_state,
    sample_hypergraph,
    sample_kwise_function,
    sample_subset,
)


# --- field arithmetic -------------------------------------------------------


def _clmul(a, b):
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        a <<= 1
        b >>= 1
    return acc


def _clmod(a, p):
    dp = p.bit_length()
    while a.bit_length() >= dp:
        a ^= p << (a.bit_length() - dp)
    return a


def _clpow_mod(base, e, p):
    acc = 1
    while e:
        if e & 1:
            acc = _clmod(_clmul(acc, base), p)
        base = _clmod(_clmul(base, base), p)
        e >>= 1
    return acc


def _clgcd(a, b):
    while b:
        a, b = b, _clmod(a, b) if a.bit_length() >= b.bit_length() else a
        if a.bit_length() < b.bit_length():
            a, b = b, a
    return a


def test_committed_polynomials_are_irreducible():
    # Rabin's criterion: x^(2^m) == x mod p, and gcd(x^(2^(m/q)) - x, p) = 1
    # for every prime divisor q of m
    def prime_divisors(m):
        out, q = set(), 2
        while q * q <= m:
            while m % q == 0:
                out.add(q)
                m //= q
            q += 1
        if m > 1:
            out.add(m)
        return out

    for m, p in IRREDUCIBLE_POLY.items():
        assert p.bit_length() == m + 1
        assert _clpow_mod(2, 1 << m, p) == 2 or m == 1  # x^(2^m) = x
        if m == 1:
            continue
        for q in prime_divisors(m):
            h = _clpow_mod(2, 1 << (m // q), p) ^ 2
            assert _clgcd(p, h) == 1, (m, q)


def test_gf_mul_field_axioms():
    m = 4
    rng = np.random.default_rng(0)
    for _ in range(100):
        a, b, c = (int(v) for v in rng.integers(0, 16, size=3))
        assert gf_mul(a, b, m) == gf_mul(b, a, m)
        assert gf_mul(a, gf_mul(b, c, m), m) == gf_mul(gf_mul(a, b, m), c, m)
        assert gf_mul(a, b ^ c, m) == gf_mul(a, b, m) ^ gf_mul(a, c, m)
        assert gf_mul(a, 1, m) == a
    # nonzero elements form a group: a * GF* is a permutation
    for a in range(1, 16):
        assert sorted(gf_mul(a, b, m) for b in range(16)) == list(range(16))


# --- k-wise independent functions -------------------------------------------


def test_t1_is_constant_function():
    fn = sample_kwise_function(4, t=1, seed=3)
    vals = {fn(u) for u in range(16)}
    assert len(vals) == 1


def test_same_seed_same_truth_table():
    a = sample_kwise_function(6, 8, seed=5)
    b = sample_kwise_function(6, 8, seed=5)
    assert [a(u) for u in range(64)] == [b(u) for u in range(64)]


def test_kwise_xor_is_unbiased():
    # XOR of values on 8 fixed distinct points over many seeds ~ fair coin
    m, t, trials = 6, 8, 10_000
    points = [0, 1, 5, 9, 17, 33, 60, 63]
    total = 0
    for seed in range(trials):
        fn = sample_kwise_function(m, t, seed)
        acc = 0
        for u in points:
            acc ^= fn(u)
        total += acc
    # 3 sigma around the fair-coin mean
    sigma = 0.5 * np.sqrt(trials)
    assert abs(total - trials / 2) < 3 * sigma


def test_kwise_exact_joint_uniformity_small_field():
    # over GF(4) with t >= 4 the restriction to all 4 points is exactly uniform
    m, t = 2, 8
    counts = {}
    for seed in range(4096):
        fn = sample_kwise_function(m, t, seed)
        key = tuple(fn(u) for u in range(4))
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 16
    expected = 4096 / 16
    for v in counts.values():
        assert abs(v - expected) < 5 * np.sqrt(expected)


# --- Feistel permutation -----------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3, 7, 10, 11])
def test_feistel_bijective_with_inverse(n):
    perm = FeistelPermutation.from_seed(n, seed=9)
    seen = set()
    for x in range(1 << n):
        y = perm.apply(x)
        assert perm.invert(y) == x
        seen.add(y)
    assert len(seen) == 1 << n


def test_feistel_no_duplicates_many_seeds():
    n, k = 10, 6
    for seed in range(1000):
        sub = sample_subset(n, k, seed)
        assert np.unique(sub).shape[0] == 1 << k


def test_sample_subset_full_domain_is_permutation():
    n = 6
    sub = sample_subset(n, n, seed=4)
    assert sorted(sub.tolist()) == list(range(1 << n))


def test_sample_subset_k1():
    sub = sample_subset(5, 1, seed=0)
    assert sub.shape[0] == 2 and sub[0] != sub[1]


# --- construction -------------------------------------------------------------


def test_bell_as_explicit_subset_phase():
    spec = SubsetPhaseSpec(n=2, k=1, fn_kind="hypergraph", hyperedges=(),
                           subset_kind="explicit_list", explicit_subset=(0, 3))
    st = build_subset_phase_state(spec)
    assert np.allclose(st.amps, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_minus_state():
    spec = SubsetPhaseSpec(n=1, k=1, fn_kind="hypergraph", hyperedges=((0,),),
                           subset_kind="explicit_list", explicit_subset=(0, 1))
    st = build_subset_phase_state(spec)
    assert np.allclose(st.amps, np.array([1, -1]) / np.sqrt(2))


def test_duplicate_subset_rejected():
    with pytest.raises(ValueError, match="duplicate"):
        build_subset_phase_state(SubsetPhaseSpec(
            n=2, k=1, subset_kind="explicit_list", explicit_subset=(1, 1)))


def test_amplitude_profile_invariant():
    for seed in range(20):
        for k in (1, 3, 5):
            spec = SubsetPhaseSpec(n=8, k=k, fn_kind="kwise",
                                   fn_seed=seed, subset_seed=seed + 1)
            st = build_subset_phase_state(spec)
            nonzero = np.abs(st.amps[np.abs(st.amps) > 0])
            assert nonzero.shape[0] == 1 << k
            assert np.max(np.abs(nonzero - 1 / np.sqrt(1 << k))) < 1e-12


def test_deterministic_given_seeds():
    spec = SubsetPhaseSpec(n=7, k=4, fn_kind="truth_table", fn_seed=11, subset_seed=12)
    a = build_subset_phase_state(spec)
    b = build_subset_phase_state(spec)
    assert np.array_equal(a.amps, b.amps)


def test_spec_json_round_trip():
    specs = [
        SubsetPhaseSpec(n=6, k=3, fn_kind="kwise", fn_seed=1, subset_seed=2),
        SubsetPhaseSpec(n=4, k=2, fn_kind="hypergraph", hyperedges=((0,), (0, 1)),
                        subset_kind="explicit_list", explicit_subset=(0, 1, 2, 3)),
        SubsetPhaseSpec(n=5, k=5, fn_kind="truth_table", fn_seed=7),
    ]
    for spec in specs:
        back = SubsetPhaseSpec.from_json(spec.to_json())
        assert back == spec
        assert np.array_equal(build_subset_phase_state(back).amps,
                              build_subset_phase_state(spec).amps)


# --- hypergraph compilation ----------------------------------------------------


def _identity_perm(n):
    return FeistelPermutation(n, 4, (0, 0, 0, 0))


def test_cz_graph_state_compilation():
    poly = HypergraphPolynomial(2, ((0, 1),))
    perm = FeistelPermutation.from_seed(2, seed=0)
    circ = compile_hypergraph_circuit(poly, 2, perm)
    got = apply_circuit(zero_state(2), circ)
    want = hypergraph_spec_state(poly, 2, perm)
    assert np.max(np.abs(got.amps - want.amps)) < 1e-9


def test_empty_hypergraph_uniform_plus():
    poly = HypergraphPolynomial(3, ())
    perm = FeistelPermutation.from_seed(3, seed=1)
    circ = compile_hypergraph_circuit(poly, 3, perm)
    got = apply_circuit(zero_state(3), circ)
    nz = got.amps[np.abs(got.amps) > 0]
    assert nz.shape[0] == 8
    assert np.max(np.abs(nz - 1 / np.sqrt(8))) < 1e-12


def test_random_polynomials_compile_to_direct_construction():
    for seed in range(10):
        poly = sample_hypergraph(3, seed)
        perm = FeistelPermutation.from_seed(4, seed=seed + 100)
        circ = compile_hypergraph_circuit(poly, 4, perm)
        got = apply_circuit(zero_state(4), circ)
        want = hypergraph_spec_state(poly, 4, perm)
        assert np.max(np.abs(got.amps - want.amps)) < 1e-9


def test_hypergraph_matches_builder_path():
    # the spec-driven builder and the compiled circuit agree on the same seeds
    for seed in range(5):
        poly = sample_hypergraph(3, seed)
        spec = SubsetPhaseSpec(n=5, k=3, fn_kind="hypergraph",
                               hyperedges=poly.hyperedges, subset_seed=seed)
        direct = build_subset_phase_state(spec)
        perm = FeistelPermutation.from_seed(5, seed)
        circ = compile_hypergraph_circuit(poly, 5, perm)
        compiled = apply_circuit(zero_state(5), circ)
        assert np.max(np.abs(direct.amps - compiled.amps)) < 1e-9


def test_empty_hyperedge_rejected():
    with pytest.raises(ValueError):
        HypergraphPolynomial(2, ((),))
