from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hullwalk.comboracle import (
    DegenerateConfigurationError,
    HalfSpace,
    PointSequence,
    block_shift_family,
    bridge_fraction_oracle,
    check_lemma,
    cycle_lemma_witness,
    family_size,
    halfspace_fraction_oracle,
    random_cycle_configuration,
    shifted_sums,
    valid_shifts,
)
from hullwalk.walkgen import IncrementSpec, WalkPath, derive_rng, sample_bridge, sample_walk


UPPER = HalfSpace(np.array([0.0, 1.0]))


def test_witness_identity_shift():
    seq = PointSequence(np.zeros(2), np.array([[1.0, 1.0], [1.0, -1.0]]))
    assert cycle_lemma_witness(seq, UPPER) == 0
    assert valid_shifts(seq, UPPER) == [0]


def test_witness_reversed_case():
    seq = PointSequence(np.zeros(2), np.array([[1.0, -1.0], [1.0, 1.0]]))
    assert cycle_lemma_witness(seq, UPPER) == 1
    assert valid_shifts(seq, UPPER) == [1]


def test_shifted_sums_rotate_increments():
    seq = PointSequence(np.array([1.0]), np.array([1.0, 2.0, 3.0]))
    assert np.allclose(shifted_sums(seq, 1).ravel(), [1, 3, 6, 7])


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 12))
def test_witness_is_the_unique_valid_shift(seed, d, n):
    seq, H = random_cycle_configuration(d, n, derive_rng(seed))
    assert valid_shifts(seq, H) == [cycle_lemma_witness(seq, H)]


def test_witness_preconditions():
    off = PointSequence(np.zeros(2), np.array([[1.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(DegenerateConfigurationError):
        cycle_lemma_witness(off, UPPER)
    flat = PointSequence(np.zeros(2), np.array([[1.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(DegenerateConfigurationError):
        cycle_lemma_witness(flat, UPPER)


def test_invalid_types():
    with pytest.raises(ValueError):
        HalfSpace(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        PointSequence(np.zeros(2), np.zeros((0, 2)))
    with pytest.raises(ValueError):
        PointSequence(np.zeros(2), np.array([[np.inf, 0.0]]))


def test_block_family_size_and_membership():
    fam = block_shift_family((0, 2, 5))
    assert len(fam) == 6 == family_size(5, (2,))
    assert [0, 1, 2, 3, 4] in fam and [1, 0, 4, 2, 3] in fam
    assert all(sorted(p) == list(range(5)) for p in fam)
    assert family_size(3, (1, 2), bridge=True) == 2


def test_halfspace_fraction_planar_n3():
    for seed in range(10):
        path = sample_walk(IncrementSpec.gaussian(d=2), 3, seed)
        assert halfspace_fraction_oracle(path) == (Fraction(1, 3), Fraction(1, 3))


def test_halfspace_fraction_d3_n4():
    for seed in range(10):
        path = sample_walk(IncrementSpec.gaussian(d=3), 4, seed)
        assert halfspace_fraction_oracle(path, (2,)) == (Fraction(1, 4), Fraction(1, 4))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4), st.integers(0, 5))
def test_halfspace_fraction_equals_reciprocal(seed, d, extra):
    n = d + extra
    rng = derive_rng(seed)
    idx = tuple(sorted(rng.choice(np.arange(1, n), size=d - 2, replace=False).tolist()))
    path = sample_walk(IncrementSpec.uniform_cube(d), n, seed)
    plus, minus = halfspace_fraction_oracle(path, idx)
    target = Fraction(1, family_size(n, idx))
    assert plus == minus == target
    assert plus + minus <= 1


def test_bridge_fraction_examples():
    for seed in range(10):
        b2 = WalkPath(sample_bridge(IncrementSpec.gaussian(d=2), 3, "difference", seed).points)
        assert bridge_fraction_oracle(b2, (1,)) == (Fraction(1, 2), Fraction(1, 2))
        b3 = WalkPath(sample_bridge(IncrementSpec.gaussian(d=2), 4, "conditional-gaussian", seed).points)
        assert bridge_fraction_oracle(b3, (2,)) == (Fraction(1, 4), Fraction(1, 4))


def test_collinear_configuration_raises():
    pts = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [0.0, 0.0]])
    with pytest.raises(DegenerateConfigurationError):
        bridge_fraction_oracle(WalkPath(pts), (1,))
    line = WalkPath(np.array([[0.0, 0.0], [1.0, 1.0], [3.0, 3.0], [4.0, 4.0]]))
    with pytest.raises(DegenerateConfigurationError):
        halfspace_fraction_oracle(line)


def test_bridge_must_close():
    path = sample_walk(IncrementSpec.gaussian(d=2), 3, 0)
    with pytest.raises(ValueError):
        bridge_fraction_oracle(path, (1,))


@pytest.mark.parametrize("lemma,dims", [(1, (1, 2, 3)), (2, (2, 3)), (3, (2, 3))])
def test_check_lemma_zero_failures(lemma, dims):
    for d in dims:
        assert check_lemma(lemma, d, 7, trials=50, seed=4) == 0


def test_pathwise_constant_average_is_reciprocal():
    spec = IncrementSpec.centered_exponential((1.0, 3.0))
    fracs = [halfspace_fraction_oracle(sample_walk(spec, 6, s))[0] for s in range(20)]
    assert sum(fracs) / len(fracs) == Fraction(1, 6)
