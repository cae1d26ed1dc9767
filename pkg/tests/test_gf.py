import itertools

import numpy as np
import pytest

from sidecode.gf import FieldElement, FieldSpec, is_prime


@pytest.mark.parametrize("p", [2, 3, 5, 7, 251])
def test_valid_primes(p):
    assert FieldSpec(p).p == p


@pytest.mark.parametrize("p", [0, 1, 4, 6, 9, 100])
def test_composite_rejected(p):
    with pytest.raises(ValueError):
        FieldSpec(p)


def test_prime_above_cap_rejected():
    with pytest.raises(ValueError):
        FieldSpec(257)


def test_add_examples():
    gf2 = FieldSpec(2)
    assert (gf2.element(1) + gf2.element(1)).value == 0
    gf5 = FieldSpec(5)
    assert (gf5.element(3) + gf5.element(4)).value == 2
    gf3 = FieldSpec(3)
    for a in gf3.elements():
        assert (a + gf3.element(0)).value == a.value


def test_mul_examples():
    gf5 = FieldSpec(5)
    assert (gf5.element(2) * gf5.element(3)).value == 1
    gf7 = FieldSpec(7)
    for a in gf7.elements():
        assert (a * gf7.element(1)).value == a.value
    gf2 = FieldSpec(2)
    assert (gf2.element(1) * gf2.element(1)).value == 1


def test_inverse_examples():
    gf5 = FieldSpec(5)
    assert gf5.element(2).inverse().value == 3
    gf2 = FieldSpec(2)
    assert gf2.element(1).inverse().value == 1
    # exhaustive-search oracle for inv(3) in GF(7)
    expected = next(b for b in range(1, 7) if (3 * b) % 7 == 1)
    assert expected == 5
    assert FieldSpec(7).element(3).inverse().value == expected


def test_inverse_of_zero_rejected():
    with pytest.raises(ZeroDivisionError):
        FieldSpec(5).element(0).inverse()


def test_mismatched_fields_rejected():
    a = FieldSpec(3).element(1)
    b = FieldSpec(5).element(1)
    with pytest.raises(ValueError):
        a + b
    with pytest.raises(ValueError):
        a * b


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_field_axioms_exhaustive(p):
    spec = FieldSpec(p)
    elems = spec.elements()
    zero, one = spec.element(0), spec.element(1)
    for a, b in itertools.product(elems, repeat=2):
        assert (a + b).value == (b + a).value
        assert (a * b).value == (b * a).value
    for a, b, c in itertools.product(elems, repeat=3):
        assert ((a + b) + c).value == (a + (b + c)).value
        assert ((a * b) * c).value == (a * (b * c)).value
        assert (a * (b + c)).value == (a * b + a * c).value
    for a in elems:
        assert (a + zero).value == a.value
        assert (a * one).value == a.value
        assert (a + (-a)).value == 0
        if a.value != 0:
            assert (a * a.inverse()).value == 1


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_double_inverse(p):
    spec = FieldSpec(p)
    for a in spec.elements()[1:]:
        assert a.inverse().inverse().value == a.value


def test_element_range_checked():
    with pytest.raises(ValueError):
        FieldElement(5, FieldSpec(5))
    with pytest.raises(ValueError):
        FieldElement(-1, FieldSpec(5))


def test_validate_array():
    spec = FieldSpec(3)
    arr = spec.validate_array([0, 1, 2])
    assert arr.dtype == np.int64
    with pytest.raises(ValueError):
        spec.validate_array([0, 3])


def test_inv_table_matches_scalar():
    spec = FieldSpec(7)
    table = spec.inv_table()
    for v in range(1, 7):
        assert table[v] == spec.element(v).inverse().value


def test_is_prime_small():
    primes = {2, 3, 5, 7, 11, 13}
    for k in range(2, 14):
        assert is_prime(k) == (k in primes)
