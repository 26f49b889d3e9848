import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genea_sel.generator import (DimensionError, apply_generator, mapping_triples, constrain,
                                 family_ring, numeric_generator_check, phi1, phi2, phi3,
                                 equal_power_selection_yz_image, total_mass, verify_mapping_table,
                                 verify_pair_identities)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_pair_statistic_identities_hold_exactly(n):
    checks = verify_pair_identities(n)
    assert len(checks) == 2
    assert all(c.passed for c in checks), [c.line() for c in checks]


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_nine_mappings_hold_exactly(n):
    checks = verify_mapping_table(n)
    assert len(checks) == 9
    assert all(c.passed for c in checks), [c.line() for c in checks if not c.passed]


@pytest.mark.parametrize("m", [0, 1, 3, 7])
def test_mappings_hold_for_any_power(m):
    assert all(c.passed for c in verify_mapping_table(3, m))


def test_two_family_mutation_image():
    r = family_ring(2)
    Y = r.y(0) + r.y(1)
    syy = r.y(0) ** 2 + r.y(1) ** 2
    syz = r.y(0) * r.zc(0) + r.y(1) * r.zc(1)
    t0, t1 = r.theta0, r.theta1
    image = apply_generator(Y ** 2 * syy, "mut")
    expected = 2 * t0 * Y ** 2 * syz + 2 * t0 * Y * syy - (2 * t0 + 4 * t1) * Y ** 2 * syy
    assert image == constrain(expected)


def test_two_family_selection_image():
    r = family_ring(2)
    Z = r.zc(0) + r.zc(1)
    szz = r.zc(0) ** 2 + r.zc(1) ** 2
    image = apply_generator(Z ** 2 * szz, "sel")
    assert image == -4 * r.alpha * Z ** 2 * szz + 4 * r.alpha * Z ** 3 * szz


@pytest.mark.parametrize("n", [2, 3])
def test_selection_line_with_equal_powers_is_not_an_identity(n):
    name = "Ybar^m sum yz | sel"
    obs = next(t[1] for t in mapping_triples(n) if t[0] == name)
    diff = apply_generator(obs, "sel") - equal_power_selection_yz_image(n)
    assert not diff.is_zero()


def test_corrupted_expectation_is_reported():
    r = family_ring(2)
    checks = verify_mapping_table(2, overrides={"Zbar^m sum z^2 | sel": r.alpha})
    bad = [c for c in checks if not c.passed]
    assert [c.name for c in bad] == ["Zbar^m sum z^2 | sel"]
    assert "difference:" in bad[0].line()


def test_full_verification_is_fast():
    t0 = time.perf_counter()
    for n in (2, 3, 4, 5):
        verify_pair_identities(n)
        verify_mapping_table(n)
    assert time.perf_counter() - t0 <= 10


def test_total_mass_constrains_to_one():
    r = family_ring(3)
    assert constrain(total_mass(r)) == r.one()
    assert apply_generator(constrain(total_mass(r))).is_zero()


def test_unconstrained_input_is_rejected():
    r = family_ring(2)
    with pytest.raises(DimensionError):
        apply_generator(r.z(1) ** 2)
    with pytest.raises(DimensionError):
        apply_generator(phi1(r), n=3)
    with pytest.raises(ValueError):
        apply_generator(phi1(r), "drift")
    with pytest.raises(DimensionError):
        verify_mapping_table(1)


coeffs = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 5))


@settings(max_examples=25, deadline=None)
@given(a=coeffs, b=coeffs, i=st.integers(0, 2), j=st.integers(0, 2), k=st.integers(1, 3),
       part=st.sampled_from(["res", "sel", "mut", "full"]))
def test_generator_is_linear(a, b, i, j, k, part):
    r = family_ring(3)
    P = r.y(i) ** k * r.zc(j)
    Q = phi2(r) + r.alpha * r.y(j)
    assert apply_generator(a * P + b * Q, part) == a * apply_generator(P, part) + b * apply_generator(Q, part)


@pytest.mark.parametrize("part", ["res", "sel", "mut", "full"])
def test_symbolic_image_matches_numeric_generator(part):
    rng = np.random.default_rng(3)
    r = family_ring(3)
    for P in (phi1(r), phi2(r), phi3(r)):
        x = rng.dirichlet(np.ones(6))
        sym, num = numeric_generator_check(P, x, 1.3, 0.4, 0.9, part)
        assert sym == pytest.approx(num, abs=1e-10)
