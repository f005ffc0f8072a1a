from dataclasses import replace

import numpy as np
import pytest

from loadersim import loading_unit as lu
from loadersim.tables import Table


@pytest.fixture
def link():
    return lu.nominal_linkage()


def test_lift_force_hand_arithmetic(link):
    l2 = replace(link, arm_equiv_mass=2000.0, lift_ratio=Table([0.0, 1.0], [2.0, 2.0]))
    assert lu.lift_load_force(l2, 0.4, 0.0) == pytest.approx(39240.0, abs=1e-9)


def test_lift_force_linear_in_mass(link):
    l2 = replace(link, arm_equiv_mass=2 * link.arm_equiv_mass)
    assert lu.lift_load_force(l2, 0.3, 2 * 3000.0) == pytest.approx(2 * lu.lift_load_force(link, 0.3, 3000.0))


def test_full_bucket_needs_more_force(link):
    for x in np.linspace(0, 0.9, 10):
        assert lu.lift_load_force(link, x, link.max_payload) > lu.lift_load_force(link, x, 0.0)


def test_pile_resistance():
    pile = lu.PileSpec(k0=5000.0, k1=40000.0, k2=100000.0, vert_frac=0.3, fill_rate=3000.0, pile_face_x=0.0)
    assert lu.pile_resistance(pile, 0.0) == (0.0, 0.0)
    fh, fv = lu.pile_resistance(pile, 0.5)
    assert fh == pytest.approx(50000.0)
    assert fv == pytest.approx(0.3 * 50000.0)
    vals = [lu.pile_resistance(pile, d)[0] for d in np.linspace(0.01, 2, 50)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_fill_rules(link):
    pile = replace(lu.nominal_pile(), fill_rate=4000.0)
    b = lu.BucketState(payload=1000.0, depth=0.2)
    x = pile.pile_face_x + 0.2 + 1000.0 / pile.fill_rate
    assert lu.bucket_fill_step(pile, link, b, 0.0, True, x).payload == 1000.0
    assert lu.bucket_fill_step(pile, link, b, 0.5, True, x).payload == pytest.approx(3000.0)
    assert lu.bucket_fill_step(pile, link, b, 0.5, False, x).payload == 1000.0
    full = lu.bucket_fill_step(pile, link, replace(b, payload=4500.0), 0.5, True, x)
    assert full.payload == link.max_payload
