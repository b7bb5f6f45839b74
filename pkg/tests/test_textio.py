from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fluctlab.counterexample import StageFunction, build_block_sequence, zero_stage
from fluctlab.foelner import builtin_sequence
from fluctlab.groups import H3, FiniteSubset, lattice
from fluctlab.textio import (
    CoveringInstance,
    FormatError,
    dump_covering,
    dump_selection,
    dump_sequence,
    dump_stage,
    load_covering,
    load_selection,
    load_sequence,
    load_stage,
    stage_labels_equal,
)


def same_sets(a, b):
    return a.group == b.group and len(a) == len(b) and all(x.size == y.size and x == y for x, y in zip(a.sets, b.sets))


def test_sequence_examples():
    seq = builtin_sequence("intervals", 3)
    text = dump_sequence(seq)
    assert text.splitlines()[1:] == ["group Z", "F 0", "F 0..1", "F 0..2"]
    assert same_sets(load_sequence(text), seq)


def test_compressed_blocks_round_trip():
    seq = build_block_sequence(1, 16, 2).sequence()
    text = dump_sequence(seq)
    assert "/32*" in text
    back = load_sequence(text)
    assert same_sets(back, seq)


@pytest.mark.parametrize("seq", [builtin_sequence("boxes", 2, dimension=2), builtin_sequence("heisenberg_balls", 2)])
def test_non_abelian_round_trip(seq):
    assert same_sets(load_sequence(dump_sequence(seq)), seq)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-50, 50), min_size=1, max_size=20), min_size=1, max_size=4))
def test_dense_round_trip(sets):
    from fluctlab.foelner import explicit_sequence

    seq = explicit_sequence([FiniteSubset(lattice(1), s) for s in sets])
    back = load_sequence(dump_sequence(seq))
    assert [set(s.elements) for s in back.sets] == [set(s) for s in sets]


def test_bad_input():
    with pytest.raises(FormatError):
        load_sequence("group Z\nF 0\n")
    with pytest.raises(FormatError):
        load_sequence("# fluctlab sequence v1\nF 0\n")
    with pytest.raises(FormatError):
        load_sequence("# fluctlab sequence v1\ngroup Z\nF 5..1\n")
    with pytest.raises(FormatError):
        load_sequence("# fluctlab sequence v1\ngroup Z\nF 0..3/2*4\n")


def test_covering_round_trip():
    inst = CoveringInstance(H3, Fraction(1, 3), {1: FiniteSubset(H3, H3.generators())}, {1: [(0, 0, 0), (1, 2, 3)]})
    back = load_covering(dump_covering(inst))
    assert back.eps == inst.eps and back.scales[1] == inst.scales[1] and back.centers == inst.centers


def test_selection_round_trip():
    w = [FiniteSubset.interval(0, 4), FiniteSubset.interval(10, 12)]
    text = dump_selection(lattice(1), Fraction(1, 2), "covering", [(0, 1), (10, 2)], w)
    sel = load_selection(text)
    assert sel["pairs"] == [(0, 1), (10, 2)] and sel["witnesses"] == w and sel["outcome"] == "covering"


def test_stage_round_trip():
    s1 = StageFunction(1, 11, 3, (0, 1, 2), 4, zero_stage())
    s2 = StageFunction(2, 14, 2, (0, 3), 4, s1)
    text = dump_stage(s2)
    assert "selected 0..2" in text and "selected 0 3" in text
    back = load_stage(text)
    assert back == s2 and stage_labels_equal(back, s2)
    assert load_stage(dump_stage(zero_stage())) == zero_stage()
    assert dump_stage(s1, labels=True).splitlines()[-1].startswith("labels 1111")
