from hypothesis import given, settings, strategies as st

from fluctlab.intsets import RunSet, make_piece, periodic_indicator_count


def expand(rs):
    out = set()
    for p in rs.pieces:
        for a, b in p.runs():
            out.update(range(a, b + 1))
    return out


@st.composite
def runsets(draw, period=None):
    pieces = []
    for _ in range(draw(st.integers(0, 4))):
        start = draw(st.integers(-60, 60))
        if draw(st.booleans()):
            pieces.append(make_piece(start, draw(st.integers(1, 15)), 1, 1))
        else:
            p = period or draw(st.integers(2, 9))
            pieces.append(make_piece(start, draw(st.integers(1, p)), p, draw(st.integers(1, 6))))
    return RunSet(pieces)


@settings(max_examples=300)
@given(runsets(), runsets())
def test_sizes_and_unions(a, b):
    ea, eb = expand(a), expand(b)
    assert a.size == len(ea)
    assert a.union_size(b) == len(ea | eb)
    assert a.intersection_size(b) == len(ea & eb)
    assert a.symdiff_size(b) == len(ea ^ eb)
    assert set(a) == ea
    assert set(a.intersection(b)) == ea & eb
    assert set(a.difference(b)) == ea - eb
    assert (a == b) == (ea == eb)
    assert expand(a.compact()) == ea


@settings(max_examples=300)
@given(runsets(period=6), runsets(period=6))
def test_minkowski_same_period(a, b):
    ea, eb = expand(a), expand(b)
    assert expand(a.minkowski(b)) == {x + y for x in ea for y in eb}


@settings(max_examples=200)
@given(runsets(), runsets())
def test_minkowski_mixed_periods(a, b):
    ea, eb = expand(a), expand(b)
    assert expand(a.minkowski(b)) == {x + y for x in ea for y in eb}
    assert expand(a.negate()) == {-x for x in ea}
    assert expand(a.shift(17)) == {x + 17 for x in ea}


@given(runsets(), st.integers(2, 10), st.integers(0, 30))
def test_periodic_indicator_count(a, period, shift):
    low, high = 0, max(1, period // 2)
    ea = expand(a)
    brute = sum(1 for z in ea if low <= (z + shift) % period < high)
    assert periodic_indicator_count(a, period, low, high, shift) == brute


@given(runsets())
def test_token_round_trip(a):
    back = RunSet.from_tokens(a.to_tokens())
    assert expand(back) == expand(a)


def test_huge_sizes_are_exact():
    rs = RunSet.interval(0, 32 ** 80 - 1)
    assert rs.size == 32 ** 80
    assert rs.minkowski(rs.negate()).size == 2 * 32 ** 80 - 1
