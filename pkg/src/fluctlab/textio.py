"""Line-oriented text formats for sequences, covering instances, selections and stages.

Every file starts with a ``# fluctlab <kind> v1`` header line; blank lines and
other ``#`` lines are ignored.  A set is written as space-separated tokens:

    a..b        the run [a, b] (over Z)
    a           the singleton {a} (over Z)
    a..b/p*c    c runs [a, b], [a+p, b+p], ... (a compressed progression)
    x,y,z       one element of Z^d or H3

Sequence files hold a ``group`` line and one ``F`` line per set, in order.
Covering files hold ``group``, ``eps``, then ``scale <n> <set>`` and
``centers <n> <element>...`` lines.  Selections add ``outcome``, ``pair <c> <n>``
and ``witness <set>`` lines.  Stage files list the lineage, newest first, as
``stage <k> depth <j> r <r> l <l> selected <ranges>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .counterexample import StageFunction, zero_stage
from .foelner import FoelnerSequence
from .groups import Z, FiniteSubset, Group, group_from_tag
from .intsets import Piece, RunSet, make_piece


class FormatError(ValueError):
    pass


def _header(kind: str) -> str:
    return "# fluctlab %s v1" % kind


def _lines(text: str, kind: str) -> list[list[str]]:
    rows = text.splitlines()
    if not rows or rows[0].strip() != _header(kind):
        raise FormatError("expected header %r" % _header(kind))
    out = []
    for row in rows[1:]:
        row = row.strip()
        if row and not row.startswith("#"):
            out.append(row.split())
    return out


# elements and sets ------------------------------------------------------------

def format_element(g) -> str:
    if isinstance(g, tuple):
        return ",".join(str(int(x)) for x in g)
    return str(int(g))


def parse_element(tok: str, group: Group):
    if "," in tok:
        return group.coerce(tuple(int(x) for x in tok.split(",")))
    return group.coerce(int(tok))


def _piece_token(p: Piece) -> str:
    last = p.start + p.length - 1
    if p.count > 1:
        return "%d..%d/%d*%d" % (p.start, last, p.period, p.count)
    return str(p.start) if p.length == 1 else "%d..%d" % (p.start, last)


def format_set(s: FiniteSubset) -> str:
    if s.group is Z:
        rs = s.runset if s.runset is not None else s.with_runs().runset
        return " ".join(_piece_token(p) for p in rs.pieces)
    return " ".join(format_element(g) for g in s.elements)


def _parse_piece(tok: str) -> Piece:
    body, _, rep = tok.partition("/")
    if ".." in body:
        a, b = (int(x) for x in body.split(".."))
    else:
        a = b = int(body)
    if b < a:
        raise FormatError("empty run %r" % tok)
    if not rep:
        return make_piece(a, b - a + 1, 1, 1)
    period, count = (int(x) for x in rep.split("*"))
    if period < b - a + 1 or count < 1:
        raise FormatError("bad progression %r" % tok)
    return make_piece(a, b - a + 1, period, count)


def parse_set(tokens: Sequence[str], group: Group) -> FiniteSubset:
    if group is Z:
        return FiniteSubset.from_runset(RunSet(_parse_piece(t) for t in tokens))
    return FiniteSubset(group, [parse_element(t, group) for t in tokens])


# sequences ----------------------------------------------------------------------

def dump_sequence(seq: FoelnerSequence) -> str:
    out = [_header("sequence"), "group %s" % seq.group.tag]
    out += ["F " + format_set(s) for s in seq.sets]
    return "\n".join(out) + "\n"


def load_sequence(text: str) -> FoelnerSequence:
    group, sets = None, []
    for row in _lines(text, "sequence"):
        if row[0] == "group":
            group = group_from_tag(row[1])
        elif row[0] == "F":
            if group is None:
                raise FormatError("group line must come first")
            sets.append(parse_set(row[1:], group))
        else:
            raise FormatError("unknown line %r" % " ".join(row))
    if group is None or not sets:
        raise FormatError("need a group and at least one set")
    return FoelnerSequence(group, tuple(sets), {"kind": "loaded"})


# covering instances and selections ----------------------------------------------

@dataclass
class CoveringInstance:
    group: Group
    eps: Fraction
    scales: dict[int, FiniteSubset]
    centers: dict[int, list]


def dump_covering(inst: CoveringInstance) -> str:
    out = [_header("covering"), "group %s" % inst.group.tag, "eps %s" % inst.eps]
    for n in sorted(inst.scales):
        out.append("scale %d %s" % (n, format_set(inst.scales[n])))
    for n in sorted(inst.centers):
        out.append("centers %d %s" % (n, " ".join(format_element(c) for c in inst.centers[n])))
    return "\n".join(out) + "\n"


def load_covering(text: str) -> CoveringInstance:
    group, eps, scales, centers = None, None, {}, {}
    for row in _lines(text, "covering"):
        key = row[0]
        if key == "group":
            group = group_from_tag(row[1])
        elif key == "eps":
            eps = Fraction(row[1])
        elif key == "scale":
            scales[int(row[1])] = parse_set(row[2:], group)
        elif key == "centers":
            centers[int(row[1])] = [parse_element(t, group) for t in row[2:]]
        else:
            raise FormatError("unknown line %r" % " ".join(row))
    if group is None or eps is None:
        raise FormatError("covering needs group and eps lines")
    return CoveringInstance(group, eps, scales, centers)


def dump_selection(group: Group, eps, outcome: str, pairs: Iterable, witnesses: Iterable[FiniteSubset]) -> str:
    out = [_header("selection"), "group %s" % group.tag, "eps %s" % Fraction(eps), "outcome %s" % outcome]
    out += ["pair %s %d" % (format_element(c), n) for c, n in pairs]
    out += ["witness " + format_set(w) for w in witnesses]
    return "\n".join(out) + "\n"


def load_selection(text: str) -> dict:
    group, out = None, {"pairs": [], "witnesses": []}
    for row in _lines(text, "selection"):
        key = row[0]
        if key == "group":
            group = group_from_tag(row[1])
        elif key == "eps":
            out["eps"] = Fraction(row[1])
        elif key == "outcome":
            out["outcome"] = row[1]
        elif key == "pair":
            out["pairs"].append((parse_element(row[1], group), int(row[2])))
        elif key == "witness":
            out["witnesses"].append(parse_set(row[1:], group))
        else:
            raise FormatError("unknown line %r" % " ".join(row))
    out["group"] = group
    return out


# stage functions ------------------------------------------------------------------

def _ranges(xs: Sequence[int]) -> list[str]:
    out, xs = [], sorted(xs)
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and xs[j + 1] == xs[j] + 1:
            j += 1
        out.append(str(xs[i]) if i == j else "%d..%d" % (xs[i], xs[j]))
        i = j + 1
    return out


def dump_stage(stage: StageFunction, *, labels: bool = False) -> str:
    out = [_header("stage")]
    for s in reversed(stage.lineage()[1:]):
        out.append("stage %d depth %d r %d l %d selected %s" % (s.stage, s.depth, s.r, s.l, " ".join(_ranges(s.selected))))
    if labels:
        out.append("labels " + "".join(str(int(v)) for v in stage.label_array()))
    return "\n".join(out) + "\n"


def load_stage(text: str) -> StageFunction:
    rows = [r for r in _lines(text, "stage") if r[0] == "stage"]
    f = zero_stage()
    for row in reversed(rows):
        kv = dict(zip(row[2:8:2], row[3:9:2]))
        if row[8] != "selected":
            raise FormatError("bad stage line")
        sel = []
        for tok in row[9:]:
            a, _, b = tok.partition("..")
            sel.extend(range(int(a), int(b or a) + 1))
        k = int(row[1])
        if k != f.stage + 1:
            raise FormatError("stages must be consecutive")
        f = StageFunction(k, int(kv["depth"]), int(kv["r"]), tuple(sel), int(kv["l"]), f)
    return f


def stage_labels_equal(a: StageFunction, b: StageFunction) -> bool:
    if a.period != b.period:
        return False
    return bool(np.array_equal(a.label_array(), b.label_array()))
