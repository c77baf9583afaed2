"""Operator spec files.

Grammar (line oriented, ``#`` starts a comment)::

    weights: w_0 w_1 ...
    dims: n_0 n_1 ...
    block 0:
    re,im re,im ...        # n_0 rows of n_0 entries
    block 1:
    ...

Blocks are numbered from 0 and may appear in any order, each exactly once.
Instead of weights/dims/blocks a file may name a truncated field::

    generator: geometric N=12

with ``N`` the truncation level and any further ``key=value`` parameters
passed to the field constructor.
"""

from dataclasses import dataclass, field
import re

import numpy as np

from .algebra import NAMED_FIELDS, BlockOperator, TracialAlgebra, make_algebra, truncate
from .errors import DimensionMismatch, ParseError
from .measures import fmt

_KEY = re.compile(r"^\s*(weights|dims|generator)\s*:(.*)$")
_BLOCK = re.compile(r"^\s*block\s+(\S+)\s*:\s*$")


@dataclass
class ParsedSpec:
    algebra: TracialAlgebra
    operator: BlockOperator
    notices: list = field(default_factory=list)


def _strip(line):
    return line.split("#", 1)[0].rstrip()


def _numbers(text, lineno, offset, kind):
    out = []
    for mt in re.finditer(r"\S+", text):
        tok = mt.group(0)
        try:
            out.append(kind(tok))
        except ValueError:
            raise ParseError(lineno, offset + mt.start() + 1, f"bad number {tok!r}") from None
    return out


def _entry(tok, lineno, col):
    parts = tok.split(",")
    if len(parts) != 2:
        raise ParseError(lineno, col, f"expected 're,im', got {tok!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise ParseError(lineno, col, f"bad complex entry {tok!r}") from None


def _generator(text, lineno, offset):
    toks = text.split()
    if not toks:
        raise ParseError(lineno, offset + 1, "generator needs a rule name")
    name = toks[0]
    if name not in NAMED_FIELDS:
        raise ParseError(lineno, offset + 1, f"unknown generator {name!r}; known: {sorted(NAMED_FIELDS)}")
    N = None
    kwargs = {}
    for t in toks[1:]:
        if "=" not in t:
            raise ParseError(lineno, offset + text.find(t) + 1, f"expected key=value, got {t!r}")
        k, v = t.split("=", 1)
        try:
            if k == "N":
                N = int(v)
            else:
                kwargs[k] = float(v)
        except ValueError:
            raise ParseError(lineno, offset + text.find(t) + 1, f"bad value in {t!r}") from None
    if N is None:
        raise ParseError(lineno, offset + 1, "generator needs a truncation level N=...")
    try:
        F = NAMED_FIELDS[name](**kwargs)
    except TypeError as exc:
        raise ParseError(lineno, offset + 1, str(exc)) from None
    return F, N


def parse_spec(text: str) -> ParsedSpec:
    """Parse a spec document into an algebra and an operator.

    Raises ParseError (with 1-based line and column) on syntax errors and
    DimensionMismatch when the blocks disagree with ``dims``.
    """
    weights = dims = gen = None
    blocks = {}
    current = None  # (index, rows, header line)
    notices = []
    lines = text.splitlines()

    for lineno, raw in enumerate(lines, start=1):
        line = _strip(raw)
        if not line.strip():
            continue
        mk = _KEY.match(line)
        mb = _BLOCK.match(line)
        if mk or mb:
            if current is not None:
                blocks[current[0]] = (current[1], current[2])
                current = None
        if mk:
            key, rest = mk.group(1), mk.group(2)
            offset = line.index(":") + 1
            if key == "weights":
                if weights is not None:
                    raise ParseError(lineno, 1, "duplicate weights line")
                weights = _numbers(rest, lineno, offset, float)
            elif key == "dims":
                if dims is not None:
                    raise ParseError(lineno, 1, "duplicate dims line")
                dims = _numbers(rest, lineno, offset, int)
            else:
                gen = _generator(rest, lineno, offset)
            continue
        if mb:
            try:
                idx = int(mb.group(1))
            except ValueError:
                raise ParseError(lineno, line.index(mb.group(1)) + 1, f"bad block index {mb.group(1)!r}") from None
            if idx in blocks:
                raise ParseError(lineno, 1, f"block {idx} given twice")
            current = (idx, [], lineno)
            continue
        if current is None:
            raise ParseError(lineno, 1, f"unexpected text {line.strip()!r}")
        row = [_entry(mt.group(0), lineno, mt.start() + 1) for mt in re.finditer(r"\S+", line)]
        current[1].append((lineno, row))
    if current is not None:
        blocks[current[0]] = (current[1], current[2])

    if gen is not None:
        if weights is not None or dims is not None or blocks:
            raise ParseError(1, 1, "generator cannot be combined with weights/dims/blocks")
        F, N = gen
        alg, T = truncate(F, N)
        notices.append(f"generated {F.description} truncated at N={N}")
        return ParsedSpec(alg, T, notices)

    if weights is None:
        raise ParseError(len(lines) or 1, 1, "missing weights line")
    if dims is None:
        raise ParseError(len(lines) or 1, 1, "missing dims line")
    if len(weights) != len(dims):
        raise DimensionMismatch(f"{len(weights)} weights but {len(dims)} dims")
    alg = make_algebra(weights, dims)
    if alg.normalization != 1.0:
        notices.append(f"weights normalized (divided by {fmt(alg.normalization)})")
    mats = []
    for i, n in enumerate(alg.dims):
        if i not in blocks:
            raise DimensionMismatch(f"block {i} missing")
        rows, head = blocks[i]
        if len(rows) != n:
            raise DimensionMismatch(f"block {i} (line {head}) has {len(rows)} rows, dims says {n}")
        for lineno, row in rows:
            if len(row) != n:
                raise DimensionMismatch(f"block {i}, line {lineno}: {len(row)} entries, expected {n}")
        mats.append(np.array([r for _, r in rows], dtype=complex))
    extra = sorted(set(blocks) - set(range(len(alg.dims))))
    if extra:
        raise DimensionMismatch(f"block indices {extra} exceed the number of atoms")
    return ParsedSpec(alg, BlockOperator(alg, mats), notices)


def serialize_spec(T: BlockOperator, header=None) -> str:
    """Spec text for ``T``; floats use 17 significant digits so parsing round-trips."""
    out = []
    if header:
        out.extend(f"# {h}" for h in header.splitlines())
    out.append("weights: " + " ".join(fmt(w) for w in T.algebra.weights))
    out.append("dims: " + " ".join(str(n) for n in T.algebra.dims))
    for i, b in enumerate(T.blocks):
        out.append(f"block {i}:")
        for row in b:
            out.append(" ".join(f"{fmt(z.real)},{fmt(z.imag)}" for z in row))
    return "\n".join(out) + "\n"
