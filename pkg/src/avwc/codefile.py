"""Versioned text serialization for wiretap codes and reduced random codes.

Codewords are written as digit strings over the input alphabet (sizes up to
36 use 0-9a-z) and the decoder as an assignment list over all output words in
lexicographic order, ``-`` marking erasure.  The formats are binary-free so
pipeline stages can be chained between CLI invocations and inspected by hand.
"""

from __future__ import annotations

import numpy as np

from .channels import Distribution
from .coding import ERASURE, RandomCode, WiretapCode
from .errors import SpecFormatError

CODE_FORMAT_VERSION = 1
_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


def _encode_word(word) -> str:
    return "".join(_DIGITS[int(v)] for v in word)


def _decode_word(token: str, alphabet: int, line_no: int) -> list[int]:
    out = []
    for ch in token:
        value = _DIGITS.find(ch)
        if value < 0 or value >= alphabet:
            raise SpecFormatError(f"symbol {ch!r} outside alphabet of size {alphabet}", line_no)
        out.append(value)
    return out


def serialize_code(code: WiretapCode) -> str:
    if code.input_size > len(_DIGITS) or code.output_size > len(_DIGITS):
        raise ValueError("text serialization supports alphabets up to 36 symbols")
    lines = [
        f"avwc-code {CODE_FORMAT_VERSION}",
        f"block_length {code.n}",
        f"input_size {code.input_size}",
        f"output_size {code.output_size}",
        f"message_count {code.j_count}",
        f"randomizer_count {code.l_count}",
    ]
    for j in range(code.j_count):
        for l in range(code.l_count):
            lines.append(f"codeword {j} {l} {_encode_word(code.codewords[j, l])}")
    lines.append("decoder")
    tokens = ["-" if v == ERASURE else str(int(v)) for v in code.decoder]
    for start in range(0, len(tokens), 32):
        lines.append(" ".join(tokens[start : start + 32]))
    lines.append("end")
    return "\n".join(lines) + "\n"


def _parse_header_value(tokens: list[str], key: str, line_no: int) -> int:
    if len(tokens) != 2 or tokens[0] != key:
        raise SpecFormatError(f"expected '{key} <value>'", line_no)
    try:
        return int(tokens[1])
    except ValueError:
        raise SpecFormatError(f"expected an integer for {key}", line_no) from None


def _parse_code_block(lines: list[tuple[int, str]], pos: int) -> tuple[WiretapCode, int]:
    def take():
        nonlocal pos
        if pos >= len(lines):
            raise SpecFormatError("unexpected end of code block", lines[-1][0] if lines else 1)
        item = lines[pos]
        pos += 1
        return item

    line_no, content = take()
    if content.split() != ["avwc-code", str(CODE_FORMAT_VERSION)]:
        raise SpecFormatError(f"expected header 'avwc-code {CODE_FORMAT_VERSION}'", line_no)
    line_no, content = take()
    n = _parse_header_value(content.split(), "block_length", line_no)
    line_no, content = take()
    input_size = _parse_header_value(content.split(), "input_size", line_no)
    line_no, content = take()
    output_size = _parse_header_value(content.split(), "output_size", line_no)
    line_no, content = take()
    j_count = _parse_header_value(content.split(), "message_count", line_no)
    line_no, content = take()
    l_count = _parse_header_value(content.split(), "randomizer_count", line_no)

    codewords = np.zeros((j_count, l_count, n), dtype=int)
    seen = np.zeros((j_count, l_count), dtype=bool)
    for _ in range(j_count * l_count):
        line_no, content = take()
        tokens = content.split()
        if len(tokens) != 4 or tokens[0] != "codeword":
            raise SpecFormatError("expected 'codeword <j> <l> <word>'", line_no)
        j, l = int(tokens[1]), int(tokens[2])
        if not (0 <= j < j_count and 0 <= l < l_count):
            raise SpecFormatError("codeword indices out of range", line_no)
        if seen[j, l]:
            raise SpecFormatError(f"duplicate codeword ({j}, {l})", line_no)
        word = _decode_word(tokens[3], input_size, line_no)
        if len(word) != n:
            raise SpecFormatError(f"codeword length {len(word)}, expected {n}", line_no)
        codewords[j, l] = word
        seen[j, l] = True

    line_no, content = take()
    if content.strip() != "decoder":
        raise SpecFormatError("expected 'decoder'", line_no)
    needed = output_size**n
    assignment: list[int] = []
    while len(assignment) < needed:
        line_no, content = take()
        for token in content.split():
            if token == "-":
                assignment.append(ERASURE)
            else:
                try:
                    value = int(token)
                except ValueError:
                    raise SpecFormatError(f"bad decoder token {token!r}", line_no) from None
                if not 0 <= value < j_count:
                    raise SpecFormatError(f"decoder message {value} out of range", line_no)
                assignment.append(value)
        if len(assignment) > needed:
            raise SpecFormatError("decoder has too many assignments", line_no)
    line_no, content = take()
    if content.strip() != "end":
        raise SpecFormatError("expected 'end'", line_no)
    code = WiretapCode(
        n=n,
        input_size=input_size,
        output_size=output_size,
        codewords=codewords,
        decoder=np.asarray(assignment),
    )
    return code, pos


def parse_code(text: str) -> WiretapCode:
    lines = [(i, raw.split("#", 1)[0].strip()) for i, raw in enumerate(text.splitlines(), 1)]
    lines = [(i, s) for i, s in lines if s]
    code, pos = _parse_code_block(lines, 0)
    if pos != len(lines):
        raise SpecFormatError("trailing content after code block", lines[pos][0])
    return code


def serialize_random_code(rc: RandomCode) -> str:
    count = rc.member_count()
    lines = [
        f"avwc-random-code {CODE_FORMAT_VERSION}",
        f"member_count {count}",
        f"origin {rc.origin}",
    ]
    if np.allclose(rc.mu.probs, 1.0 / count, atol=1e-15):
        lines.append("weights uniform")
    else:
        lines.append("weights " + " ".join(repr(float(v)) for v in rc.mu.probs))
    for i in range(count):
        lines.append(f"member {i}")
        lines.append(serialize_code(rc.members[i]).rstrip("\n"))
    return "\n".join(lines) + "\n"


def parse_random_code(text: str) -> RandomCode:
    lines = [(i, raw.split("#", 1)[0].strip()) for i, raw in enumerate(text.splitlines(), 1)]
    lines = [(i, s) for i, s in lines if s]
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(lines):
            raise SpecFormatError("unexpected end of random-code file", lines[-1][0] if lines else 1)
        item = lines[pos]
        pos += 1
        return item

    line_no, content = take()
    if content.split() != ["avwc-random-code", str(CODE_FORMAT_VERSION)]:
        raise SpecFormatError(f"expected header 'avwc-random-code {CODE_FORMAT_VERSION}'", line_no)
    line_no, content = take()
    count = _parse_header_value(content.split(), "member_count", line_no)
    line_no, content = take()
    tokens = content.split()
    if len(tokens) != 2 or tokens[0] != "origin":
        raise SpecFormatError("expected 'origin <tag>'", line_no)
    origin = tokens[1]
    if origin not in ("permutation-family", "reduced", "explicit"):
        raise SpecFormatError(f"unknown origin {origin!r}", line_no)
    line_no, content = take()
    tokens = content.split()
    if tokens[0] != "weights":
        raise SpecFormatError("expected 'weights'", line_no)
    if tokens[1:] == ["uniform"]:
        mu = Distribution.uniform(count)
    else:
        if len(tokens) != count + 1:
            raise SpecFormatError(f"expected {count} weights", line_no)
        mu = Distribution(np.asarray([float(t) for t in tokens[1:]]))

    members = []
    for i in range(count):
        line_no, content = take()
        if content.split() != ["member", str(i)]:
            raise SpecFormatError(f"expected 'member {i}'", line_no)
        code, pos = _parse_code_block(lines, pos)
        members.append(code)
    if pos != len(lines):
        raise SpecFormatError("trailing content after members", lines[pos][0])
    return RandomCode(members=members, mu=mu, origin=origin)
