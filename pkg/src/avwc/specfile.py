"""Channel-spec files: a line-oriented text format for AVWC instances.

Grammar (one directive per line, ``#`` starts a comment, blank lines ignored)::

    avwc 1
    states <count> [names <n1> <n2> ...]
    inputs <count> [labels <l1> <l2> ...]
    outputs main <count> [labels ...]
    outputs eaves <count> [labels ...]
    main <state-name-or-index>
    <row of probabilities>            # one line per input symbol
    ...
    eaves <state-name-or-index>
    ...
    dist <name> inputs|states <p1> <p2> ...

Every state needs one ``main`` and one ``eaves`` matrix.  Rows must sum to
one within 1e-9; numbers are parsed as decimal doubles.  Duplicate state
names and duplicate matrix blocks are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import AVWC, Channel, Distribution, STOCHASTIC_ATOL
from .errors import SpecFormatError

FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class ChannelSpecFile:
    avwc: AVWC
    state_names: tuple[str, ...]
    input_labels: tuple[str, ...]
    main_output_labels: tuple[str, ...]
    eaves_output_labels: tuple[str, ...]
    distributions: dict = field(default_factory=dict)  # name -> (kind, Distribution)


def _parse_number(token: str, line_no: int, column: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise SpecFormatError(f"expected a number, got {token!r}", line_no, column) from None
    if not np.isfinite(value):
        raise SpecFormatError(f"non-finite number {token!r}", line_no, column)
    return value


def _parse_count(token: str, line_no: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise SpecFormatError(f"expected a positive integer, got {token!r}", line_no) from None
    if value < 1:
        raise SpecFormatError(f"count must be positive, got {value}", line_no)
    return value


class _Lines:
    def __init__(self, text: str):
        self.items: list[tuple[int, str]] = []
        for i, raw in enumerate(text.splitlines(), start=1):
            stripped = raw.split("#", 1)[0].strip()
            if stripped:
                self.items.append((i, stripped))
        self.pos = 0

    def peek(self):
        return self.items[self.pos] if self.pos < len(self.items) else None

    def next(self):
        item = self.peek()
        if item is not None:
            self.pos += 1
        return item


def parse_spec(text: str) -> ChannelSpecFile:
    lines = _Lines(text)
    header = lines.next()
    if header is None or header[1].split() != ["avwc", str(FORMAT_VERSION)]:
        line_no = header[0] if header else 1
        raise SpecFormatError(f"expected header 'avwc {FORMAT_VERSION}'", line_no)

    state_count = None
    state_names: list[str] = []
    sizes: dict[str, int] = {}
    labels: dict[str, tuple[str, ...]] = {}
    main_blocks: dict[int, np.ndarray] = {}
    eaves_blocks: dict[int, np.ndarray] = {}
    dists: dict[str, tuple[str, Distribution]] = {}

    def state_index(token: str, line_no: int) -> int:
        if token in state_names:
            return state_names.index(token)
        try:
            idx = int(token)
        except ValueError:
            raise SpecFormatError(f"unknown state {token!r}", line_no) from None
        if not 0 <= idx < state_count:
            raise SpecFormatError(f"state index {idx} outside [0, {state_count})", line_no)
        return idx

    def read_matrix(rows: int, cols: int, what: str) -> np.ndarray:
        matrix = np.zeros((rows, cols))
        for r in range(rows):
            item = lines.next()
            if item is None:
                raise SpecFormatError(f"{what}: missing row {r}", len(text.splitlines()))
            line_no, content = item
            tokens = content.split()
            if len(tokens) != cols:
                raise SpecFormatError(
                    f"{what}: row {r} has {len(tokens)} entries, expected {cols}", line_no
                )
            for cidx, token in enumerate(tokens):
                value = _parse_number(token, line_no, cidx + 1)
                if value < 0:
                    raise SpecFormatError(f"{what}: row {r} has negative entry", line_no, cidx + 1)
                matrix[r, cidx] = value
            total = matrix[r].sum()
            if abs(total - 1.0) > STOCHASTIC_ATOL:
                raise SpecFormatError(f"{what}: row {r} sums to {total!r}, not 1", line_no)
        return matrix

    while (item := lines.next()) is not None:
        line_no, content = item
        tokens = content.split()
        keyword = tokens[0]
        if keyword == "states":
            if state_count is not None:
                raise SpecFormatError("duplicate 'states' directive", line_no)
            if len(tokens) < 2:
                raise SpecFormatError("'states' needs a count", line_no)
            state_count = _parse_count(tokens[1], line_no)
            if len(tokens) > 2:
                if tokens[2] != "names" or len(tokens) != 3 + state_count:
                    raise SpecFormatError(
                        f"'states' wants 'names' plus exactly {state_count} entries", line_no
                    )
                state_names = tokens[3:]
                if len(set(state_names)) != state_count:
                    raise SpecFormatError("duplicate state names", line_no)
            else:
                state_names = [str(i) for i in range(state_count)]
        elif keyword == "inputs":
            if len(tokens) < 2:
                raise SpecFormatError("'inputs' needs a count", line_no)
            sizes["inputs"] = _parse_count(tokens[1], line_no)
            if len(tokens) > 2:
                if tokens[2] != "labels" or len(tokens) != 3 + sizes["inputs"]:
                    raise SpecFormatError("'inputs' wants 'labels' plus one entry per symbol", line_no)
                labels["inputs"] = tuple(tokens[3:])
        elif keyword == "outputs":
            if len(tokens) < 3 or tokens[1] not in ("main", "eaves"):
                raise SpecFormatError("'outputs' wants 'main' or 'eaves' and a count", line_no)
            key = f"outputs-{tokens[1]}"
            sizes[key] = _parse_count(tokens[2], line_no)
            if len(tokens) > 3:
                if tokens[3] != "labels" or len(tokens) != 4 + sizes[key]:
                    raise SpecFormatError("'outputs' wants 'labels' plus one entry per symbol", line_no)
                labels[key] = tuple(tokens[4:])
        elif keyword in ("main", "eaves"):
            if state_count is None or "inputs" not in sizes or f"outputs-{keyword}" not in sizes:
                raise SpecFormatError(
                    f"'{keyword}' block before 'states', 'inputs' and 'outputs {keyword}'", line_no
                )
            if len(tokens) != 2:
                raise SpecFormatError(f"'{keyword}' wants exactly one state", line_no)
            idx = state_index(tokens[1], line_no)
            blocks = main_blocks if keyword == "main" else eaves_blocks
            if idx in blocks:
                raise SpecFormatError(f"duplicate '{keyword}' matrix for state {tokens[1]}", line_no)
            blocks[idx] = read_matrix(
                sizes["inputs"], sizes[f"outputs-{keyword}"], f"{keyword} matrix for state {tokens[1]}"
            )
        elif keyword == "dist":
            if len(tokens) < 4 or tokens[2] not in ("inputs", "states"):
                raise SpecFormatError("'dist' wants a name, 'inputs'|'states' and entries", line_no)
            name = tokens[1]
            if name in dists:
                raise SpecFormatError(f"duplicate distribution {name!r}", line_no)
            values = [_parse_number(tok, line_no, i + 4) for i, tok in enumerate(tokens[3:])]
            expected = sizes.get("inputs") if tokens[2] == "inputs" else state_count
            if expected is None:
                raise SpecFormatError("'dist' before the relevant size directive", line_no)
            if len(values) != expected:
                raise SpecFormatError(
                    f"distribution {name!r} has {len(values)} entries, expected {expected}", line_no
                )
            try:
                dists[name] = (tokens[2], Distribution(np.asarray(values)))
            except ValueError as exc:
                raise SpecFormatError(f"distribution {name!r}: {exc}", line_no) from None
        else:
            raise SpecFormatError(f"unknown directive {keyword!r}", line_no)

    if state_count is None:
        raise SpecFormatError("missing 'states' directive", 1)
    for required in ("inputs", "outputs-main", "outputs-eaves"):
        if required not in sizes:
            raise SpecFormatError(f"missing '{required.replace('-', ' ')}' directive", 1)
    missing_main = [state_names[i] for i in range(state_count) if i not in main_blocks]
    missing_eaves = [state_names[i] for i in range(state_count) if i not in eaves_blocks]
    if missing_main:
        raise SpecFormatError(f"missing main matrices for states {missing_main}", 1)
    if missing_eaves:
        raise SpecFormatError(f"missing eaves matrices for states {missing_eaves}", 1)

    avwc = AVWC(
        main=tuple(Channel(main_blocks[i]) for i in range(state_count)),
        eaves=tuple(Channel(eaves_blocks[i]) for i in range(state_count)),
    )
    return ChannelSpecFile(
        avwc=avwc,
        state_names=tuple(state_names),
        input_labels=labels.get("inputs", tuple(str(i) for i in range(sizes["inputs"]))),
        main_output_labels=labels.get(
            "outputs-main", tuple(str(i) for i in range(sizes["outputs-main"]))
        ),
        eaves_output_labels=labels.get(
            "outputs-eaves", tuple(str(i) for i in range(sizes["outputs-eaves"]))
        ),
        distributions=dists,
    )


def serialize_spec(spec: ChannelSpecFile) -> str:
    """Canonical text for a spec; parsing it back yields an identical AVWC."""
    avwc = spec.avwc
    out = [f"avwc {FORMAT_VERSION}"]
    out.append("states " + str(avwc.state_count) + " names " + " ".join(spec.state_names))
    out.append("inputs " + str(avwc.input_size) + " labels " + " ".join(spec.input_labels))
    out.append(
        "outputs main "
        + str(avwc.main_output_size)
        + " labels "
        + " ".join(spec.main_output_labels)
    )
    out.append(
        "outputs eaves "
        + str(avwc.eaves_output_size)
        + " labels "
        + " ".join(spec.eaves_output_labels)
    )
    for kind in ("main", "eaves"):
        family = avwc.main if kind == "main" else avwc.eaves
        for idx, channel in enumerate(family):
            out.append(f"{kind} {spec.state_names[idx]}")
            for row in channel.rows:
                out.append(" ".join(repr(float(v)) for v in row))
    for name, (kind, dist) in spec.distributions.items():
        out.append(f"dist {name} {kind} " + " ".join(repr(float(v)) for v in dist.probs))
    return "\n".join(out) + "\n"


def load_spec(path: str) -> ChannelSpecFile:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_spec(handle.read())
