# -*- coding: utf-8 -*-
"""
stream module

Text format for update streams and the workload generators.

A stream starts with ``n <int>``, optionally followed by ``max_batch <int>``, and
then holds batches. Each batch opens with ``#batch ins`` or ``#batch del`` and lists
one ``<u> <v>`` edge per line. A ``#batch mix`` block lists ``+ <u> <v>`` and
``- <u> <v>`` lines and is split into an insert batch followed by a delete batch.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx

from bdcore.balanced import BATCH_KINDS, DELETE, INSERT
from bdcore.exceptions import ParameterError, StreamParseError
from bdcore.utils import PURPOSE_GENERATOR, make_generator, normalize_edge

LOGGER = logging.getLogger(__name__)

MIXED = "mix"
BATCH_PREFIX = "#batch"
GENERATOR_KINDS = ("gnm-random", "clique-plant", "sliding-window", "adversarial-stair")


@dataclass(frozen=True)
class UpdateBatch:
    """A uniform batch of edge insertions or deletions."""

    kind: str
    edges: tuple = ()

    def __len__(self):
        return len(self.edges)


@dataclass
class UpdateStream:
    """
    Header and ordered batches of an update stream.

    Parameters
    ----------
    n : int
        Vertex universe size.
    batches : list of UpdateBatch
        Batches in application order.
    max_batch : int, optional
        Declared maximum batch size.
    """

    n: int
    batches: list = field(default_factory=list)
    max_batch: int = None

    def __len__(self):
        return len(self.batches)

    def __iter__(self):
        return iter(self.batches)

    def add(self, kind, edges):
        """Append a batch."""
        self.batches.append(UpdateBatch(kind, tuple(tuple(e) for e in edges)))

    @classmethod
    def parse(cls, text):
        """
        Parse stream text.

        Parameters
        ----------
        text : str
            Stream contents.

        Returns
        -------
        UpdateStream
            Parsed stream.

        Raises
        ------
        StreamParseError
            On any malformed line; the error carries the 1-based line number.
        """
        lines = [
            (lineno, line.strip())
            for lineno, line in enumerate(text.splitlines(), start=1)
            if line.strip()
        ]
        if not lines:
            raise StreamParseError("empty stream, expected header 'n <int>'", 1)

        lineno, header = lines[0]
        n = _parse_header(header, "n", lineno)
        stream = cls(n)
        body = lines[1:]
        if body and body[0][1].split()[0] == "max_batch":
            stream.max_batch = _parse_header(body[0][1], "max_batch", body[0][0])
            body = body[1:]

        kind = None
        opened_at = None
        edges = []

        def close():
            if kind is None:
                return
            if kind == MIXED:
                inserts = [e for sign, e in edges if sign == "+"]
                deletes = [e for sign, e in edges if sign == "-"]
                batches = [(INSERT, inserts), (DELETE, deletes)]
                batches = [(k, es) for k, es in batches if es] or [(INSERT, [])]
            else:
                batches = [(kind, edges)]
            for batch_kind, batch_edges in batches:
                if stream.max_batch is not None and len(batch_edges) > stream.max_batch:
                    raise StreamParseError(
                        f"batch of {len(batch_edges)} edges exceeds max_batch "
                        f"{stream.max_batch}",
                        opened_at,
                    )
                stream.add(batch_kind, batch_edges)

        for lineno, line in body:
            tokens = line.split()
            if tokens[0] == BATCH_PREFIX:
                close()
                if len(tokens) != 2 or tokens[1] not in BATCH_KINDS + (MIXED,):
                    raise StreamParseError(
                        f"expected '#batch ins|del|mix', got {line!r}", lineno
                    )
                kind, opened_at, edges = tokens[1], lineno, []
                continue
            if kind is None:
                raise StreamParseError(f"edge line outside a batch: {line!r}", lineno)
            if kind == MIXED:
                if len(tokens) != 3 or tokens[0] not in ("+", "-"):
                    raise StreamParseError(
                        f"expected '+ <u> <v>' or '- <u> <v>', got {line!r}", lineno
                    )
                edges.append((tokens[0], _parse_edge(tokens[1:], line, lineno)))
            else:
                if len(tokens) != 2:
                    raise StreamParseError(f"expected '<u> <v>', got {line!r}", lineno)
                edges.append(_parse_edge(tokens, line, lineno))
        close()

        return stream

    @classmethod
    def from_file(cls, fpath):
        """Read and parse a stream file."""
        with open(fpath, "r", encoding="utf-8") as f:
            return cls.parse(f.read())

    def serialize(self):
        """
        Canonical text of the stream.

        Returns
        -------
        str
            Header, then one ``#batch ins|del`` block per batch.
        """
        lines = [f"n {self.n}"]
        if self.max_batch is not None:
            lines.append(f"max_batch {self.max_batch}")
        for batch in self.batches:
            lines.append(f"{BATCH_PREFIX} {batch.kind}")
            lines.extend(f"{u} {v}" for u, v in batch.edges)
        return "\n".join(lines) + "\n"

    def to_file(self, fpath):
        """Write the canonical text to a file."""
        Path(fpath).write_text(self.serialize(), encoding="utf-8")

    def final_edges(self):
        """
        Live edge set after replaying every batch.

        Invalid updates (duplicates, missing deletions, self-loops and unknown
        vertices) are skipped the same way a balanced instance rejects them.
        """
        live = set()
        for batch in self.batches:
            for u, v in batch.edges:
                if u == v or not (0 <= u < self.n and 0 <= v < self.n):
                    continue
                pair = normalize_edge(u, v)
                if batch.kind == INSERT:
                    live.add(pair)
                else:
                    live.discard(pair)
        return live


def _parse_header(line, name, lineno):
    tokens = line.split()
    if len(tokens) != 2 or tokens[0] != name:
        raise StreamParseError(f"expected '{name} <int>', got {line!r}", lineno)
    try:
        value = int(tokens[1])
    except ValueError as e:
        raise StreamParseError(f"invalid {name} value {tokens[1]!r}", lineno) from e
    if value < 0:
        raise StreamParseError(f"{name} must be non-negative, got {value}", lineno)
    return value


def _parse_edge(tokens, line, lineno):
    try:
        u, v = (int(t) for t in tokens)
    except ValueError as e:
        raise StreamParseError(f"invalid edge line {line!r}", lineno) from e
    if u < 0 or v < 0:
        raise StreamParseError(f"negative vertex id in {line!r}", lineno)
    return (u, v)


# ------------------------------------------------------------------ generators
def _check_edge_count(n, m):
    if m < 0 or m > n * (n - 1) // 2:
        raise ParameterError(
            f"Infeasible parameters: m={m} edges do not fit on n={n} vertices "
            f"(at most {n * (n - 1) // 2})"
        )


def _random_edges(n, m, rng):
    """m distinct random edges of G(n, m) in random order."""
    _check_edge_count(n, m)
    graph = nx.gnm_random_graph(n, m, seed=int(rng.integers(2**32)))
    edges = sorted(normalize_edge(u, v) for u, v in graph.edges())
    return [edges[i] for i in rng.permutation(len(edges))]


def _chunks(items, parts):
    parts = max(1, parts)
    size = -(-len(items) // parts) if items else 0
    return [items[i * size : (i + 1) * size] for i in range(parts)]


def gen_gnm_random(n, m, batches, rng):
    """Insert G(n, m) over the batches, deleting a quarter of the live edges every
    third batch."""
    edges = _random_edges(n, m, rng)
    kinds = [DELETE if i % 3 == 2 else INSERT for i in range(batches)]
    chunks = iter(_chunks(edges, kinds.count(INSERT)))
    stream = UpdateStream(n)
    live = []
    for kind in kinds:
        if kind == INSERT:
            chunk = next(chunks)
            live.extend(chunk)
            stream.add(INSERT, chunk)
        else:
            count = len(live) // 4
            picked = set()
            if count:
                picked = set(rng.choice(len(live), size=count, replace=False).tolist())
            stream.add(DELETE, [e for i, e in enumerate(live) if i in picked])
            live = [e for i, e in enumerate(live) if i not in picked]
    return stream


def gen_clique_plant(n, m, k, batches, rng):
    """Insert-only background G(n, m) with a planted k-clique."""
    if not 2 <= k <= n:
        raise ParameterError(f"Invalid clique size k={k} for n={n}")
    members = sorted(rng.choice(n, size=k, replace=False).tolist())
    clique = {
        normalize_edge(u, v) for i, u in enumerate(members) for v in members[i + 1 :]
    }
    edges = set(_random_edges(n, m, rng)) | clique
    ordered = sorted(edges)
    ordered = [ordered[i] for i in rng.permutation(len(ordered))]
    stream = UpdateStream(n)
    for chunk in _chunks(ordered, batches):
        stream.add(INSERT, chunk)
    return stream


def gen_sliding_window(n, m, batches, window, rng):
    """Insert chunks of a random edge sequence, deleting each chunk ``window``
    steps after its insertion."""
    if window < 1:
        raise ParameterError(f"Invalid window={window}: must be >= 1")
    chunks = _chunks(_random_edges(n, m, rng), batches)
    stream = UpdateStream(n)
    for i, chunk in enumerate(chunks):
        stream.add(INSERT, chunk)
        if i >= window:
            stream.add(DELETE, chunks[i - window])
    return stream


def gen_adversarial_stair(n, batches, rng, step=3):
    """
    Staircase of increasing out-degrees plus churn at the top.

    Vertices are placed on a random line; vertex i is joined to its ``step``
    predecessors, inserted bottom-up so that out-degrees grow along the line. The
    remaining batches alternately insert and delete edges at the top vertex, which
    drives tokens down the whole staircase.
    """
    order = rng.permutation(n).tolist()
    stream = UpdateStream(n)
    rungs = []
    for i in range(1, n):
        rungs.append(
            [normalize_edge(order[i], order[j]) for j in range(max(0, i - step), i)]
        )
    stair_batches = max(1, batches // 2)
    for chunk in _chunks(rungs, stair_batches):
        stream.add(INSERT, [e for rung in chunk for e in rung])

    live = {e for rung in rungs for e in rung}
    top = order[-1] if order else 0
    free = [
        normalize_edge(top, v) for v in order[:-1]
        if normalize_edge(top, v) not in live
    ]
    for i in range(batches - stair_batches):
        if not free:
            break
        if i % 2 == 0:
            size = max(1, len(free) // 4)
            picked = sorted(rng.choice(len(free), size=size, replace=False))
            churn = [free[j] for j in picked]
            stream.add(INSERT, churn)
        else:
            stream.add(DELETE, churn)
    return stream


def gen(kind, seed=0, **params):
    """
    Generate a deterministic update stream.

    Parameters
    ----------
    kind : str
        One of gnm-random, clique-plant, sliding-window, adversarial-stair.
    seed : int, optional
        Root seed, by default 0.
    **params
        n, m, batches, and k (clique-plant) or window (sliding-window).

    Returns
    -------
    UpdateStream
        Generated stream; identical arguments give identical streams.

    Raises
    ------
    ParameterError
        On an unknown kind or infeasible parameters.
    """
    rng = make_generator(seed, 0, PURPOSE_GENERATOR)
    n = params["n"]
    batches = params.get("batches", 10)
    if kind == "gnm-random":
        stream = gen_gnm_random(n, params["m"], batches, rng)
    elif kind == "clique-plant":
        stream = gen_clique_plant(n, params.get("m", 0), params["k"], batches, rng)
    elif kind == "sliding-window":
        stream = gen_sliding_window(
            n, params["m"], batches, params.get("window", 3), rng
        )
    elif kind == "adversarial-stair":
        stream = gen_adversarial_stair(n, batches, rng)
    else:
        raise ParameterError(
            f"Unknown generator kind {kind!r}: must be one of {list(GENERATOR_KINDS)}"
        )

    LOGGER.info(
        f"Generated {kind} stream with n={n}, {len(stream)} batches, seed={seed}"
    )
    return stream
