"""Log abstraction: online template mining over a fixed-depth parse tree.

Raw lines are masked (IPv4 addresses, absolute paths, hex constants and
bare integers become the ``<*>`` placeholder), whitespace-tokenized, and
routed through a parse tree keyed first by token count and then by the
leading tokens.  Tokens containing digits route through the catch-all
``<*>`` child, so unmasked numeric fields still share a leaf.  Each leaf
holds the templates whose lines shared that route; a line merges into the
most similar template at or above the similarity threshold (positions
that disagree become wildcards) or registers a new template otherwise.

A frozen miner is read-only and safe to share across workers: lines that
match no known template map to the reserved UNKNOWN event instead of
creating one, so prediction never mutates a trained model.
"""

import hashlib
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ValidationError

WILDCARD = "<*>"
UNKNOWN_EVENT_ID = "<unknown>"
REGISTRY_HEADER = "ncc-templates v1"

# Ordered pre-tokenization rewrites. Order matters: IPv4 before bare
# integers (octets must not be masked one by one), paths before integers
# (the :line suffix belongs to the path).
DEFAULT_MASK_RULES: tuple[tuple[str, str], ...] = (
    (r"(?<![\w.])(?:\d{1,3}\.){3}\d{1,3}(?![\w.])", WILDCARD),
    (r"(?<![\w/])/(?:[\w.+-]+/)*[\w.+-]+(?::\d+)?", WILDCARD),
    (r"\b0[xX][0-9a-fA-F]+\b", WILDCARD),
    (r"(?<![\w.])\d+(?![\w.])", WILDCARD),
)


@dataclass(frozen=True)
class AbstractionConfig:
    """Tunables for the template miner.

    ``tree_depth`` counts the levels before leaf template groups (the
    token-count level plus ``tree_depth - 2`` token levels).  A line is
    routed by at most its first ``tree_depth - 2`` tokens.
    """

    tree_depth: int = 4
    similarity_threshold: float = 0.4
    max_children: int = 100
    mask_rules: tuple[tuple[str, str], ...] = DEFAULT_MASK_RULES

    def __post_init__(self):
        object.__setattr__(
            self, "mask_rules", tuple((str(p), str(r)) for p, r in self.mask_rules)
        )
        if self.tree_depth < 2:
            raise ValidationError(f"tree_depth must be >= 2, got {self.tree_depth}")
        if not 0.0 < self.similarity_threshold <= 1.0:
            raise ValidationError(
                f"similarity_threshold must be in (0, 1], got {self.similarity_threshold}"
            )
        if self.max_children < 1:
            raise ValidationError(f"max_children must be >= 1, got {self.max_children}")


@lru_cache(maxsize=64)
def _compiled_rules(mask_rules: tuple[tuple[str, str], ...]):
    return tuple((re.compile(pattern), repl) for pattern, repl in mask_rules)


def preprocess(line: str, config: AbstractionConfig) -> list[str]:
    """Apply the mask rules in order, then split on whitespace runs.

    Punctuation stays attached to its token, so ``cmd.pathinfo=/a/b:1``
    masks to the single token ``cmd.pathinfo=<*>``.  Empty or blank lines
    yield an empty sequence.
    """
    for pattern, placeholder in _compiled_rules(config.mask_rules):
        line = pattern.sub(placeholder, line)
    return line.split()


@dataclass
class LogTemplate:
    """A mined event pattern: literal tokens with wildcard slots."""

    event_id: str
    tokens: tuple[str, ...]
    match_count: int = 1

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def wildcard_positions(self) -> frozenset[int]:
        return frozenset(i for i, tok in enumerate(self.tokens) if tok == WILDCARD)


def seq_similarity(tokens: Sequence[str], template: LogTemplate) -> float:
    """Position-wise match ratio of a token sequence against a template.

    A wildcard slot matches any token.  Lengths must agree; tree routing
    guarantees that for internal callers, a mismatch is a caller bug.
    """
    if len(tokens) != len(template.tokens):
        raise ValueError(
            f"token count {len(tokens)} does not match template "
            f"{template.event_id} of length {len(template.tokens)}"
        )
    if not tokens:
        return 1.0
    hits = sum(
        1 for tok, slot in zip(tokens, template.tokens) if slot == WILDCARD or slot == tok
    )
    return hits / len(tokens)


@dataclass(frozen=True)
class EventSequence:
    """Per-line event ids for one log, with the 1-based source line numbers."""

    source: str
    events: tuple[str, ...]
    line_numbers: tuple[int, ...]

    def __post_init__(self):
        if len(self.events) != len(self.line_numbers):
            raise ValueError("events and line_numbers must have equal length")

    def __len__(self) -> int:
        return len(self.events)

    def distinct_events(self) -> frozenset[str]:
        return frozenset(self.events) - {UNKNOWN_EVENT_ID}


def event_sort_key(event_id: str):
    """Deterministic ordering: miner ids ``e<n>`` numerically, others after."""
    if event_id.startswith("e") and event_id[1:].isdigit():
        return (0, int(event_id[1:]), event_id)
    return (1, 0, event_id)


class _Node:
    __slots__ = ("children", "template_ids")

    def __init__(self):
        self.children: dict[str, _Node] = {}
        self.template_ids: list[str] = []


class TemplateMiner:
    """Online Drain-style miner; owns the parse tree and template registry.

    Training (mutating) mode requires exclusive access.  After ``freeze()``
    the state is immutable and may be shared across parallel workers.
    """

    def __init__(self, config: AbstractionConfig | None = None):
        self.config = config or AbstractionConfig()
        self._root: dict[int, _Node] = {}
        self._templates: dict[str, LogTemplate] = {}
        self._frozen = False
        self._next_index = 1

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> "TemplateMiner":
        self._frozen = True
        return self

    @property
    def templates(self) -> dict[str, LogTemplate]:
        """Registry view, keyed by event id in creation order. Do not mutate."""
        return self._templates

    def template_text(self, event_id: str) -> str:
        if event_id == UNKNOWN_EVENT_ID:
            return UNKNOWN_EVENT_ID
        return self._templates[event_id].text

    # -- tree routing -------------------------------------------------

    def _route_key(self, token: str) -> str:
        # Digit-bearing tokens share the wildcard child so that unmasked
        # numeric fields ("Took 10 seconds") do not split leaves.
        if token == WILDCARD or any(ch.isdigit() for ch in token):
            return WILDCARD
        return token

    def _route_levels(self, tokens: Sequence[str]) -> int:
        return min(self.config.tree_depth - 2, len(tokens) - 1)

    def _search_leaf(self, tokens: Sequence[str]) -> _Node | None:
        node = self._root.get(len(tokens))
        if node is None:
            return None
        for i in range(self._route_levels(tokens)):
            key = self._route_key(tokens[i])
            child = node.children.get(key)
            if child is None and key != WILDCARD:
                child = node.children.get(WILDCARD)
            if child is None:
                return None
            node = child
        return node

    def _insert_leaf(self, tokens: Sequence[str]) -> _Node:
        node = self._root.setdefault(len(tokens), _Node())
        for i in range(self._route_levels(tokens)):
            key = self._route_key(tokens[i])
            child = node.children.get(key)
            if child is None:
                literal_count = len(node.children) - (WILDCARD in node.children)
                if key != WILDCARD and literal_count >= self.config.max_children:
                    key = WILDCARD  # branch cap reached: overflow lane
                child = node.children.get(key)
                if child is None:
                    child = node.children.setdefault(key, _Node())
            node = child
        return node

    # -- parsing ------------------------------------------------------

    def _best_match(self, leaf: _Node, tokens: Sequence[str]):
        best: LogTemplate | None = None
        best_sim = -1.0
        for tid in leaf.template_ids:
            template = self._templates[tid]
            sim = seq_similarity(tokens, template)
            if sim > best_sim:
                best, best_sim = template, sim
        return best, best_sim

    def parse_line(self, line: str) -> str | None:
        """Return the event id for one raw line, or None for a blank line.

        Training mode merges or registers templates; frozen mode maps
        unmatched lines to UNKNOWN_EVENT_ID and never mutates state.
        """
        tokens = preprocess(line, self.config)
        if not tokens:
            return None
        leaf = self._search_leaf(tokens)
        if leaf is not None and leaf.template_ids:
            template, sim = self._best_match(leaf, tokens)
            if sim >= self.config.similarity_threshold:
                if not self._frozen:
                    self._merge(template, tokens)
                return template.event_id
        if self._frozen:
            return UNKNOWN_EVENT_ID
        return self._register(tokens).event_id

    def _merge(self, template: LogTemplate, tokens: Sequence[str]) -> None:
        merged = tuple(
            slot if slot == tok else WILDCARD for slot, tok in zip(template.tokens, tokens)
        )
        template.tokens = merged
        template.match_count += 1

    def _register(self, tokens: Sequence[str]) -> LogTemplate:
        event_id = f"e{self._next_index}"
        self._next_index += 1
        template = LogTemplate(event_id, tuple(tokens), 1)
        self._templates[event_id] = template
        self._insert_leaf(tokens).template_ids.append(event_id)
        return template

    def parse_log(self, lines: Iterable[str], source: str = "log") -> EventSequence:
        """Parse lines in order, skipping blanks; one event per non-blank line."""
        events: list[str] = []
        numbers: list[int] = []
        for lineno, line in enumerate(lines, start=1):
            event_id = self.parse_line(line)
            if event_id is None:
                continue
            events.append(event_id)
            numbers.append(lineno)
        return EventSequence(source, tuple(events), tuple(numbers))

    def parse_file(self, path) -> EventSequence:
        path = Path(path)
        text = path.read_text(encoding="utf-8", errors="replace")
        return self.parse_log(text.splitlines(), source=path.stem)

    # -- registry persistence ------------------------------------------

    def export_registry(self) -> str:
        lines = [REGISTRY_HEADER]
        for template in self._templates.values():
            lines.append(f"{template.event_id}\t{template.match_count}\t{template.text}")
        return "\n".join(lines) + "\n"

    def save_registry(self, path) -> None:
        Path(path).write_text(self.export_registry(), encoding="utf-8")

    def registry_fingerprint(self) -> str:
        return hashlib.sha256(self.export_registry().encode("utf-8")).hexdigest()

    @classmethod
    def from_registry_text(
        cls, text: str, config: AbstractionConfig | None = None
    ) -> "TemplateMiner":
        """Rebuild a miner from an exported registry (tree re-derived)."""
        lines = text.splitlines()
        if not lines or lines[0] != REGISTRY_HEADER:
            found = lines[0] if lines else "<empty>"
            raise ValidationError(
                f"template registry header: expected {REGISTRY_HEADER!r}, found {found!r}"
            )
        miner = cls(config)
        max_index = 0
        for lineno, row in enumerate(lines[1:], start=2):
            if not row:
                continue
            parts = row.split("\t", 2)
            if len(parts) != 3:
                raise ValidationError(f"template registry line {lineno}: expected 3 fields")
            event_id, count_text, template_text = parts
            if event_id in miner._templates:
                raise ValidationError(
                    f"template registry line {lineno}: duplicate event id {event_id!r}"
                )
            try:
                match_count = int(count_text)
            except ValueError:
                raise ValidationError(
                    f"template registry line {lineno}: match_count {count_text!r} is not an integer"
                ) from None
            tokens = tuple(template_text.split(" "))
            if not tokens or tokens == ("",):
                raise ValidationError(f"template registry line {lineno}: empty template")
            template = LogTemplate(event_id, tokens, match_count)
            miner._templates[event_id] = template
            miner._insert_leaf(tokens).template_ids.append(event_id)
            if event_id.startswith("e") and event_id[1:].isdigit():
                max_index = max(max_index, int(event_id[1:]))
        miner._next_index = max_index + 1
        return miner

    @classmethod
    def load_registry(cls, path, config: AbstractionConfig | None = None) -> "TemplateMiner":
        text = Path(path).read_text(encoding="utf-8")
        return cls.from_registry_text(text, config)
