"""Failure cause prediction by score summation over lookup-table rows.

A new failed log is parsed in frozen mode, the rows of its distinct
in-table events are summed, and the cause with the highest total wins;
score ties break toward the rarer class (larger icf), then the lower
cause id.  When no event of the log is in the table the majority training
class is returned with an explicit fallback flag.
"""

from dataclasses import dataclass
from typing import Iterable

from .abstraction import EventSequence, TemplateMiner, event_sort_key
from .errors import ValidationError
from .table import STAGE_FINAL, ScoreTable


@dataclass(frozen=True)
class Contributor:
    """One in-table event of the scored log."""

    event_id: str
    score: float  # maximum cell of the event's row
    cause_score: float  # the event's cell in the predicted cause's column
    line_numbers: tuple[int, ...]


@dataclass(frozen=True)
class Prediction:
    cause: int
    scores: tuple[float, ...]
    contributors: tuple[Contributor, ...]
    fallback_used: bool


@dataclass(frozen=True)
class FlaggedLine:
    line_number: int
    event_id: str
    template: str
    score: float


def _check_final(table: ScoreTable) -> None:
    if table.stage != STAGE_FINAL:
        raise ValidationError(f"prediction requires a final table, got stage {table.stage!r}")


def score_log(table: ScoreTable, events: EventSequence) -> list[float]:
    """Sum the rows of the log's distinct in-table events (presence, not
    multiplicity).  Events absent from the table, including UNKNOWN,
    contribute nothing."""
    _check_final(table)
    scores = [0.0] * table.k
    for eid in sorted(events.distinct_events(), key=event_sort_key):
        row = table.rows.get(eid)
        if row is None:
            continue
        for j, value in enumerate(row):
            scores[j] += value
    return scores


def predict(table: ScoreTable, events: EventSequence) -> Prediction:
    _check_final(table)
    scores = score_log(table, events)
    if not any(scores):
        # No shared evidence at all: majority training class, flagged.
        k = table.k
        cause = max(range(k), key=lambda j: (table.n_per_cause[j], -j))
        return Prediction(cause, tuple(scores), (), True)

    cause = max(range(table.k), key=lambda j: (scores[j], table.icf[j], -j))

    contributors = []
    for eid in sorted(events.distinct_events(), key=event_sort_key):
        row = table.rows.get(eid)
        if row is None:
            continue
        lines = tuple(
            ln for ln, ev in zip(events.line_numbers, events.events) if ev == eid
        )
        contributors.append(Contributor(eid, max(row), row[cause], lines))
    contributors.sort(key=lambda c: (-c.score, event_sort_key(c.event_id)))
    return Prediction(cause, tuple(scores), tuple(contributors), False)


def predict_lines(
    miner: TemplateMiner, table: ScoreTable, lines: Iterable[str], source: str = "log"
) -> tuple[Prediction, EventSequence]:
    """Parse raw lines in frozen mode and predict; never mutates the model."""
    if not miner.frozen:
        raise ValidationError("prediction requires a frozen miner")
    events = miner.parse_log(lines, source)
    return predict(table, events), events


def flag_lines(
    prediction: Prediction, events: EventSequence, miner: TemplateMiner
) -> list[FlaggedLine]:
    """Line references of contributing events, strongest evidence first.

    Ordered by the event's cell score in the predicted cause's column
    (descending, ties by event id), with the template text for display.
    Fallback predictions have no contributors and flag nothing.
    """
    if prediction.fallback_used:
        return []
    present = events.distinct_events()
    if any(c.event_id not in present for c in prediction.contributors):
        raise ValidationError("prediction was not produced from this log")
    ordered = sorted(
        prediction.contributors, key=lambda c: (-c.cause_score, event_sort_key(c.event_id))
    )
    flagged = []
    for contributor in ordered:
        template = miner.template_text(contributor.event_id)
        flagged.extend(
            FlaggedLine(ln, contributor.event_id, template, contributor.cause_score)
            for ln in contributor.line_numbers
        )
    return flagged
