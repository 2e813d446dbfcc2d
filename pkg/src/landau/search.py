"""Enumeration over the words ``w 1^inf`` with the depth-based stopping rule.

Step ``t`` runs the per-function pipeline on every ``w 1^inf`` with ``w`` of
length ``t``.  If some run consulted a stream position beyond ``t`` the step
is inconclusive and ``t`` advances; otherwise the infimum of the per-word
bounds is a bound for every stream.
"""

from __future__ import annotations

import csv
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .certify import LAMBDA_LOWER, LAMBDA_UPPER, Budget, lambda_lower_bound
from .dyadic import Dyadic
from .errors import LandauError
from .schedule import GenericBounds
from .stream import PiStream


def enumerate_words(t: int) -> list[str]:
    """All ``4**t`` words of length ``t`` over ``1234`` in lexicographic order."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return ["".join(p) for p in itertools.product("1234", repeat=t)]


@dataclass
class WordResult:
    word: str
    l: Dyadic
    query_depth: int
    error: str | None = None


@dataclass
class SearchBudget:
    max_t: int = 1
    pipeline: Budget = field(default_factory=Budget)


@dataclass
class SearchReport:
    n: int
    t_reached: int
    l_infimum: Dyadic | None
    status: str
    per_word: dict[str, WordResult]
    note: str = ""

    def primary(self) -> dict:
        return {
            "n": self.n, "t_reached": self.t_reached, "status": self.status,
            "l_infimum": None if self.l_infimum is None else str(self.l_infimum),
            "per_word": {w: {"l": str(r.l), "query_depth": r.query_depth} for w, r in sorted(self.per_word.items())},
            "context_bounds": {"lambda_lower": "0.5", "lambda_upper": "0.54325"},
            "note": self.note,
        }

    def to_json(self) -> str:
        return json.dumps(self.primary(), sort_keys=True, indent=1)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["word", "l", "query_depth"])
            for word, r in sorted(self.per_word.items()):
                w.writerow([word, str(r.l), r.query_depth])


def run_word(word: str, schedule, n: int, bounds, budget: Budget, guard_bits: int = 8,
             pad: int = 1, workers: int = 1) -> WordResult:
    stream = PiStream.from_word(word, pad)
    cert = lambda_lower_bound(stream, schedule, n, bounds, budget, guard_bits, workers=workers)
    return WordResult(word, cert.l_reported, stream.query_depth)


def replay_truncated(result: WordResult, schedule, n: int, bounds, budget: Budget, guard_bits: int = 8,
                     pad: int = 1, replay_pad: int = 2) -> WordResult:
    """Rerun on the stream cut at its recorded query depth and padded differently."""
    full = PiStream.from_word(result.word, pad)
    prefix = full.prefix(result.query_depth)
    return run_word(prefix, schedule, n, bounds, budget, guard_bits, pad=replay_pad)


def landau_estimate(n: int, schedule, bounds=None, budget: SearchBudget | None = None, guard_bits: int = 8,
                    workers: int = 1) -> SearchReport:
    """Infimum of per-word bounds over growing word lengths, honestly labelled."""
    if n < 1:
        raise ValueError("n must be at least 1")
    budget = budget or SearchBudget()
    bounds = bounds if bounds is not None else GenericBounds(schedule)
    last: dict[str, WordResult] | None = None
    last_t = -1
    note = ""
    for t in range(budget.max_t + 1):
        words = enumerate_words(t)

        def job(word):
            return run_word(word, schedule, n, bounds, budget.pipeline, guard_bits)

        try:
            if workers > 1 and len(words) > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    results = list(pool.map(job, words))
            else:
                results = [job(w) for w in words]
        except LandauError as exc:
            note = f"step t={t} aborted: {exc.category}: {exc}"
            break
        last = {r.word: r for r in results}
        last_t = t
        if all(r.query_depth <= t for r in results):
            return SearchReport(n, t, min(r.l for r in results), "certified", last)
        note = f"step t={t} consulted depth {max(r.query_depth for r in results)}"
    if last is None:
        return SearchReport(n, -1, None, "budget_exhausted", {}, note)
    return SearchReport(n, last_t, min(r.l for r in last.values()), "budget_exhausted", last, note)


def lower_guarantee(n: int) -> Fraction:
    """``(1 - 2**-n) / 2``: what every per-word bound must exceed."""
    return (1 - Fraction(1, 2 ** n)) * LAMBDA_LOWER


__all__ = ["enumerate_words", "WordResult", "SearchBudget", "SearchReport", "run_word", "replay_truncated",
           "landau_estimate", "lower_guarantee", "LAMBDA_UPPER"]
