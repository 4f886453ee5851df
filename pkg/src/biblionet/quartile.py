"""SJR quartile lookup and the quartile distribution of a corpus."""

from __future__ import annotations

import csv
import hashlib
import io
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import IO, Iterable, Mapping

from .errors import BadQuartile, BadYear, DuplicateEntry, EmptyCorpus, ParseFailure
from .ingest import Corpus, PublicationRecord
from .text import normalize_text

QUARTILES = ("Q1", "Q2", "Q3", "Q4")


@dataclass(frozen=True)
class QuartileTable:
    """Normalized source title -> quartile, with optional per-year overrides."""

    entries: Mapping[str, str]
    overrides: Mapping[tuple[str, int], str] = field(default_factory=dict)
    countries: Mapping[str, str] = field(default_factory=dict)
    name: str = ""
    sha256: str = ""

    def lookup(self, source_title: str, year: int | None = None) -> str | None:
        key = normalize_text(source_title)
        if year is not None:
            hit = self.overrides.get((key, year))
            if hit is not None:
                return hit
        return self.entries.get(key)


def _quartile(lineno: int, text: str) -> str:
    value = text.strip().upper()
    if value not in QUARTILES:
        raise BadQuartile(f"line {lineno}: quartile {text!r} not one of {', '.join(QUARTILES)}")
    return value


def load_quartile_table(source: IO[str] | str, name: str = "") -> QuartileTable:
    """Read a CSV with columns ``source_title, quartile[, year][, country]``.

    Rows without a year are the static entries; rows with one shadow the
    static entry for that year only. The same (title, year) twice, after
    title normalization, is an error.
    """
    text = source if isinstance(source, str) else source.read()
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    reader = csv.DictReader(io.StringIO(text))
    fields = [f.strip().lower() for f in reader.fieldnames or []]
    for required in ("source_title", "quartile"):
        if required not in fields:
            raise ParseFailure(1, f"quartile table needs a {required!r} column")
    reader.fieldnames = fields

    entries: dict[str, str] = {}
    overrides: dict[tuple[str, int], str] = {}
    countries: dict[str, str] = {}
    for lineno, row in enumerate(reader, start=2):
        title = normalize_text(row.get("source_title") or "")
        if not title:
            continue
        quartile = _quartile(lineno, row.get("quartile") or "")
        year_text = (row.get("year") or "").strip()
        if year_text:
            try:
                year = int(year_text)
            except ValueError:
                raise BadYear(lineno, f"non-numeric year {year_text!r}") from None
            if (title, year) in overrides:
                raise DuplicateEntry(f"line {lineno}: duplicate entry for {title!r} in {year}")
            overrides[(title, year)] = quartile
        else:
            if title in entries:
                raise DuplicateEntry(f"line {lineno}: duplicate entry for {title!r}")
            entries[title] = quartile
        country = (row.get("country") or "").strip()
        if country:
            countries.setdefault(title, country)
    return QuartileTable(entries, overrides, countries, name, digest)


def _percent(part: int, whole: int) -> Decimal:
    if whole == 0:
        return Decimal("0.00")
    return (Decimal(100) * part / Decimal(whole)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class QuartileReport:
    counts: Mapping[str, int]
    unmatched: int
    total: int
    table_name: str = ""
    table_sha256: str = ""
    unmatched_sources: Mapping[str, int] = field(default_factory=dict)

    @property
    def matched(self) -> int:
        return self.total - self.unmatched

    def percentages(self) -> dict[str, Decimal]:
        """Share of matched records per quartile, 2 decimals, half-up."""
        return {q: _percent(self.counts[q], self.matched) for q in QUARTILES}

    def unmatched_percentage(self) -> Decimal:
        return _percent(self.unmatched, self.total)

    def to_csv(self, stream: IO[str]) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["quartile", "count", "percent"])
        pct = self.percentages()
        for q in QUARTILES:
            writer.writerow([q, self.counts[q], f"{pct[q]}"])
        writer.writerow(["unmatched", self.unmatched, f"{self.unmatched_percentage()}"])
        writer.writerow(["total", self.total, ""])

    def to_text(self) -> str:
        pct = self.percentages()
        rows = [("Quartile", "Publications", "Percent")]
        rows += [(q, str(self.counts[q]), f"{pct[q]}%") for q in QUARTILES]
        rows.append(("Unmatched", str(self.unmatched), f"{self.unmatched_percentage()}% of all"))
        rows.append(("Total", str(self.total), ""))
        widths = [max(len(r[i]) for r in rows) for i in range(3)]
        lines = [f"{a.ljust(widths[0])}  {b.rjust(widths[1])}  {c}".rstrip() for a, b, c in rows]
        return "\n".join(lines) + "\n"


def quartile_distribution(corpus: Corpus | Iterable[PublicationRecord], table: QuartileTable) -> QuartileReport:
    """Tally records by the quartile of their source.

    Percentages use matched records as the base; records whose source is
    missing from the table are counted separately and never enter it.
    """
    counts = Counter({q: 0 for q in QUARTILES})
    misses: Counter = Counter()
    total = 0
    for rec in corpus:
        total += 1
        q = table.lookup(rec.source_title, rec.year)
        if q is None:
            misses[rec.source_title] += 1
        else:
            counts[q] += 1
    if total == 0:
        raise EmptyCorpus("quartile distribution of an empty corpus")
    return QuartileReport(
        counts=dict(counts),
        unmatched=sum(misses.values()),
        total=total,
        table_name=table.name,
        table_sha256=table.sha256,
        unmatched_sources=dict(sorted(misses.items())),
    )


def owned_sources_by_quartile(table: QuartileTable, country: str) -> dict[str, int]:
    """Distinct sources published in ``country`` per static quartile."""
    tally = {q: 0 for q in QUARTILES}
    wanted = country.strip().casefold()
    for title, quartile in table.entries.items():
        if table.countries.get(title, "").casefold() == wanted:
            tally[quartile] += 1
    return tally
