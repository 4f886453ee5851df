"""Scopus CSV ingestion.

Parses exported rows into :class:`PublicationRecord` objects, merges
year-chunked exports into one deduplicated :class:`Corpus`, and derives the
per-record views the network builders need (countries, keywords, reference
keys).
"""

from __future__ import annotations

import csv
import io
import json
import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from importlib import resources
from typing import IO, Iterable, Iterator, Mapping, Sequence

from .errors import (
    AliasConflict,
    BadYear,
    EmptyMerge,
    LineError,
    MalformedRow,
    MissingColumn,
    ParseFailure,
)
from .text import collapse_whitespace, reference_key

log = logging.getLogger(__name__)

DEFAULT_SCHEMA: dict[str, str] = {
    "record_id": "EID",
    "authors": "Authors",
    "author_ids": "Author(s) ID",
    "title": "Title",
    "year": "Year",
    "source_title": "Source title",
    "cited_by": "Cited by",
    "affiliations": "Affiliations",
    "author_affiliation_pairs": "Authors with affiliations",
    "author_keywords": "Author Keywords",
    "index_keywords": "Index Keywords",
    "references": "References",
    "document_type": "Document Type",
}

REQUIRED_FIELDS = ("record_id", "authors", "title", "year", "source_title")

MULTI_VALUED = (
    "authors",
    "author_ids",
    "affiliations",
    "author_keywords",
    "index_keywords",
    "references",
)

YEAR_RANGE = (1900, 2100)
DELIMITER = ";"
# a quoted field may span lines; past this many the quote is treated as stray
MAX_RECORD_LINES = 200


@dataclass(frozen=True)
class PublicationRecord:
    """One parsed export row.

    Multi-valued columns are tuples so records stay immutable; columns the
    pipeline doesn't interpret are kept verbatim in ``extra``.
    """

    record_id: str
    authors: tuple[str, ...] = ()
    author_ids: tuple[str, ...] = ()
    title: str = ""
    year: int | None = None
    source_title: str = ""
    cited_by: int = 0
    affiliations: tuple[str, ...] = ()
    author_affiliation_pairs: tuple[tuple[str, str], ...] = ()
    author_keywords: tuple[str, ...] = ()
    index_keywords: tuple[str, ...] = ()
    references: tuple[str, ...] = ()
    document_type: str = ""
    extra: Mapping[str, str] = field(default_factory=dict, compare=True, hash=False)

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "authors": list(self.authors),
            "author_ids": list(self.author_ids),
            "title": self.title,
            "year": self.year,
            "source_title": self.source_title,
            "cited_by": self.cited_by,
            "affiliations": list(self.affiliations),
            "author_affiliation_pairs": [list(p) for p in self.author_affiliation_pairs],
            "author_keywords": list(self.author_keywords),
            "index_keywords": list(self.index_keywords),
            "references": list(self.references),
            "document_type": self.document_type,
            "extra": dict(self.extra),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PublicationRecord":
        kwargs = dict(data)
        for name in MULTI_VALUED:
            kwargs[name] = tuple(kwargs.get(name, ()))
        kwargs["author_affiliation_pairs"] = tuple(
            (str(a), str(b)) for a, b in kwargs.get("author_affiliation_pairs", ())
        )
        kwargs["extra"] = dict(kwargs.get("extra", {}))
        return cls(**kwargs)


@dataclass(frozen=True)
class Corpus:
    """Deduplicated records of one study population, keyed by record id."""

    tag: str
    records: Mapping[str, PublicationRecord]
    provenance: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[PublicationRecord]:
        return iter(self.records.values())

    def __contains__(self, record_id: object) -> bool:
        return record_id in self.records


# --------------------------------------------------------------------------
# CSV parsing


def _split_multi(cell: str) -> tuple[str, ...]:
    if not cell.strip():
        return ()
    return tuple(item.strip() for item in cell.split(DELIMITER) if item.strip())


def _split_pairs(cell: str) -> tuple[tuple[str, str], ...]:
    pairs = []
    for item in _split_multi(cell):
        name, _, affiliation = item.partition(",")
        pairs.append((name.strip(), affiliation.strip()))
    return tuple(pairs)


def _logical_records(stream: Iterable[str]) -> Iterator[tuple[int, str | None]]:
    """Group physical lines into CSV records by quote parity.

    Yields ``(start_line, text)``; ``text`` is None when the record's quotes
    never balance, in which case scanning resumes on the following line.
    """
    source = iter(stream)
    pending: deque[tuple[int, str]] = deque()
    counter = 0

    def pull() -> tuple[int, str] | None:
        nonlocal counter
        if pending:
            return pending.popleft()
        line = next(source, None)
        if line is None:
            return None
        counter += 1
        return counter, line

    while True:
        first = pull()
        if first is None:
            return
        taken = [first]
        odd = first[1].count('"') % 2
        while odd and len(taken) < MAX_RECORD_LINES:
            nxt = pull()
            if nxt is None:
                break
            taken.append(nxt)
            odd ^= nxt[1].count('"') % 2
        if odd:
            pending.extendleft(reversed(taken[1:]))
            yield first[0], None
            continue
        yield first[0], "".join(text for _, text in taken)


def _parse_fields(line: int, text: str) -> list[str]:
    try:
        rows = list(csv.reader(io.StringIO(text), strict=True))
    except csv.Error as exc:
        raise MalformedRow(line, str(exc)) from None
    if len(rows) != 1:
        raise MalformedRow(line, "record does not parse as a single row")
    return rows[0]


def _parse_year(line: int, cell: str) -> int | None:
    cell = cell.strip()
    if not cell:
        return None
    try:
        year = int(cell)
    except ValueError:
        raise BadYear(line, f"non-numeric year {cell!r}") from None
    lo, hi = YEAR_RANGE
    if not lo <= year <= hi:
        raise BadYear(line, f"year {year} outside [{lo}, {hi}]")
    return year


def _parse_count(line: int, cell: str) -> int:
    cell = cell.strip()
    if not cell:
        return 0
    try:
        value = int(cell)
    except ValueError:
        raise MalformedRow(line, f"non-numeric cited-by count {cell!r}") from None
    if value < 0:
        raise MalformedRow(line, f"negative cited-by count {value}")
    return value


def parse_scopus_csv(
    stream: Iterable[str],
    schema: Mapping[str, str] | None = None,
    *,
    strict: bool = False,
    errors: list[LineError] | None = None,
) -> list[PublicationRecord]:
    """Parse a Scopus CSV export.

    Parameters
    ----------
    stream : iterable of str
        Text lines, e.g. a file opened with ``newline=""``.
    schema : mapping, optional
        Logical field name -> header name; merged over :data:`DEFAULT_SCHEMA`.
    strict : bool
        Raise on the first bad row instead of skipping it.
    errors : list, optional
        Receives the row errors skipped in lenient mode.

    Returns
    -------
    list of PublicationRecord
        One record per accepted data row, in file order. Duplicate record
        ids are kept; deduplication belongs to :func:`merge_corpora`.
    """
    mapping = dict(DEFAULT_SCHEMA)
    if schema:
        unknown = set(schema) - set(DEFAULT_SCHEMA)
        if unknown:
            raise ValueError(f"unknown schema fields: {sorted(unknown)}")
        mapping.update(schema)

    chunks = _logical_records(stream)
    header: list[str] | None = None
    for line, text in chunks:
        if text is None:
            raise MalformedRow(line, "unbalanced quotes in header")
        if text.strip():
            header = _parse_fields(line, text)
            break
    if header is None:
        raise MissingColumn(mapping["record_id"])
    if header and header[0].startswith("\ufeff"):
        header[0] = header[0][1:]

    position = {name: i for i, name in reversed(list(enumerate(header)))}
    for name in REQUIRED_FIELDS:
        if mapping[name] not in position:
            raise MissingColumn(mapping[name])
    index = {f: position.get(h) for f, h in mapping.items()}
    used = {i for i in index.values() if i is not None}
    extra_cols = [(i, h) for i, h in enumerate(header) if i not in used]

    records: list[PublicationRecord] = []
    for line, text in chunks:
        try:
            if text is None:
                raise MalformedRow(line, "unbalanced quotes")
            if not text.strip():
                continue
            row = _parse_fields(line, text)
            if len(row) != len(header):
                raise MalformedRow(line, f"expected {len(header)} fields, got {len(row)}")
            records.append(_build_record(line, row, index, extra_cols))
        except LineError as exc:
            if strict:
                raise
            log.warning("skipping row: %s", exc)
            if errors is not None:
                errors.append(exc)
    return records


def _build_record(line, row, index, extra_cols) -> PublicationRecord:
    def cell(name: str) -> str:
        i = index[name]
        return row[i] if i is not None else ""

    record_id = cell("record_id").strip()
    if not record_id:
        raise MalformedRow(line, "empty record id")
    return PublicationRecord(
        record_id=record_id,
        authors=_split_multi(cell("authors")),
        author_ids=_split_multi(cell("author_ids")),
        title=cell("title").strip(),
        year=_parse_year(line, cell("year")),
        source_title=cell("source_title").strip(),
        cited_by=_parse_count(line, cell("cited_by")),
        affiliations=_split_multi(cell("affiliations")),
        author_affiliation_pairs=_split_pairs(cell("author_affiliation_pairs")),
        author_keywords=_split_multi(cell("author_keywords")),
        index_keywords=_split_multi(cell("index_keywords")),
        references=_split_multi(cell("references")),
        document_type=cell("document_type").strip(),
        extra={h: row[i] for i, h in extra_cols},
    )


def write_scopus_csv(
    records: Iterable[PublicationRecord],
    stream: IO[str],
    schema: Mapping[str, str] | None = None,
) -> None:
    """Serialize records back to an export-shaped CSV (inverse of parsing)."""
    mapping = dict(DEFAULT_SCHEMA)
    mapping.update(schema or {})
    records = list(records)
    extra_headers: dict[str, None] = {}
    for rec in records:
        for key in rec.extra:
            extra_headers.setdefault(key, None)
    writer = csv.writer(stream)
    writer.writerow([mapping[f] for f in DEFAULT_SCHEMA] + list(extra_headers))
    sep = DELIMITER + " "
    for rec in records:
        row = []
        for f in DEFAULT_SCHEMA:
            value = getattr(rec, f)
            if f == "author_affiliation_pairs":
                value = sep.join(f"{a}, {b}" if b else a for a, b in value)
            elif f in MULTI_VALUED:
                value = sep.join(value)
            elif value is None:
                value = ""
            row.append(str(value))
        row.extend(rec.extra.get(h, "") for h in extra_headers)
        writer.writerow(row)


# --------------------------------------------------------------------------
# merging and corpus files


def merge_corpora(
    parts: Sequence[Iterable[PublicationRecord]],
    tag: str,
    provenance: Sequence[str] = (),
) -> Corpus:
    """Union parsed chunks keyed by record id.

    A duplicate replaces the held record when its cited-by count is at least
    as large (later exports are assumed fresher); the record keeps the
    position of its first appearance.
    """
    merged: dict[str, PublicationRecord] = {}
    for part in parts:
        for rec in part:
            held = merged.get(rec.record_id)
            if held is None or rec.cited_by >= held.cited_by:
                merged[rec.record_id] = rec
    if not merged:
        raise EmptyMerge("all parts are empty")
    return Corpus(tag=tag, records=merged, provenance=tuple(provenance))


def filter_years(corpus: Corpus, first: int | None, last: int | None) -> Corpus:
    """Keep records whose year lies in ``[first, last]``; undated records drop out."""
    lo = YEAR_RANGE[0] if first is None else first
    hi = YEAR_RANGE[1] if last is None else last
    kept = {
        rid: rec
        for rid, rec in corpus.records.items()
        if rec.year is not None and lo <= rec.year <= hi
    }
    return Corpus(tag=corpus.tag, records=kept, provenance=corpus.provenance)


CORPUS_FORMAT = "biblionet-corpus/1"


def write_corpus(corpus: Corpus, stream: IO[str]) -> None:
    """One JSON object per line: a header, then one line per record."""
    header = {"format": CORPUS_FORMAT, "tag": corpus.tag, "provenance": list(corpus.provenance)}
    stream.write(json.dumps(header, ensure_ascii=False) + "\n")
    for rec in corpus:
        stream.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")


def read_corpus(stream: Iterable[str]) -> Corpus:
    lines = iter(stream)
    try:
        header = json.loads(next(lines))
    except (StopIteration, json.JSONDecodeError):
        raise ParseFailure(1, "missing corpus header") from None
    if not isinstance(header, dict) or header.get("format") != CORPUS_FORMAT:
        raise ParseFailure(1, f"not a {CORPUS_FORMAT} file")
    records: dict[str, PublicationRecord] = {}
    for lineno, text in enumerate(lines, start=2):
        if not text.strip():
            continue
        try:
            rec = PublicationRecord.from_dict(json.loads(text))
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise ParseFailure(lineno, str(exc)) from None
        if rec.record_id in records:
            raise ParseFailure(lineno, f"duplicate record id {rec.record_id!r}")
        records[rec.record_id] = rec
    return Corpus(
        tag=header.get("tag", ""),
        records=records,
        provenance=tuple(header.get("provenance", ())),
    )


# --------------------------------------------------------------------------
# countries


@dataclass(frozen=True)
class CountryTag:
    canonical: str
    aliases: tuple[str, ...] = ()


def _alias_key(text: str) -> str:
    return collapse_whitespace(text).casefold()


class CountryAliases:
    """Case- and whitespace-insensitive lookup from alias to canonical country."""

    def __init__(self, tags: Iterable[CountryTag]):
        self._lookup: dict[str, str] = {}
        self._canonical: dict[str, None] = {}
        for tag in tags:
            self._canonical.setdefault(tag.canonical, None)
            for alias in (tag.canonical, *tag.aliases):
                key = _alias_key(alias)
                held = self._lookup.setdefault(key, tag.canonical)
                if held != tag.canonical:
                    raise AliasConflict(
                        f"alias {alias!r} maps to both {held!r} and {tag.canonical!r}"
                    )

    @property
    def canonical_names(self) -> frozenset[str]:
        return frozenset(self._canonical)

    def lookup(self, token: str) -> str | None:
        return self._lookup.get(_alias_key(token))

    @classmethod
    def from_csv(cls, stream: Iterable[str]) -> "CountryAliases":
        grouped: dict[str, list[str]] = {}
        for n, row in enumerate(csv.reader(stream)):
            if not row or not any(c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ParseFailure(n + 1, "alias table rows need exactly two columns")
            alias, canonical = (c.strip() for c in row)
            if n == 0 and (alias.lower(), canonical.lower()) == ("alias", "canonical"):
                continue
            grouped.setdefault(canonical, []).append(alias)
        return cls(CountryTag(c, tuple(a)) for c, a in grouped.items())

    @classmethod
    def default(cls) -> "CountryAliases":
        text = resources.files("biblionet").joinpath("data/country_aliases.csv").read_text("utf-8")
        return cls.from_csv(io.StringIO(text))


def extract_countries(
    record: PublicationRecord,
    aliases: CountryAliases | Iterable[CountryTag],
    unmatched: Counter | None = None,
) -> frozenset[str]:
    """Canonical countries named by the last comma token of each affiliation.

    Affiliations that resolve to no country are tallied in ``unmatched``
    (keyed by the offending token) rather than dropped silently.
    """
    if not isinstance(aliases, CountryAliases):
        aliases = CountryAliases(aliases)
    affiliations = record.affiliations or tuple(
        aff for _, aff in record.author_affiliation_pairs if aff
    )
    found = set()
    for aff in affiliations:
        token = aff.rsplit(",", 1)[-1].strip()
        country = aliases.lookup(token) if token else None
        if country is None:
            if unmatched is not None:
                unmatched[token] += 1
        else:
            found.add(country)
    return frozenset(found)


# --------------------------------------------------------------------------
# keywords and references


def normalize_keyword_list(keywords: Iterable[str]) -> list[str]:
    seen: dict[str, None] = {}
    for kw in keywords:
        norm = collapse_whitespace(kw).lower()
        if norm:
            seen.setdefault(norm, None)
    return list(seen)


def normalize_keywords(record: PublicationRecord, include_index: bool = False) -> list[str]:
    """Lower-cased, whitespace-collapsed keywords, deduplicated by first occurrence.

    Author keywords only unless ``include_index`` is set.
    """
    keywords: Iterable[str] = record.author_keywords
    if include_index:
        keywords = (*record.author_keywords, *record.index_keywords)
    return normalize_keyword_list(keywords)


def reference_keys(record: PublicationRecord) -> list[str]:
    seen: dict[str, None] = {}
    for ref in record.references:
        key = reference_key(ref)
        if key:
            seen.setdefault(key, None)
    return list(seen)
