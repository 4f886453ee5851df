"""``biblionet`` command line.

Commands communicate through files only. Every command that writes an
output also writes ``<output>.manifest.json`` with the resolved
parameters, a canonical argv that replays the run, and SHA-256 hashes of
all inputs and outputs.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import sys
import tempfile
from collections import Counter
from pathlib import Path
from typing import Any, Sequence

import click

from . import __version__
from .builders import NETWORK_KINDS, BuildSpec, build_network
from .cluster import annotate, cluster_network, write_clu, write_clustering_csv
from .errors import BiblionetError, InvalidSpec
from .graphio import FORMATS, EXTENSIONS, format_for_path, network_to_bytes, read_network
from .ingest import (
    DEFAULT_SCHEMA,
    CountryAliases,
    filter_years,
    merge_corpora,
    parse_scopus_csv,
    read_corpus,
    write_corpus,
)
from .metrics import (
    RANKED_HEADERS,
    compute_metrics,
    format_ranked_table,
    normalize_association,
    rank_nodes,
    source_summary,
    top_link_strength,
    write_source_summary,
)
from .quartile import load_quartile_table, owned_sources_by_quartile, quartile_distribution

THREADS_ENV = "BIBLIONET_THREADS"
DEFAULT_FORMAT = "edge-tsv"

existing_file = click.Path(exists=True, dir_okay=False, path_type=str)


# ---------------------------------------------------------------- plumbing


def _sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def atomic_write(path: str | Path, data: bytes) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _workers() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise click.UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def _canonical_argv(ctx: click.Context) -> list[str]:
    argv = [ctx.info_name or ""]
    for param in ctx.command.params:
        if not isinstance(param, click.Option) or param.name is None:
            continue
        value = ctx.params.get(param.name)
        flag = max(param.opts, key=len)
        if value is None or value is False or value == ():
            continue
        if param.is_flag:
            argv.append(flag)
        elif param.multiple:
            for item in value:
                argv += [flag, str(item)]
        else:
            argv += [flag, str(value)]
    return argv


def _finish(
    ctx: click.Context,
    inputs: Sequence[str | None],
    outputs: Sequence[str],
    results: dict[str, Any] | None = None,
) -> None:
    manifest = {
        "tool": "biblionet",
        "version": __version__,
        "command": ctx.info_name,
        "argv": _canonical_argv(ctx),
        "parameters": {k: list(v) if isinstance(v, tuple) else v for k, v in sorted(ctx.params.items())},
        "inputs": [{"path": p, "sha256": _sha256(p)} for p in inputs if p],
        "outputs": [{"path": p, "sha256": _sha256(p)} for p in outputs],
        "results": results or {},
    }
    text = json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n"
    atomic_write(f"{outputs[0]}.manifest.json", text.encode("utf-8"))


def _load_net(path: str, fmt: str | None):
    try:
        fmt = fmt or format_for_path(path)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--net-format") from None
    with open(path, "rb") as fh:
        return read_network(fh, fmt)


def _out_format(path: str, fmt: str | None) -> str:
    return fmt or EXTENSIONS.get(Path(path).suffix.lower(), DEFAULT_FORMAT)


def _parse_years(text: str | None) -> tuple[int | None, int | None] | None:
    if not text:
        return None
    first, sep, last = text.partition(":")
    if not sep:
        raise click.BadParameter("expected FIRST:LAST, either side optional", param_hint="--years")
    try:
        return (int(first) if first else None, int(last) if last else None)
    except ValueError:
        raise click.BadParameter(f"bad year range {text!r}", param_hint="--years") from None


# ---------------------------------------------------------------- commands


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="biblionet")
def cli() -> None:
    """Bibliometric networks from Scopus exports."""


@cli.command()
@click.option("--in", "inputs", multiple=True, required=True, type=existing_file, help="Scopus CSV export; repeat for year chunks.")
@click.option("--tag", required=True, help="Corpus label, e.g. the country of study.")
@click.option("--out", required=True, help="Corpus file (JSON lines).")
@click.option("--strict", is_flag=True, help="Abort on the first malformed row.")
@click.option("--years", default=None, help="Keep only FIRST:LAST (inclusive).")
@click.option("--column", "columns", multiple=True, help="Override a header name: FIELD=HEADER.")
@click.pass_context
def ingest(ctx, inputs, tag, out, strict, years, columns):
    """Parse and merge Scopus CSV exports into one corpus."""
    schema = {}
    for item in columns:
        name, sep, header = item.partition("=")
        if not sep or name not in DEFAULT_SCHEMA:
            raise click.BadParameter(f"expected FIELD=HEADER with FIELD in {sorted(DEFAULT_SCHEMA)}", param_hint="--column")
        schema[name] = header
    year_range = _parse_years(years)

    parts, skipped = [], []
    for path in inputs:
        with open(path, encoding="utf-8-sig", newline="") as fh:
            parts.append(parse_scopus_csv(fh, schema, strict=strict, errors=skipped))
    corpus = merge_corpora(parts, tag, provenance=[Path(p).name for p in inputs])
    rows = sum(len(p) for p in parts)
    duplicates = rows - len(corpus)
    if year_range:
        corpus = filter_years(corpus, *year_range)

    buf = io.StringIO()
    write_corpus(corpus, buf)
    atomic_write(out, buf.getvalue().encode("utf-8"))
    results = {
        "rows_parsed": rows,
        "rows_skipped": len(skipped),
        "skipped_lines": [str(e) for e in skipped[:100]],
        "records": len(corpus),
        "duplicates_removed": duplicates,
    }
    _finish(ctx, inputs, [out], results)
    click.echo(f"{len(corpus)} records from {rows} rows ({len(skipped)} skipped) -> {out}")


@cli.command()
@click.option("--kind", required=True, type=click.Choice(sorted(NETWORK_KINDS)))
@click.option("--corpus", required=True, type=existing_file)
@click.option("--out", required=True)
@click.option("--format", "fmt", type=click.Choice(FORMATS), default=None, help="Default: from --out extension, else edge-tsv.")
@click.option("--unit", type=click.Choice(["country", "source", "document", "keyword", "reference"]), default=None)
@click.option("--min-docs", type=click.IntRange(min=1), default=None, help="Default 1; 20 for source-citation.")
@click.option("--min-occurrences", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--index-keywords", is_flag=True, help="Add index keywords to author keywords.")
@click.option("--aliases", type=existing_file, default=None, help="Country alias CSV (alias, canonical).")
@click.option("--normalize", is_flag=True, help="Write association-strength weights.")
@click.pass_context
def network(ctx, kind, corpus, out, fmt, unit, min_docs, min_occurrences, index_keywords, aliases, normalize):
    """Build one network from a corpus."""
    try:
        spec = BuildSpec(kind, unit, min_docs, min_occurrences, index_keywords)
    except InvalidSpec as exc:
        raise click.UsageError(str(exc)) from None
    alias_table = None
    if aliases:
        with open(aliases, encoding="utf-8-sig", newline="") as fh:
            alias_table = CountryAliases.from_csv(fh)
    with open(corpus, encoding="utf-8") as fh:
        data = read_corpus(fh)
    unmatched: Counter = Counter()
    net = build_network(data, spec, alias_table, workers=_workers(), unmatched=unmatched)
    if normalize:
        net = normalize_association(net)
    atomic_write(out, network_to_bytes(net, _out_format(out, fmt)))
    results = {
        "nodes": net.n,
        "edges": net.edge_count(),
        "unmatched_affiliations": sum(unmatched.values()),
        "top_unmatched_affiliation_tokens": unmatched.most_common(20),
    }
    for key in ("references_total", "references_matched"):
        if key in net.attributes:
            results[key] = net.attributes[key]
    _finish(ctx, [corpus, aliases], [out], results)
    click.echo(f"{kind}: {net.n} nodes, {net.edge_count()} edges -> {out}")


@cli.command()
@click.option("--net", "net_path", required=True, type=existing_file)
@click.option("--net-format", type=click.Choice(FORMATS), default=None)
@click.option("--out", required=True, help="Metric CSV.")
@click.pass_context
def metrics(ctx, net_path, net_format, out):
    """Per-node links, strength, degree and closeness centrality."""
    net = _load_net(net_path, net_format)
    report = compute_metrics(net)
    buf = io.StringIO()
    report.to_csv(buf)
    atomic_write(out, buf.getvalue().encode("utf-8"))
    _finish(ctx, [net_path], [out], {"n": report.n, "m": report.m})
    click.echo(f"n={report.n} m={report.m} -> {out}")


@cli.command()
@click.option("--net", "net_path", required=True, type=existing_file)
@click.option("--net-format", type=click.Choice(FORMATS), default=None)
@click.option("--out", required=True, help="Cluster CSV (label, cluster).")
@click.option("--normalize", is_flag=True, help="Association-normalize raw counts first.")
@click.option("--resolution", type=float, default=1.0, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--restarts", type=click.IntRange(min=1), default=32, show_default=True)
@click.option("--min-cluster-size", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--clu", default=None, help="Also write a Pajek partition file.")
@click.option("--annotated", default=None, help="Also write the network with a cluster attribute.")
@click.pass_context
def cluster(ctx, net_path, net_format, out, normalize, resolution, seed, restarts, min_cluster_size, clu, annotated):
    """Cluster a network at a given resolution."""
    if resolution <= 0:
        raise click.BadParameter("must be positive", param_hint="--resolution")
    net = _load_net(net_path, net_format)
    if normalize:
        net = normalize_association(net)
    result = cluster_network(net, resolution, seed, restarts, min_cluster_size)
    buf = io.StringIO()
    write_clustering_csv(net, result, buf)
    atomic_write(out, buf.getvalue().encode("utf-8"))
    outputs = [out]
    if clu:
        buf = io.StringIO()
        write_clu(result, buf)
        atomic_write(clu, buf.getvalue().encode("utf-8"))
        outputs.append(clu)
    if annotated:
        atomic_write(annotated, network_to_bytes(annotate(net, result), _out_format(annotated, None)))
        outputs.append(annotated)
    results = {
        "clusters": result.n_clusters,
        "quality": result.quality,
        "iterations_run": result.iterations_run,
        "resolution": resolution,
    }
    _finish(ctx, [net_path], outputs, results)
    click.echo(f"{result.n_clusters} clusters, quality {result.quality:.6g} (resolution {resolution}) -> {out}")


@cli.command()
@click.option("--corpus", required=True, type=existing_file)
@click.option("--table", required=True, type=existing_file, help="CSV: source_title, quartile[, year][, country].")
@click.option("--out", required=True, help="Quartile report CSV.")
@click.option("--owned-by", default=None, help="Also tally the table's sources published in this country.")
@click.pass_context
def quartiles(ctx, corpus, table, out, owned_by):
    """Distribution of a corpus over SJR quartiles."""
    with open(table, encoding="utf-8-sig", newline="") as fh:
        qtable = load_quartile_table(fh, name=Path(table).name)
    with open(corpus, encoding="utf-8") as fh:
        data = read_corpus(fh)
    report = quartile_distribution(data, qtable)
    buf = io.StringIO()
    report.to_csv(buf)
    atomic_write(out, buf.getvalue().encode("utf-8"))
    results = {
        "counts": report.counts,
        "unmatched": report.unmatched,
        "total": report.total,
        "table": {"name": qtable.name, "sha256": qtable.sha256},
    }
    if owned_by:
        results["owned_sources"] = owned_sources_by_quartile(qtable, owned_by)
    _finish(ctx, [corpus, table], [out], results)
    click.echo(report.to_text(), nl=False)
    if owned_by:
        tally = results["owned_sources"]
        click.echo(f"sources owned by {owned_by}: " + ", ".join(f"{q} {n}" for q, n in tally.items()))


@cli.command()
@click.option("--net", "net_path", type=existing_file, default=None)
@click.option("--net-format", type=click.Choice(FORMATS), default=None)
@click.option("--focus", default=None, help="Rank this node's neighbors by edge weight.")
@click.option("--top", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--by", default=None, help="Without --focus: 'strength' or a node attribute (default: occurrences for keyword networks).")
@click.option("--corpus", type=existing_file, default=None, help="With --sources: per-source documents vs citations.")
@click.option("--sources", is_flag=True)
@click.option("--min-docs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--title", default=None)
@click.option("--out", default=None, help="Write here instead of stdout.")
@click.pass_context
def report(ctx, net_path, net_format, focus, top, by, corpus, sources, min_docs, title, out):
    """Ranked link-strength tables and source summaries."""
    if sources:
        if not corpus:
            raise click.UsageError("--sources needs --corpus")
        with open(corpus, encoding="utf-8") as fh:
            rows = source_summary(read_corpus(fh), min_docs)
        buf = io.StringIO()
        write_source_summary(rows[:top], buf)
        text, inputs = buf.getvalue(), [corpus]
    else:
        if not net_path:
            raise click.UsageError("report needs --net (or --sources --corpus)")
        net = _load_net(net_path, net_format)
        kind = net.attributes.get("network_kind")
        headers = RANKED_HEADERS.get(kind, ("Label", "Link Strength"))
        if focus:
            rows = top_link_strength(net, focus, top)
        else:
            rank_by = by or ("occurrences" if kind == "keyword-cooccurrence" else "strength")
            rows = rank_nodes(net, top, rank_by)
        text, inputs = format_ranked_table(rows, headers, title), [net_path]
    if out:
        atomic_write(out, text.encode("utf-8"))
        _finish(ctx, inputs, [out])
    else:
        click.echo(text, nl=False)


# ---------------------------------------------------------------- entry points


def _read_config(path: str) -> dict[str, list[str]]:
    values: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise click.UsageError(f"{path}:{n}: expected 'key = value'")
            values.setdefault(key.strip().lstrip("-"), []).append(value.strip())
    return values


def _apply_config(argv: list[str]) -> tuple[list[str], dict | None]:
    """Strip ``--config FILE`` from argv and turn the file into click defaults."""
    rest, config = [], None
    it = iter(argv)
    for arg in it:
        if arg == "--config":
            config = next(it, None)
            if config is None:
                raise click.UsageError("--config needs a file")
        elif arg.startswith("--config="):
            config = arg.split("=", 1)[1]
        else:
            rest.append(arg)
    if config is None:
        return rest, None
    try:
        values = _read_config(config)
    except OSError as exc:
        raise click.UsageError(f"cannot read config: {exc}") from None
    command = next((a for a in rest if not a.startswith("-")), None)
    sub = cli.commands.get(command) if command else None
    if sub is None:
        return rest, None
    defaults: dict[str, Any] = {}
    for param in sub.params:
        if not isinstance(param, click.Option):
            continue
        names = {opt.lstrip("-") for opt in param.opts}
        for key, vals in values.items():
            if key in names:
                defaults[param.name] = vals if param.multiple else vals[-1]
    unknown = set(values) - {o.lstrip("-") for p in sub.params for o in getattr(p, "opts", ())}
    if unknown:
        raise click.UsageError(f"unknown config keys for {command}: {', '.join(sorted(unknown))}")
    return rest, {command: defaults}


def run(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return the exit code instead of exiting."""
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        args, default_map = _apply_config(args)
        result = cli.main(args=args, prog_name="biblionet", standalone_mode=False, default_map=default_map)
        return result if isinstance(result, int) else 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 2
    except (BiblionetError, OSError, ValueError, UnicodeDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


def main() -> None:
    sys.exit(run())
