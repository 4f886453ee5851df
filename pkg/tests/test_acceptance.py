"""Acceptance criteria, one test each, each printing a PASS/FAIL line."""

import io
import json
import random
import subprocess
import sys
import textwrap
import time
from decimal import Decimal
from itertools import combinations
from math import comb
from pathlib import Path

import numpy as np

from biblionet.builders import (
    BuildSpec,
    build_coauthorship,
    build_coupling,
    build_keyword_cooccurrence,
    build_network,
    build_source_citation,
)
from biblionet.cluster import cluster_network, cluster_objective, write_clustering_csv
from biblionet.graphio import FORMATS, network_to_bytes, read_network
from biblionet.ingest import (
    Corpus,
    CountryAliases,
    PublicationRecord,
    extract_countries,
    normalize_keywords,
    parse_scopus_csv,
    reference_keys,
    write_scopus_csv,
)
from biblionet.metrics import (
    closeness_centrality,
    degree_centrality,
    expected_cooccurrence_total,
    link_strength,
    normalize_association,
)
from biblionet.netcore import node_strength, total_weight
from biblionet.quartile import QUARTILES, load_quartile_table, quartile_distribution

from graphs import bfs_hops, clique, exhaustive_optimum, path, random_network, star, two_cliques

FIXTURES = Path(__file__).parent / "fixtures"
ALIASES = CountryAliases.default()
COUNTRIES = sorted(ALIASES.canonical_names)


def corpus(records) -> Corpus:
    return Corpus("acceptance", {r.record_id: r for r in records})


def synthetic_corpus(seed: int, n: int, n_refs: int = 300) -> Corpus:
    rng = random.Random(seed)
    refs = [f"Writer{k} A., Study of item {k}, ({1990 + k % 25}) Journal {k % 13}, {k}, pp. 1-9" for k in range(n_refs)]
    words = [f"Keyword {k}" for k in range(40)]
    records = []
    for d in range(n):
        countries = rng.sample(COUNTRIES[:25], rng.randint(0, 5))
        records.append(
            PublicationRecord(
                record_id=f"2-s2.0-{d:08d}",
                title=f"Synthetic document {d}",
                source_title=f"Source {rng.randint(0, 9)}",
                affiliations=tuple(f"Dept {k}, Univ {k}, City, {c}" for k, c in enumerate(countries)),
                author_keywords=tuple(rng.sample(words, rng.randint(0, 7))),
                # occasional respelling exercises normalization
                references=tuple(
                    r.upper() if rng.random() < 0.1 else r for r in rng.sample(refs, rng.randint(0, 25))
                ),
            )
        )
    return corpus(records)


def brute_link_strength(net, i, j) -> float:
    n = net.n
    mat = [[net.weight(a, b) for b in range(n)] for a in range(n)]
    m = sum(mat[a][b] for a in range(n) for b in range(a + 1, n))
    c_i, c_j = sum(mat[i]), sum(mat[j])
    return 2 * m * mat[i][j] / (c_i * c_j)


def test_criterion_01_link_strength_oracle(criterion):
    start = time.perf_counter()
    rng = random.Random(1)
    worst = worst_scale = 0.0
    graphs = 0
    while graphs < 200:
        net = random_network(rng, rng.randint(2, 12), rng.uniform(0.2, 0.9), "float")
        if not net.edge_count():
            continue
        graphs += 1
        active = [v for v in range(net.n) if net.degree(v)]
        for i, j in combinations(active, 2):
            worst = max(worst, abs(link_strength(net, i, j) - brute_link_strength(net, i, j)))
        for lam in (0.5, 3, 10):
            scaled = net.copy()
            for i, j, w in net.edges():
                scaled.set_weight(i, j, w * lam)
            for i, j in combinations(active, 2):
                worst_scale = max(worst_scale, abs(link_strength(scaled, i, j) - link_strength(net, i, j)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and worst_scale <= 1e-9 and elapsed < 5
    criterion(1, "link strength oracle and scale invariance", ok,
              f"max err {worst:.2e}, scale err {worst_scale:.2e}, {elapsed:.2f}s")


def test_criterion_02_centralities(criterion):
    start = time.perf_counter()
    graphs = [path(k) for k in (2, 3, 5, 10)] + [star(k) for k in (1, 3, 8)]
    graphs += [clique(k) for k in (2, 3, 6, 10)] + [two_cliques(k) for k in (3, 4, 6)]
    rng = random.Random(2)
    graphs += [random_network(rng, rng.randint(2, 30), rng.uniform(0.02, 0.5)) for _ in range(50)]
    degree_ok, worst = True, 0.0
    for net in graphs:
        for v in range(net.n):
            deg = sum(1 for u in range(net.n) if u != v and net.weight(v, u) > 0)
            degree_ok &= degree_centrality(net, v) == deg / (net.n - 1)
            dist = bfs_hops(net, v)
            expected = 0.0 if len(dist) == 1 else (len(dist) - 1) / sum(dist.values())
            worst = max(worst, abs(closeness_centrality(net, v) - expected))
    complete_ok = all(
        degree_centrality(clique(k), v) == 1.0 and closeness_centrality(clique(k), v) == 1.0
        for k in (2, 5, 9)
        for v in range(k)
    )
    elapsed = time.perf_counter() - start
    ok = degree_ok and worst <= 1e-12 and complete_ok and elapsed < 5
    criterion(2, "degree and closeness match BFS oracles", ok,
              f"{len(graphs)} graphs, closeness err {worst:.2e}, {elapsed:.2f}s")


def test_criterion_03_coupling_oracle(criterion):
    start = time.perf_counter()
    c = synthetic_corpus(3, 100, n_refs=120)
    net = build_coupling(c)
    keys = {r.record_id: set(reference_keys(r)) for r in c}
    pairs = list(combinations(sorted(keys), 2))
    mismatches = sum(
        net.weight(net.node_id(y), net.node_id(z)) != len(keys[y] & keys[z]) for y, z in pairs
    )
    abc = ("Author A., Publication A, (2001)", "Author B., Publication B, (2002)", "Author C., Publication C, (2003)")
    example = build_coupling(corpus([PublicationRecord("Y", references=abc), PublicationRecord("Z", references=abc)]))
    elapsed = time.perf_counter() - start
    ok = len(pairs) == 4950 and mismatches == 0 and example.weight(0, 1) == 3 and elapsed < 10
    criterion(3, "document coupling equals set-intersection oracle", ok,
              f"{len(pairs)} pairs, {mismatches} mismatches, ABC weight {example.weight(0, 1)}, {elapsed:.2f}s")


def test_criterion_04_counting_identities(criterion):
    c = synthetic_corpus(4, 400)
    coauth = build_coauthorship(c, aliases=ALIASES)
    coauth_ok = total_weight(coauth) == sum(comb(len(extract_countries(r, ALIASES)), 2) for r in c)
    per_record_ok = all(
        total_weight(build_keyword_cooccurrence(corpus([r]))) == comb(len(normalize_keywords(r)), 2) for r in c
    )
    keyword_ok = total_weight(build_keyword_cooccurrence(c)) == sum(comb(len(normalize_keywords(r)), 2) for r in c)
    handshake_ok = True
    specs = [
        BuildSpec("coauthorship-country"), BuildSpec("citation-country"), BuildSpec("source-citation", min_documents=1),
        BuildSpec("coupling"), BuildSpec("coupling", unit="country"), BuildSpec("cocitation"),
        BuildSpec("keyword-cooccurrence"),
    ]
    for spec in specs:
        net = build_network(c, spec, ALIASES)
        handshake_ok &= sum(node_strength(net, v).total_link_strength for v in range(net.n)) == 2 * total_weight(net)
    ok = coauth_ok and per_record_ok and keyword_ok and handshake_ok
    criterion(4, "full counting, C(N,2) and handshake identities", ok,
              f"coauthorship {coauth_ok}, keyword per record {per_record_ok}, total {keyword_ok}, handshake {handshake_ok}")


def _small_graphs():
    raw = [path(3), path(6), star(4), clique(4), clique(7), two_cliques(3), two_cliques(4), two_cliques(5)]
    rng = random.Random(55)
    while len(raw) < 40:
        net = random_network(rng, rng.randint(3, 10), rng.uniform(0.25, 0.75))
        if all(net.degree(v) for v in range(net.n)):
            raw.append(net)
    return [normalize_association(net) for net in raw]


def test_criterion_05_clustering_optimality(criterion):
    start = time.perf_counter()
    misses = []
    for k, net in enumerate(_small_graphs()):
        for gamma in (0.5, 1.0, 2.0):
            best, _ = exhaustive_optimum(net, gamma)
            got = cluster_network(net, resolution=gamma, seed=42, restarts=32).quality
            if abs(got - best) > 1e-9:
                misses.append((k, gamma, got, best))

    bridge = normalize_association(two_cliques(4))
    split = cluster_network(bridge, resolution=1.0).assignment == (0, 0, 0, 0, 1, 1, 1, 1)

    monotone = True
    trace: dict[int, float] = {}

    def hook(restart, assignment, quality):
        nonlocal monotone
        prev = trace.get(restart, 0.0)
        monotone &= quality > prev and abs(quality - cluster_objective(bridge, assignment, 1.0)) < 1e-9
        trace[restart] = quality

    cluster_network(bridge, resolution=1.0, on_move=hook)

    big = normalize_association(random_network(random.Random(5), 60, 0.1))
    outputs = []
    for _ in range(2):
        buf = io.StringIO()
        write_clustering_csv(big, cluster_network(big, resolution=1.0, seed=11), buf)
        outputs.append(buf.getvalue().encode())
    identical = outputs[0] == outputs[1]
    elapsed = time.perf_counter() - start
    ok = not misses and split and monotone and identical and elapsed < 30
    criterion(5, "clustering reaches exhaustive optimum, deterministic", ok,
              f"misses {misses[:3]}, bridge split {split}, monotone {monotone}, identical {identical}, {elapsed:.2f}s")


def _sized_sources(sizes) -> Corpus:
    return corpus(
        PublicationRecord(f"{s}-{k}", title=f"{s} paper {k}", source_title=s)
        for s, n in sizes.items()
        for k in range(n)
    )


def test_criterion_06_source_threshold(criterion):
    net = build_source_citation(_sized_sources({"Nineteen Review": 19, "Twenty Review": 20}))
    labels = [n.label for n in net.nodes]
    criterion(6, "source threshold keeps 20, drops 19", labels == ["Twenty Review"], f"nodes {labels}")


def test_criterion_07_quartile_report(criterion):
    table = load_quartile_table("source_title,quartile\nJ1,Q1\nJ2,Q2\nJ3,Q3\nJ4,Q4\n")
    sources = ["J1", "J2", "J3", "J3", "J4", "J4", "J4", "J4"]
    records = [PublicationRecord(f"r{k}", source_title=s) for k, s in enumerate(sources)]
    pct = quartile_distribution(corpus(records), table).percentages()
    fixture_ok = [str(pct[q]) for q in QUARTILES] == ["12.50", "12.50", "25.00", "50.00"]

    rng = random.Random(7)
    sums_ok = base_ok = True
    for _ in range(300):
        recs = [PublicationRecord(f"r{k}", source_title=rng.choice(["J1", "J2", "J3", "J4"])) for k in range(rng.randint(1, 90))]
        report = quartile_distribution(corpus(recs), table)
        raw = sum(Decimal(100) * report.counts[q] / report.matched for q in QUARTILES)
        sums_ok &= abs(raw - 100) <= Decimal("0.01")
        extra = recs + [PublicationRecord(f"x{k}", source_title="Unknown") for k in range(rng.randint(1, 20))]
        base_ok &= quartile_distribution(corpus(extra), table).percentages() == report.percentages()
    ok = fixture_ok and sums_ok and base_ok
    criterion(7, "quartile percentages over matched records", ok,
              f"fixture {[str(pct[q]) for q in QUARTILES]}, sums {sums_ok}, unmatched excluded {base_ok}")


def test_criterion_08_expected_cooccurrence(criterion):
    """Null model: every other slot of a list holds the word independently with probability p."""
    start = time.perf_counter()
    draws = 100_000
    fixtures = [([5, 8, 12], 0.1), ([3, 3, 3, 3], 0.25), ([20, 2, 11], 0.05)]
    rng = np.random.default_rng(8)
    details, ok = [], True
    for lengths, p in fixtures:
        vocab = np.array([p, 1 - p])  # the word of interest, then everything else
        total = np.zeros(draws)
        for n in lengths:
            slots = rng.choice(2, size=(draws, n - 1), p=vocab)
            total += (slots == 0).sum(axis=1)
        mean, se = total.mean(), total.std(ddof=1) / np.sqrt(draws)
        expected = expected_cooccurrence_total(lengths, p)
        z = abs(mean - expected) / se
        ok &= z <= 3
        details.append(f"{expected:.3f} vs {mean:.3f} (z={z:.2f})")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10
    criterion(8, "expected co-occurrence matches Monte-Carlo null model", ok, "; ".join(details) + f", {elapsed:.2f}s")


def test_criterion_09_round_trips(criterion):
    rng = random.Random(9)
    failures = []
    for k in range(50):
        net = random_network(rng, rng.randint(0, 200), rng.uniform(0.0, 0.08), rng.choice(["int", "float"]))
        for fmt in FORMATS:
            if read_network(network_to_bytes(net, fmt), fmt) != net:
                failures.append((k, fmt))
    with open(FIXTURES / "scopus_sample.csv", encoding="utf-8", newline="") as fh:
        records = parse_scopus_csv(fh, strict=True)
    buf = io.StringIO()
    write_scopus_csv(records, buf)
    csv_ok = parse_scopus_csv(io.StringIO(buf.getvalue()), strict=True) == records
    ok = not failures and csv_ok
    criterion(9, "write/read identity for graphs and CSV", ok, f"graph failures {failures[:5]}, csv identity {csv_ok}")


SMOKE = textwrap.dedent(
    """
    import csv, json, random, resource, sys, time
    from biblionet.cli import run
    from biblionet.ingest import CountryAliases

    work = sys.argv[1]
    rng = random.Random(10)
    countries = sorted(CountryAliases.default().canonical_names)
    weights = [1 / (k + 1) for k in range(len(countries))]
    path = f"{work}/big.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["Authors", "Title", "Year", "Source title", "Cited by", "Affiliations", "Author Keywords", "References", "EID"])
        for d in range(100_000):
            cs = rng.choices(countries, weights, k=rng.randint(1, 4))
            affs = "; ".join(f"Dept {k}, University {d % 997}, City, {c}" for k, c in enumerate(cs))
            refs = "; ".join(f"Author{r} X., Title {r}, (2001) J. {r % 50}" for r in rng.sample(range(5000), 5))
            w.writerow(["A. B.; C. D.", f"Paper {d}", 1990 + d % 27, f"Source {d % 300}", d % 40,
                        affs, "growth; poverty", refs, f"2-s2.0-{d:010d}"])
    start = time.perf_counter()
    steps = [
        ["ingest", "--in", path, "--tag", "Synthetic", "--out", f"{work}/big.corpus"],
        ["network", "--kind", "coauthorship-country", "--corpus", f"{work}/big.corpus", "--out", f"{work}/co.tsv"],
        ["metrics", "--net", f"{work}/co.tsv", "--out", f"{work}/metrics.csv"],
        ["cluster", "--net", f"{work}/co.tsv", "--normalize", "--out", f"{work}/clusters.csv"],
    ]
    codes = [run(step) for step in steps]
    elapsed = time.perf_counter() - start
    peak_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    print(json.dumps({"codes": codes, "seconds": elapsed, "peak_mb": peak_mb}))
    """
)


def test_criterion_10_scale_smoke(criterion, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-c", SMOKE, str(tmp_path)], capture_output=True, text=True, timeout=600
    )
    assert proc.returncode == 0, proc.stderr
    stats = json.loads(proc.stdout.strip().splitlines()[-1])
    manifest = json.loads((tmp_path / "big.corpus.manifest.json").read_text())
    ok = (
        stats["codes"] == [0, 0, 0, 0]
        and manifest["results"]["records"] == 100_000
        and stats["seconds"] < 60
        and stats["peak_mb"] < 2048
    )
    criterion(10, "100k-record pipeline under 60 s and 2 GB", ok,
              f"{stats['seconds']:.1f}s, peak {stats['peak_mb']:.0f} MB, exit codes {stats['codes']}")
