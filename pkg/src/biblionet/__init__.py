"""Bibliometric network analysis for Scopus-style publication exports."""

__version__ = "0.1.0"

from .builders import (
    BuildSpec,
    build_citation_country,
    build_cocitation,
    build_coauthorship,
    build_coupling,
    build_keyword_cooccurrence,
    build_network,
    build_source_citation,
    match_citations,
)
from .cluster import Clustering, cluster_network, cluster_objective
from .graphio import load_network, read_network, save_network, write_network
from .ingest import (
    Corpus,
    CountryAliases,
    CountryTag,
    PublicationRecord,
    extract_countries,
    merge_corpora,
    normalize_keywords,
    parse_scopus_csv,
    read_corpus,
    reference_keys,
    write_corpus,
)
from .metrics import (
    closeness_centrality,
    compute_metrics,
    degree_centrality,
    expected_cooccurrence,
    link_strength,
    normalize_association,
    source_summary,
    top_link_strength,
)
from .netcore import Network, node_strength, total_weight
from .quartile import QuartileTable, load_quartile_table, quartile_distribution

__all__ = [
    "BuildSpec",
    "Clustering",
    "Corpus",
    "CountryAliases",
    "CountryTag",
    "Network",
    "PublicationRecord",
    "QuartileTable",
    "build_citation_country",
    "build_cocitation",
    "build_coauthorship",
    "build_coupling",
    "build_keyword_cooccurrence",
    "build_network",
    "build_source_citation",
    "closeness_centrality",
    "cluster_network",
    "cluster_objective",
    "compute_metrics",
    "degree_centrality",
    "expected_cooccurrence",
    "extract_countries",
    "link_strength",
    "load_network",
    "load_quartile_table",
    "match_citations",
    "merge_corpora",
    "node_strength",
    "normalize_association",
    "normalize_keywords",
    "parse_scopus_csv",
    "quartile_distribution",
    "read_corpus",
    "read_network",
    "reference_keys",
    "save_network",
    "source_summary",
    "top_link_strength",
    "total_weight",
    "write_corpus",
    "write_network",
]
