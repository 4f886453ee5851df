import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biblionet.errors import DuplicateNode, ParseFailure, SelfLoop, SinkFailure, UnknownNode
from biblionet.graphio import (
    FORMATS,
    format_for_path,
    format_weight,
    load_network,
    network_to_bytes,
    read_network,
    save_network,
    write_network,
)
from biblionet.netcore import Network, node_strength, total_weight

from graphs import clique, from_edges, random_network, star, two_cliques


def test_add_edge_accumulates():
    net = from_edges(2, [])
    net.add_edge(0, 1)
    net.add_edge(1, 0)
    assert net.weight(0, 1) == net.weight(1, 0) == 2


def test_self_loop_rejected():
    net = from_edges(2, [])
    with pytest.raises(SelfLoop):
        net.add_edge(1, 1)


def test_unknown_node_and_bad_weight():
    net = from_edges(2, [])
    with pytest.raises(UnknownNode):
        net.add_edge(0, 5)
    with pytest.raises(UnknownNode):
        node_strength(net, 9)
    with pytest.raises(ValueError):
        net.add_edge(0, 1, 0)


def test_duplicate_label():
    net = Network()
    net.add_node("Pakistan", "country")
    with pytest.raises(DuplicateNode):
        net.add_node("Pakistan", "country")


def test_total_weight_examples():
    assert total_weight(Network()) == 0
    assert total_weight(clique(3)) == 3
    assert total_weight(from_edges(3, [(0, 1, 2), (1, 2, 1)])) == 3


def test_total_weight_random_7_nodes_11_edges():
    rng = random.Random(7)
    pairs = rng.sample([(i, j) for i in range(7) for j in range(i + 1, 7)], 11)
    edges = [(i, j, rng.randint(1, 20)) for i, j in pairs]
    net = from_edges(7, edges)
    brute = 0
    for i in range(7):
        for j in range(i + 1, 7):
            brute += net.weight(i, j)
    assert net.edge_count() == 11
    assert total_weight(net) == brute == sum(w for _, _, w in edges)


def test_node_strength_examples():
    net = from_edges(4, [(0, 1), (1, 2), (0, 2)])
    iso = node_strength(net, 3)
    assert (iso.link_count, iso.total_link_strength) == (0, 0)
    for v in range(3):
        s = node_strength(net, v)
        assert (s.link_count, s.total_link_strength) == (2, 2)
    k13 = from_edges(4, [(0, 1, 2), (0, 2, 3), (0, 3, 5)])
    s = node_strength(k13, 0)
    assert (s.link_count, s.total_link_strength) == (3, 10)


@pytest.mark.parametrize("seed", range(20))
def test_symmetry_and_handshake(seed):
    net = random_network(random.Random(seed), 12, 0.4, "float" if seed % 2 else "int")
    for i in range(net.n):
        for j in range(net.n):
            assert net.weight(i, j) == net.weight(j, i)
        assert net.weight(i, i) == 0
    strengths = sum(node_strength(net, v).total_link_strength for v in range(net.n))
    assert strengths == pytest.approx(2 * total_weight(net), rel=1e-12)


# serialization


def test_tsv_triangle_has_three_data_lines():
    text = network_to_bytes(clique(3), "edge-tsv").decode()
    lines = text.splitlines()
    assert lines[0] == "source\ttarget\tweight"
    data = [ln for ln in lines[1:] if not ln.startswith("#")]
    assert data == ["n000\tn001\t1", "n000\tn002\t1", "n001\tn002\t1"]


def test_empty_pajek():
    assert network_to_bytes(Network(), "pajek") == b"*Vertices 0\n*Edges\n"


def test_pajek_layout():
    net = from_edges(3, [(0, 1, 2.5), (1, 2, 1)], labels=["A B", "C", 'D "x"'])
    text = network_to_bytes(net, "pajek").decode()
    body = [ln for ln in text.splitlines() if not ln.startswith("%")]
    assert body == [
        "*Vertices 3",
        '1 "A B"',
        '2 "C"',
        '3 "D \\"x\\""',
        "*Edges",
        "1 2 2.5",
        "2 3 1",
    ]


def test_gml_layout():
    net = from_edges(2, [(0, 1, 3)], labels=["A", "B"])
    text = network_to_bytes(net, "gml").decode()
    assert text.startswith("graph [\n  directed 0\n")
    assert 'label "A"' in text and "weight 3" in text


def test_weight_formatting():
    assert format_weight(3) == "3"
    assert format_weight(3.0) == "3"
    assert format_weight(1 / 3) == "0.333333"
    assert format_weight(1234567.0) == "1234567"
    assert format_weight(0.1234567) == "0.123457"


def test_output_is_deterministic():
    net = random_network(random.Random(3), 30, 0.2, "float")
    for fmt in FORMATS:
        assert network_to_bytes(net, fmt) == network_to_bytes(net.copy(), fmt)


@pytest.mark.parametrize("fmt", FORMATS)
def test_round_trip_20_nodes(fmt):
    net = random_network(random.Random(20), 20, 0.3, "float")
    back = read_network(network_to_bytes(net, fmt), fmt)
    assert back == net
    assert network_to_bytes(back, fmt) == network_to_bytes(net, fmt)


@pytest.mark.parametrize("fmt", FORMATS)
def test_round_trip_keeps_isolated_nodes_and_attributes(fmt):
    net = star(3)
    net.add_node("lonely", "source", documents=4, title="A & B")
    net.attributes.update(network_kind="source-citation", normalized=False)
    assert read_network(network_to_bytes(net, fmt), fmt) == net


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 60), st.sampled_from(FORMATS), st.sampled_from(["int", "float"]))
def test_round_trip_property(seed, n, fmt, weights):
    net = random_network(random.Random(seed), n, 0.15, weights)
    assert read_network(network_to_bytes(net, fmt), fmt) == net


def test_missing_vertices_is_parse_failure():
    with pytest.raises(ParseFailure):
        read_network(b"*Edges\n1 2 1\n", "pajek")


def test_parse_failure_has_position():
    with pytest.raises(ParseFailure) as err:
        read_network(b"source\ttarget\tweight\na\tb\tzero\n", "edge-tsv")
    assert err.value.line == 2


def test_tsv_auto_registers_undeclared_labels():
    net = read_network(b"source\ttarget\tweight\nB\tA\t2\nC\tB\t1\n", "edge-tsv")
    assert [node.label for node in net.nodes] == ["B", "A", "C"]
    assert net.weight(net.node_id("A"), net.node_id("B")) == 2


def test_file_helpers(tmp_path):
    net = two_cliques()
    for name in ("g.tsv", "g.net", "g.gml"):
        path = tmp_path / name
        save_network(net, path)
        assert load_network(path) == net
    assert format_for_path("x.net") == "pajek"
    with pytest.raises(ValueError):
        format_for_path("x.xlsx")


class _Broken(io.RawIOBase):
    def writable(self):
        return True

    def write(self, b):
        raise OSError("disk full")


def test_sink_failure():
    with pytest.raises(SinkFailure):
        write_network(clique(3), "gml", _Broken())
