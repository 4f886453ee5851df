"""Network interchange: edge-tsv, Pajek ``.net`` and GML.

All writers are byte-deterministic (nodes in id order, edges in ``(i, j)``
order) and lossless for the networks this package builds, so
``read_network(write_network(net))`` reproduces ``net`` exactly, including
node kinds and attributes. Extra metadata rides in comment lines that other
tools skip (``#`` rows in TSV, ``%`` lines ahead of ``*Vertices`` in Pajek).
"""

from __future__ import annotations

import io
import json
import re
import shlex
from pathlib import Path
from typing import IO, Any, Iterator

from .errors import ParseFailure, SinkFailure
from .netcore import NODE_KINDS, Network

FORMATS = ("edge-tsv", "pajek", "gml")
EXTENSIONS = {".tsv": "edge-tsv", ".txt": "edge-tsv", ".net": "pajek", ".gml": "gml"}
DEFAULT_KIND = "document"


def format_weight(w: float) -> str:
    """Integers print bare; other values with up to 6 significant digits."""
    if isinstance(w, int) or float(w).is_integer():
        return str(int(w))
    return format(w, ".6g")


def parse_weight(text: str) -> int | float:
    try:
        return int(text)
    except ValueError:
        return float(text)


def _json(value: Any) -> str:
    return json.dumps(value, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def format_for_path(path: str | Path) -> str:
    fmt = EXTENSIONS.get(Path(path).suffix.lower())
    if fmt is None:
        raise ValueError(f"cannot infer network format from {str(path)!r}")
    return fmt


# ---------------------------------------------------------------- writing


def write_network(net: Network, format: str, sink: IO[bytes]) -> None:
    if format not in FORMATS:
        raise ValueError(f"unknown network format {format!r}")
    writer = {"edge-tsv": _tsv_lines, "pajek": _pajek_lines, "gml": _gml_lines}[format]
    text = "".join(line + "\n" for line in writer(net))
    try:
        sink.write(text.encode("utf-8"))
    except (OSError, ValueError) as exc:
        raise SinkFailure(str(exc)) from exc


def network_to_bytes(net: Network, format: str) -> bytes:
    buf = io.BytesIO()
    write_network(net, format, buf)
    return buf.getvalue()


_TSV_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_TSV_UNESCAPE = re.compile(r"\\(.)")


def _tsv_escape(label: str) -> str:
    out = "".join(_TSV_ESCAPES.get(ch, ch) for ch in label)
    return "\\" + out if out.startswith("#") else out


def _tsv_unescape(text: str) -> str:
    table = {"t": "\t", "n": "\n", "r": "\r"}
    return _TSV_UNESCAPE.sub(lambda m: table.get(m.group(1), m.group(1)), text)


def _tsv_lines(net: Network) -> Iterator[str]:
    yield "source\ttarget\tweight"
    if net.attributes:
        yield f"#graph\t{_json(net.attributes)}"
    for node in net.nodes:
        yield f"#node\t{_tsv_escape(node.label)}\t{node.kind}\t{_json(node.attributes)}"
    for i, j, w in net.edges():
        yield f"{_tsv_escape(net.nodes[i].label)}\t{_tsv_escape(net.nodes[j].label)}\t{format_weight(w)}"


def _pajek_quote(label: str) -> str:
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _pajek_lines(net: Network) -> Iterator[str]:
    if net.attributes:
        yield f"% graph {_json(net.attributes)}"
    for node in net.nodes:
        if node.kind != DEFAULT_KIND or node.attributes:
            yield f"% node {node.id + 1} {node.kind} {_json(node.attributes)}"
    yield f"*Vertices {net.n}"
    for node in net.nodes:
        if "\n" in node.label or "\r" in node.label:
            raise SinkFailure(f"label with line break is not representable in pajek: {node.label!r}")
        yield f"{node.id + 1} {_pajek_quote(node.label)}"
    yield "*Edges"
    for i, j, w in net.edges():
        yield f"{i + 1} {j + 1} {format_weight(w)}"


_GML_KEY = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_GML_RESERVED = {"id", "label", "kind", "source", "target", "weight"}


def _gml_string(text: str) -> str:
    return '"' + text.replace("&", "&amp;").replace('"', "&quot;") + '"'


def _gml_value(key: str, value: Any) -> str:
    if not _GML_KEY.match(key):
        raise SinkFailure(f"attribute name not representable in GML: {key!r}")
    if isinstance(value, bool):
        return f"{key} {int(value)}"
    if isinstance(value, int):
        return f"{key} {value}"
    if isinstance(value, float):
        return f"{key} {value!r}"
    if isinstance(value, str):
        return f"{key} {_gml_string(value)}"
    raise SinkFailure(f"attribute {key!r} has unsupported type {type(value).__name__}")


def _gml_lines(net: Network) -> Iterator[str]:
    yield "graph ["
    yield "  directed 0"
    for key in sorted(net.attributes):
        yield "  " + _gml_value(key, net.attributes[key])
    for node in net.nodes:
        yield "  node ["
        yield f"    id {node.id}"
        yield f"    label {_gml_string(node.label)}"
        yield f"    kind {_gml_string(node.kind)}"
        for key in sorted(node.attributes):
            if key in _GML_RESERVED:
                raise SinkFailure(f"node attribute name is reserved: {key!r}")
            yield "    " + _gml_value(key, node.attributes[key])
        yield "  ]"
    for i, j, w in net.edges():
        yield "  edge ["
        yield f"    source {i}"
        yield f"    target {j}"
        yield f"    weight {format_weight(w)}"
        yield "  ]"
    yield "]"


# ---------------------------------------------------------------- reading


def read_network(source: IO[bytes] | bytes, format: str) -> Network:
    if format not in FORMATS:
        raise ValueError(f"unknown network format {format!r}")
    data = source if isinstance(source, (bytes, bytearray)) else source.read()
    try:
        text = bytes(data).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseFailure(1, f"not UTF-8: {exc}") from None
    lines = [line[:-1] if line.endswith("\r") else line for line in text.split("\n")]
    reader = {"edge-tsv": _read_tsv, "pajek": _read_pajek, "gml": _read_gml}[format]
    return reader(lines)


def save_network(net: Network, path: str | Path, format: str | None = None) -> None:
    fmt = format or format_for_path(path)
    with open(path, "wb") as fh:
        write_network(net, fmt, fh)


def load_network(path: str | Path, format: str | None = None) -> Network:
    fmt = format or format_for_path(path)
    with open(path, "rb") as fh:
        return read_network(fh, fmt)


def _load_json(lineno: int, text: str) -> dict:
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseFailure(lineno, f"bad attribute JSON: {exc}") from None
    if not isinstance(value, dict):
        raise ParseFailure(lineno, "attributes must be a JSON object")
    return value


def _kind(lineno: int, kind: str) -> str:
    if kind not in NODE_KINDS:
        raise ParseFailure(lineno, f"unknown node kind {kind!r}")
    return kind


def _weight(lineno: int, text: str) -> int | float:
    try:
        w = parse_weight(text)
    except ValueError:
        raise ParseFailure(lineno, f"bad weight {text!r}") from None
    if not w > 0:
        raise ParseFailure(lineno, f"non-positive weight {text!r}")
    return w


def _add_edge(net: Network, lineno: int, i: int, j: int, w: float) -> None:
    if i == j:
        raise ParseFailure(lineno, "self-loop")
    net.add_edge(i, j, w)


def _read_tsv(lines: list[str]) -> Network:
    if not lines or lines[0].split("\t")[:3] != ["source", "target", "weight"]:
        raise ParseFailure(1, "missing 'source\\ttarget\\tweight' header")
    net = Network()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if line.startswith("#graph\t"):
            net.attributes.update(_load_json(lineno, line.split("\t", 1)[1]))
            continue
        if line.startswith("#node\t"):
            parts = line.split("\t")
            if len(parts) != 4:
                raise ParseFailure(lineno, "node line needs label, kind and attributes")
            label = _tsv_unescape(parts[1])
            if net.has_label(label):
                raise ParseFailure(lineno, f"node declared twice: {label!r}")
            net.add_node(label, _kind(lineno, parts[2]), **_load_json(lineno, parts[3]))
            continue
        if line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseFailure(lineno, f"expected 3 tab-separated fields, got {len(parts)}")
        i = net.ensure_node(_tsv_unescape(parts[0]), DEFAULT_KIND)
        j = net.ensure_node(_tsv_unescape(parts[1]), DEFAULT_KIND)
        _add_edge(net, lineno, i, j, _weight(lineno, parts[2]))
    return net


def _read_pajek(lines: list[str]) -> Network:
    graph_attrs: dict = {}
    node_meta: dict[int, tuple[str, dict]] = {}
    pos = 0
    while pos < len(lines) and not lines[pos].lower().startswith("*vertices"):
        line = lines[pos].strip()
        pos += 1
        if line.startswith("% graph "):
            graph_attrs = _load_json(pos, line[len("% graph "):])
        elif line.startswith("% node "):
            parts = line.split(" ", 4)
            if len(parts) != 5:
                raise ParseFailure(pos, "bad node metadata line")
            try:
                number = int(parts[2])
            except ValueError:
                raise ParseFailure(pos, f"bad vertex number {parts[2]!r}") from None
            node_meta[number] = (_kind(pos, parts[3]), _load_json(pos, parts[4]))
        elif line and not line.startswith("%") and not line.lower().startswith("*network"):
            raise ParseFailure(pos, f"unexpected line before *Vertices: {line!r}")
    if pos == len(lines):
        raise ParseFailure(pos or 1, "missing *Vertices section")
    header = lines[pos].split()
    pos += 1
    try:
        count = int(header[1])
    except (IndexError, ValueError):
        raise ParseFailure(pos, "bad *Vertices line") from None

    net = Network(graph_attrs)
    for number in range(1, count + 1):
        if pos >= len(lines):
            raise ParseFailure(pos, f"expected {count} vertices")
        lineno, line = pos + 1, lines[pos]
        pos += 1
        try:
            fields = shlex.split(line, posix=True)
        except ValueError as exc:
            raise ParseFailure(lineno, str(exc)) from None
        if len(fields) < 2 or fields[0] != str(number):
            raise ParseFailure(lineno, f"expected vertex {number}")
        kind, attrs = node_meta.get(number, (DEFAULT_KIND, {}))
        if net.has_label(fields[1]):
            raise ParseFailure(lineno, f"duplicate vertex label {fields[1]!r}")
        net.add_node(fields[1], kind, **attrs)

    while pos < len(lines) and not lines[pos].strip():
        pos += 1
    if pos >= len(lines) or lines[pos].strip().lower() != "*edges":
        raise ParseFailure(pos + 1, "missing *Edges section")
    pos += 1
    for lineno, line in enumerate(lines[pos:], start=pos + 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) not in (2, 3):
            raise ParseFailure(lineno, "edge line needs 'i j [w]'")
        try:
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
        except ValueError:
            raise ParseFailure(lineno, "non-integer vertex number") from None
        if not (0 <= i < count and 0 <= j < count):
            raise ParseFailure(lineno, "vertex number out of range")
        w = _weight(lineno, parts[2]) if len(parts) == 3 else 1
        _add_edge(net, lineno, i, j, w)
    return net


_GML_TOKEN = re.compile(
    r'(?P<ws>\s+)|(?P<comment>#[^\n]*)|(?P<open>\[)|(?P<close>\])|(?P<str>"[^"]*")'
    r"|(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)|(?P<key>[A-Za-z_][A-Za-z0-9_]*)"
)


def _gml_tokens(lines: list[str]) -> Iterator[tuple[int, str, str]]:
    text = "\n".join(lines)
    pos, lineno = 0, 1
    while pos < len(text):
        m = _GML_TOKEN.match(text, pos)
        if m is None:
            raise ParseFailure(lineno, f"unexpected GML input {text[pos:pos + 20]!r}")
        kind, value = m.lastgroup, m.group()
        if kind not in ("ws", "comment"):
            yield lineno, kind, value
        lineno += value.count("\n")
        pos = m.end()


def _gml_unquote(token: str) -> str:
    return token[1:-1].replace("&quot;", '"').replace("&amp;", "&")


def _gml_parse_list(tokens: Iterator[tuple[int, str, str]], closing: bool) -> list:
    items = []
    for lineno, kind, value in tokens:
        if kind == "close":
            if not closing:
                raise ParseFailure(lineno, "unbalanced ']'")
            return items
        if kind != "key":
            raise ParseFailure(lineno, f"expected key, got {value!r}")
        nxt = next(tokens, None)
        if nxt is None:
            raise ParseFailure(lineno, f"key {value!r} has no value")
        vline, vkind, vtext = nxt
        if vkind == "open":
            items.append((lineno, value, _gml_parse_list(tokens, True)))
        elif vkind == "str":
            items.append((lineno, value, _gml_unquote(vtext)))
        elif vkind == "num":
            items.append((lineno, value, parse_weight(vtext)))
        else:
            raise ParseFailure(vline, f"bad value for {value!r}")
    if closing:
        raise ParseFailure(lineno if items else 1, "unterminated list")
    return items


def _read_gml(lines: list[str]) -> Network:
    tokens = _gml_tokens(lines)
    top = _gml_parse_list(tokens, False)
    graphs = [item for item in top if item[1] == "graph"]
    if len(graphs) != 1 or not isinstance(graphs[0][2], list):
        raise ParseFailure(1, "expected exactly one graph [...] block")
    net = Network()
    ids: dict[Any, int] = {}
    edges = []
    for lineno, key, value in graphs[0][2]:
        if key == "node":
            fields = {k: v for _, k, v in value}
            if "id" not in fields:
                raise ParseFailure(lineno, "node without id")
            label = str(fields.pop("label", fields["id"]))
            gml_id = fields.pop("id")
            kind = _kind(lineno, str(fields.pop("kind", DEFAULT_KIND)))
            if gml_id in ids or net.has_label(label):
                raise ParseFailure(lineno, f"duplicate node {label!r}")
            ids[gml_id] = net.add_node(label, kind, **fields)
        elif key == "edge":
            edges.append((lineno, {k: v for _, k, v in value}))
        elif key == "directed":
            if value:
                raise ParseFailure(lineno, "directed graphs are not supported")
        elif not isinstance(value, list):
            net.attributes[key] = value
    for lineno, fields in edges:
        try:
            i, j = ids[fields["source"]], ids[fields["target"]]
        except KeyError:
            raise ParseFailure(lineno, "edge references unknown node") from None
        w = fields.get("weight", 1)
        if not (isinstance(w, (int, float)) and w > 0):
            raise ParseFailure(lineno, f"bad weight {w!r}")
        _add_edge(net, lineno, i, j, w)
    return net
