"""Graph filtering and rendering as DOT or JSON."""
from __future__ import annotations

import json

from ..lang.printer import annotation_text
from .diagnose import BLOCKING_CALL, NODE_MISMATCH, edge_subject, node_label
from .graph import CallGraph
from .infer import InferenceResult


def filter_graph(g: CallGraph, r: InferenceResult) -> CallGraph:
    """Drop native leaves declared elsewhere; defined and blocking nodes always stay."""
    keep = {
        n.id
        for n in g.nodes.values()
        if n.defined or r.is_coroutine(n.id) or n.given.is_blocking
    }
    return g.subgraph(keep)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _sorted_edges(g: CallGraph) -> list:
    return sorted(g.edges, key=lambda e: (e.caller, e.callee, e.site))


def emit_dot(g: CallGraph, r: InferenceResult, diagnostics=()) -> str:
    if not g.nodes:
        return "digraph G { }\n"
    bad_nodes = {d.subject for d in diagnostics if d.kind in NODE_MISMATCH}
    bad_edges = {d.subject for d in diagnostics if d.kind == BLOCKING_CALL}
    lines = ["digraph G {"]
    for nid in sorted(g.nodes):
        n = g.nodes[nid]
        attrs = [f"label={_quote(node_label(n))}", "shape=box" if r.is_coroutine(nid) else "shape=ellipse"]
        if nid in bad_nodes:
            attrs += ["style=dashed", "color=red"]
        lines.append(f"  {_quote(nid)} [{', '.join(attrs)}];")
    for e in _sorted_edges(g):
        attrs = []
        if edge_subject(e.caller, e.callee) in bad_edges:
            attrs += ["style=dashed", "color=red"]
        if e.indirect:
            attrs.append("arrowhead=empty")
        tail = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {_quote(e.caller)} -> {_quote(e.callee)}{tail};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_json(g: CallGraph, r: InferenceResult) -> dict:
    nodes = []
    for nid in sorted(g.nodes):
        n = g.nodes[nid]
        nodes.append({
            "id": nid,
            "label": node_label(n),
            "defined": n.defined,
            "given": annotation_text(n.given) or "native",
            "inferred": r.inferred.get(nid, "native"),
            "address_retained": n.address_retained,
        })
    edges = [{"from": e.caller, "to": e.callee, "indirect": e.indirect, "site": e.site} for e in _sorted_edges(g)]
    return {"nodes": nodes, "edges": edges}


def emit_json(g: CallGraph, r: InferenceResult) -> str:
    return json.dumps(graph_json(g, r), indent=2, sort_keys=True) + "\n"


def diagnostics_json(diagnostics) -> str:
    return json.dumps([d.to_json() for d in diagnostics], indent=2) + "\n"
