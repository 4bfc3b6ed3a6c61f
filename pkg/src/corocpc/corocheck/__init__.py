"""Annotation inference and checking over the call graph."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..lang.typecheck import TypedProgram
from .diagnose import (
    ANNOTATION_LOSS,
    BLOCKING_CALL,
    HYBRID,
    INFORMATIONAL,
    KIND_ORDER,
    MISSING,
    POINTER_INCONSISTENT,
    SPURIOUS,
    WRONG_BLOCKING,
    Diagnostic,
    check_value_flow,
    diagnose,
    sort_diagnostics,
)
from .graph import CallGraph, Edge, Node, build_call_graph
from .infer import InferenceResult, collect_roots, infer_annotations, reachability_oracle
from .output import diagnostics_json, emit_dot, emit_json, filter_graph, graph_json


@dataclass
class CheckResult:
    graph: CallGraph
    inference: InferenceResult
    diagnostics: list = field(default_factory=list)

    @property
    def findings(self) -> list:
        return [d for d in self.diagnostics if not d.informational]

    @property
    def clean(self) -> bool:
        return not self.findings


def check(tp: TypedProgram) -> CheckResult:
    """Whole pipeline: graph, roots, inference, node/edge diagnostics and value flow."""
    g = build_call_graph(tp)
    r = infer_annotations(g, collect_roots(tp, g))
    ds = sort_diagnostics(diagnose(tp, g, r) + check_value_flow(tp))
    return CheckResult(g, r, ds)


__all__ = [
    "ANNOTATION_LOSS", "BLOCKING_CALL", "HYBRID", "INFORMATIONAL", "KIND_ORDER", "MISSING",
    "POINTER_INCONSISTENT", "SPURIOUS", "WRONG_BLOCKING",
    "CallGraph", "CheckResult", "Diagnostic", "Edge", "InferenceResult", "Node",
    "build_call_graph", "check", "check_value_flow", "collect_roots", "diagnose",
    "diagnostics_json", "emit_dot", "emit_json", "filter_graph", "graph_json",
    "infer_annotations", "reachability_oracle", "sort_diagnostics",
]
