"""
Node-growth statistics between a scene graph and its completed version
"""
from typing import Dict, List, Optional

import numpy as np

from .scene_graph import SceneGraph, node_kinds


class GrowthReport:
    """
    Per-kind node counts before and after completion

    Results:
        before (:obj:`dict`): kind -> count in the original graph

        after (:obj:`dict`): kind -> count in the completed graph

        rates (:obj:`dict`): kind -> (after - before) / before. None when the kind was absent before
    """

    def __init__(self, before: Dict[str, int], after: Dict[str, int]) -> None:
        self.before = dict(before)
        self.after = dict(after)
        self.rates = {}  # type: Dict[str, Optional[float]]
        for k in node_kinds:
            b, a = self.before.get(k, 0), self.after.get(k, 0)
            self.rates[k] = (a - b) / b if b > 0 else None

    def report(self) -> List[str]:
        lines = []
        for k in node_kinds:
            rate = self.rates[k]
            text = "undefined" if rate is None else f"{100 * rate:.1f}%"
            lines.append(f"{k}: {self.before[k]} -> {self.after[k]} ({text})")
        return lines


def graph_stats(before: SceneGraph, after: SceneGraph) -> GrowthReport:
    return GrowthReport(before.kind_counts(), after.kind_counts())


class CorpusGrowth:
    """
    Growth rates over many graphs

    *mean_rates* averages the defined per-graph rates; *pooled_rates* compares total counts.
    """

    def __init__(self) -> None:
        self.reports = []  # type: List[GrowthReport]

    def add(self, report: GrowthReport) -> None:
        self.reports.append(report)

    def mean_rates(self) -> Dict[str, Optional[float]]:
        out = {}
        for k in node_kinds:
            defined = [r.rates[k] for r in self.reports if r.rates[k] is not None]
            out[k] = float(np.mean(defined)) if defined else None
        return out

    def pooled_rates(self) -> Dict[str, Optional[float]]:
        out = {}
        for k in node_kinds:
            b = sum(r.before[k] for r in self.reports)
            a = sum(r.after[k] for r in self.reports)
            out[k] = (a - b) / b if b > 0 else None
        return out

    def report(self) -> List[str]:
        means, pooled = self.mean_rates(), self.pooled_rates()
        lines = [f"graphs: {len(self.reports)}"]
        for k in node_kinds:
            m = "undefined" if means[k] is None else f"{100 * means[k]:.1f}%"
            p = "undefined" if pooled[k] is None else f"{100 * pooled[k]:.1f}%"
            lines.append(f"{k}: mean growth {m}, pooled growth {p}")
        return lines
