"""CSV report emitters over experiment logs: scores table, frequency tables.

The score table mirrors the experiment summary layout: one row per
(dataset, layer count), method medians with significance markers against
the standard scores, and a ``top`` column naming the best-median method
with its marker against the second best. Frequency tables pool the best
architectures found by the three search methods.
"""

import numpy as np

from .experiment import METHOD_ORDER
from .stats import af_frequency_table, median, permutation_test_medians, significance_markers, top_frequencies

SEARCH_METHODS = ("random", "tpe", "cmaes")
_BUCKETS = ("input", "hidden", "output")


def format_score(x: float) -> str:
    """Three decimals with trailing zeros trimmed, at least one decimal digit."""
    s = f"{x:.3f}".rstrip("0")
    if s.endswith("."):
        s += "0"
    return s


def format_pct(f: float) -> str:
    return f"{100.0 * f:.1f}"


def _grouped(records):
    groups: dict[tuple[str, int], list] = {}
    for rec in records:
        groups.setdefault((rec.dataset, rec.n_layers), []).append(rec)
    return dict(sorted(groups.items()))


def _method_scores(group, method):
    return [rec.results[method].test_score for rec in group if method in rec.results and not rec.results[method].skipped]


def table1_csv(records, rounds=10000, seed=0) -> str:
    """Scores table: dataset,lay,standard,random,tpe,cmaes,top.

    Score cells carry the median over replicates plus a marker ("!!" for
    p < 0.001, "!" for p < 0.05) from a permutation test against the
    standard scores; the top cell compares the best-median method with the
    second best. Median ties resolve in column order standard < random <
    tpe < cmaes. One seeded generator drives all tests in row order, so
    re-summarising a log reproduces the bytes exactly.
    """
    rng = np.random.default_rng([seed])
    lines = ["dataset,lay,standard,random,tpe,cmaes,top"]
    for (dataset, lay), group in _grouped(records).items():
        scores = {m: _method_scores(group, m) for m in METHOD_ORDER}
        cells = {}
        for m in METHOD_ORDER:
            if not scores[m]:
                cells[m] = ""
                continue
            cell = format_score(median(scores[m]))
            if m != "standard" and scores["standard"]:
                p = permutation_test_medians(scores[m], scores["standard"], rounds, rng).p_value
                marker = significance_markers(p)
                if marker:
                    cell += f" {marker}"
            cells[m] = cell
        present = [m for m in METHOD_ORDER if scores[m]]
        top_cell = ""
        if present:
            ordered = sorted(present, key=lambda m: (-median(scores[m]), METHOD_ORDER.index(m)))
            top = ordered[0]
            top_cell = top
            if len(ordered) > 1:
                second = ordered[1]
                p = permutation_test_medians(scores[top], scores[second], rounds, rng).p_value
                marker = significance_markers(p)
                if marker:
                    top_cell += f" {marker}"
        lines.append(f"{dataset},{lay},{cells['standard']},{cells['random']},{cells['tpe']},{cells['cmaes']},{top_cell}")
    return "\n".join(lines) + "\n"


def _search_architectures(group):
    archs = []
    for rec in group:
        for m in SEARCH_METHODS:
            res = rec.results.get(m)
            if res is not None and not res.failed and not res.skipped and res.architecture:
                archs.append(res.architecture)
    return archs


def table2_csv(records, top_k=10) -> str:
    """Per layer count, top-k activation frequencies at input/hidden/output."""
    lines = ["lay,position,af,freq_pct"]
    by_lay: dict[int, list] = {}
    for (_, lay), group in _grouped(records).items():
        by_lay.setdefault(lay, []).extend(group)
    for lay in sorted(by_lay):
        archs = _search_architectures(by_lay[lay])
        if not archs:
            continue
        table = af_frequency_table(archs)
        for bucket in _BUCKETS:
            for name, f in top_frequencies(table.bucket(bucket), top_k):
                lines.append(f"{lay},{bucket},{name},{format_pct(f)}")
    return "\n".join(lines) + "\n"


def table3_csv(records) -> str:
    """Per (dataset, layer count), the single topmost activation per bucket."""
    lines = ["dataset,lay,position,af,freq_pct"]
    for (dataset, lay), group in _grouped(records).items():
        archs = _search_architectures(group)
        if not archs:
            continue
        table = af_frequency_table(archs)
        for bucket in _BUCKETS:
            name, f = top_frequencies(table.bucket(bucket), 1)[0]
            lines.append(f"{dataset},{lay},{bucket},{name},{format_pct(f)}")
    return "\n".join(lines) + "\n"
