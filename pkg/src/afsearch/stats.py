"""Significance machinery and activation-frequency analytics.

The permutation test relabels the pooled scores uniformly at random while
preserving group sizes and compares absolute median differences two-sided;
the p estimator is add-one, p = (1 + #{stat >= observed}) / (rounds + 1),
so p is never below 1/(rounds+1) and identical groups give exactly 1.0.
"""

from dataclasses import dataclass

import numpy as np

_CHUNK_ROUNDS = 2048


@dataclass
class PermutationTestResult:
    observed: float
    p_value: float
    rounds: int


@dataclass
class FrequencyTable:
    """Per position bucket (input / hidden / output), name -> frequency."""

    input: dict[str, float]
    hidden: dict[str, float]
    output: dict[str, float]

    def bucket(self, name: str) -> dict[str, float]:
        return {"input": self.input, "hidden": self.hidden, "output": self.output}[name]


def median(xs) -> float:
    """Order-statistic median; even-length lists average the two central values."""
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        raise ValueError("median of an empty list")
    return float(np.median(xs))


def permutation_test_medians(a, b, rounds=10000, rng=None) -> PermutationTestResult:
    """Two-sided Monte-Carlo permutation test on the median difference."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("both groups need at least 2 values")
    if rng is None:
        raise ValueError("permutation_test_medians requires a seeded generator")
    pool = np.concatenate([a, b])
    na = a.size
    observed = abs(median(a) - median(b))
    count = 0
    remaining = rounds
    while remaining > 0:
        chunk = min(_CHUNK_ROUNDS, remaining)
        mat = rng.permuted(np.tile(pool, (chunk, 1)), axis=1)
        stat = np.abs(np.median(mat[:, :na], axis=1) - np.median(mat[:, na:], axis=1))
        count += int(np.sum(stat >= observed))
        remaining -= chunk
    p = (1 + count) / (rounds + 1)
    return PermutationTestResult(observed=observed, p_value=p, rounds=rounds)


def significance_markers(p: float) -> str:
    """Report marker: "!!" below 0.001, "!" below 0.05, else empty."""
    if p < 0.001:
        return "!!"
    if p < 0.05:
        return "!"
    return ""


def _names_of(arch):
    return [k if isinstance(k, str) else k.name for k in arch]


def af_frequency_table(architectures) -> FrequencyTable:
    """Frequencies of activations at the input / hidden / output positions.

    Position 0 is the input bucket, the last position the output bucket,
    everything in between pools into hidden. All architectures must share
    one length L >= 3.
    """
    archs = [_names_of(a) for a in architectures]
    if not archs:
        raise ValueError("no architectures given")
    lengths = {len(a) for a in archs}
    if len(lengths) != 1:
        raise ValueError(f"mixed architecture lengths: {sorted(lengths)}")
    L = lengths.pop()
    if L < 3:
        raise ValueError(f"architectures must have length >= 3, got {L}")

    def freqs(names):
        total = len(names)
        table: dict[str, float] = {}
        for n in names:
            table[n] = table.get(n, 0.0) + 1.0
        return {k: v / total for k, v in table.items()}

    return FrequencyTable(
        input=freqs([a[0] for a in archs]),
        hidden=freqs([n for a in archs for n in a[1:-1]]),
        output=freqs([a[-1] for a in archs]),
    )


def top_frequencies(bucket: dict[str, float], k: int) -> list[tuple[str, float]]:
    """Top-k (name, frequency) pairs, frequency descending, ties by name."""
    return sorted(bucket.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
