"""Sorted spectra with multiplicities and channel provenance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SpectrumSeries", "NEGATIVE_CLAMP"]

# Negative values down to this fraction of the largest magnitude are rounding noise.
NEGATIVE_CLAMP = 1e-12


@dataclass(frozen=True, eq=False)
class SpectrumSeries:
    """Nonincreasing eigen- or singular values, stored once per distinct entry.

    Each entry carries a multiplicity and the channel it came from; the
    expanded view repeats an entry ``multiplicity`` times, so that rank ``k``
    refers to the usual count-with-multiplicity labelling.

    ``trust_k`` is the largest rank believed to be resolved by the
    discretisation that produced the series.
    """

    values: np.ndarray
    multiplicity: np.ndarray
    channel: np.ndarray
    radial_index: np.ndarray
    trust_k: int
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_entries(cls, values, multiplicity=None, channel=None, radial_index=None,
                     trust_k=None, metadata=None) -> "SpectrumSeries":
        """Sort raw entries as (value desc, channel asc, radial index asc) and clamp noise."""
        values = np.asarray(values, dtype=float).ravel()
        n = values.size
        multiplicity = np.ones(n, dtype=int) if multiplicity is None else np.asarray(multiplicity, dtype=int).ravel()
        channel = np.zeros(n, dtype=int) if channel is None else np.asarray(channel, dtype=int).ravel()
        radial_index = np.arange(n) if radial_index is None else np.asarray(radial_index, dtype=int).ravel()
        if not (multiplicity.size == channel.size == radial_index.size == n):
            raise ValueError("entry arrays must have equal length")
        if np.any(multiplicity < 1):
            raise ValueError("multiplicities must be >= 1")
        if n:
            scale = np.max(np.abs(values))
            if np.any(values < -NEGATIVE_CLAMP * scale):
                raise ValueError(f"spectrum has a negative entry {values.min():.3e} beyond rounding noise")
            values = np.where(values < 0.0, 0.0, values)
        order = np.lexsort((radial_index, channel, -values))
        total = int(multiplicity.sum())
        return cls(
            values=values[order],
            multiplicity=multiplicity[order],
            channel=channel[order],
            radial_index=radial_index[order],
            trust_k=total if trust_k is None else int(min(trust_k, total)),
            metadata=dict(metadata or {}),
        )

    @classmethod
    def from_values(cls, values, trust_k=None, metadata=None) -> "SpectrumSeries":
        """Series of plain values, each with multiplicity one."""
        return cls.from_entries(values, trust_k=trust_k, metadata=metadata)

    def __len__(self) -> int:
        return int(self.multiplicity.sum())

    def expanded(self) -> np.ndarray:
        """Values repeated by multiplicity; index ``k - 1`` holds the k-th value."""
        return np.repeat(self.values, self.multiplicity)

    def expanded_channels(self) -> np.ndarray:
        return np.repeat(self.channel, self.multiplicity)

    def total(self) -> float:
        """Sum of all values counted with multiplicity (the trace for eigenvalues)."""
        return float(np.dot(self.values, self.multiplicity))

    @property
    def largest(self) -> float:
        return float(self.values[0]) if self.values.size else 0.0

    def count_above(self, threshold: float) -> int:
        return int(self.multiplicity[self.values > threshold].sum())

    def with_trust(self, trust_k: int, **extra) -> "SpectrumSeries":
        meta = dict(self.metadata)
        meta.update(extra)
        return SpectrumSeries(self.values, self.multiplicity, self.channel, self.radial_index,
                              int(min(trust_k, len(self))), meta)
