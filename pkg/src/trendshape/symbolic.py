"""Sliding-window SAX and eSAX symbolization plus ordinal feature encoding.

Each window is z-normalized on its own (per-window standardization changes
words near spikes, whole-series normalization would not), reduced to segment
statistics, and mapped to letters through standard-normal quantile breakpoints
so that symbols are equiprobable under the normalization.
"""

from __future__ import annotations

import enum
import string
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import norm

from .dataset import TimeSeries
from .eda import z_normalize
from .errors import EmptyInput, InvalidAlphabet, InvalidSegmentation, WindowTooLarge


class WordKind(enum.Enum):
    SAX = "SAX"
    ESAX = "ESAX"


@dataclass(frozen=True)
class Alphabet:
    """The first `size` lowercase letters."""

    size: int

    def __post_init__(self):
        if not 2 <= self.size <= 26:
            raise InvalidAlphabet(f"alphabet size must be in [2, 26], got {self.size}")

    @property
    def symbols(self) -> str:
        return string.ascii_lowercase[: self.size]


@dataclass(frozen=True, eq=False)
class Breakpoints:
    """Ascending z-score cuts, symmetric about 0 by quantile symmetry."""

    cuts: np.ndarray

    def __post_init__(self):
        cuts = np.asarray(self.cuts, dtype=float)
        cuts.setflags(write=False)
        object.__setattr__(self, "cuts", cuts)


@dataclass(frozen=True)
class SymbolicWord:
    symbols: str
    kind: WordKind

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class WordSequence:
    keyword: str
    words: tuple[SymbolicWord, ...]
    window: int
    n_segments: int


@dataclass(frozen=True, eq=False)
class SymbolicFeatureVector:
    keyword: str
    values: np.ndarray


@lru_cache(maxsize=64)
def gaussian_breakpoints(alphabet_size: int) -> Breakpoints:
    """Standard-normal quantile cuts: cuts[i] = Phi^-1((i+1)/size).

    Explicitly symmetrized so the sign symmetry holds exactly, not just to
    solver precision.
    """
    if not 2 <= alphabet_size <= 26:
        raise InvalidAlphabet(f"alphabet size must be in [2, 26], got {alphabet_size}")
    q = np.arange(1, alphabet_size) / alphabet_size
    cuts = norm.ppf(q)
    cuts = (cuts - cuts[::-1]) / 2.0
    return Breakpoints(cuts=cuts)


@lru_cache(maxsize=128)
def _paa_weights(length: int, n_segments: int) -> np.ndarray:
    """Row j holds sample weights for segment j; each row sums to 1.

    Sample i occupies [i, i+1) and segment j covers [j*L/n, (j+1)*L/n); the
    weight is the overlap length divided by the segment width, so boundary
    samples contribute fractionally to both neighbors and total mass is
    preserved.
    """
    seg = length / n_segments
    i = np.arange(length)
    j = np.arange(n_segments)[:, None]
    overlap = np.minimum(i + 1.0, (j + 1.0) * seg) - np.maximum(i, j * seg)
    w = np.clip(overlap, 0.0, None) / seg
    w.setflags(write=False)
    return w


@lru_cache(maxsize=128)
def _segment_members(length: int, n_segments: int) -> tuple[np.ndarray, ...]:
    """Indices of samples overlapping each segment with positive measure.

    Membership is decided in integer arithmetic (n*i < (j+1)*L and
    n*(i+1) > j*L) so boundary samples are classified identically on every
    platform.
    """
    members = []
    for j in range(n_segments):
        idx = [
            i
            for i in range(length)
            if n_segments * i < (j + 1) * length and n_segments * (i + 1) > j * length
        ]
        members.append(np.array(idx, dtype=np.intp))
    return tuple(members)


def paa(x, n_segments: int) -> np.ndarray:
    """Mass-preserving piecewise aggregate approximation.

    When the length is not divisible by ``n_segments`` each sample contributes
    fractionally to adjacent segments, so mean(paa(x)) == mean(x) and no
    samples are dropped.
    """
    x = np.asarray(x, dtype=float)
    if not 1 <= n_segments <= x.size:
        raise InvalidSegmentation(
            f"need 1 <= n_segments <= {x.size}, got {n_segments}"
        )
    return _paa_weights(x.size, n_segments) @ x


def symbolize(v, breakpoints: Breakpoints, alphabet: Alphabet) -> str:
    """Map values to letters by breakpoint interval; ties take the upper symbol."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    idx = np.searchsorted(breakpoints.cuts, v, side="right")
    symbols = alphabet.symbols
    return "".join(symbols[i] for i in idx)


def sax_word(window_values, n_segments: int, alphabet: Alphabet) -> SymbolicWord:
    """z-normalize, PAA, then symbolize; one letter per segment."""
    z = z_normalize(window_values)
    if n_segments > z.size:
        raise InvalidSegmentation(
            f"need n_segments <= window length {z.size}, got {n_segments}"
        )
    letters = symbolize(paa(z, n_segments), gaussian_breakpoints(alphabet.size), alphabet)
    return SymbolicWord(symbols=letters, kind=WordKind.SAX)


def esax_word(window_values, n_segments: int, alphabet: Alphabet) -> SymbolicWord:
    """Per segment emit (min, mean, max) symbols ordered by time of occurrence.

    The mean sits at the segment midpoint; min and max sit at their first
    occurrence. Position ties resolve min, then mean, then max, which pins the
    word for constant segments.
    """
    z = z_normalize(window_values)
    if n_segments > z.size:
        raise InvalidSegmentation(
            f"need n_segments <= window length {z.size}, got {n_segments}"
        )
    breakpoints = gaussian_breakpoints(alphabet.size)
    means = paa(z, n_segments)
    members = _segment_members(z.size, n_segments)
    seg = z.size / n_segments

    letters: list[str] = []
    for j in range(n_segments):
        idx = members[j]
        vals = z[idx]
        min_pos = float(idx[int(np.argmin(vals))])
        max_pos = float(idx[int(np.argmax(vals))])
        triple = [
            (min_pos, 0, float(vals.min())),
            ((j + 0.5) * seg, 1, float(means[j])),
            (max_pos, 2, float(vals.max())),
        ]
        triple.sort(key=lambda t: (t[0], t[1]))
        letters.append(symbolize([t[2] for t in triple], breakpoints, alphabet))
    return SymbolicWord(symbols="".join(letters), kind=WordKind.ESAX)


def sliding_words(
    x: TimeSeries,
    window: int = 52,
    n_segments: int = 12,
    alphabet: Alphabet = Alphabet(4),
    kind: WordKind = WordKind.SAX,
) -> WordSequence:
    """Step-1 sliding window over the series; length - window + 1 words."""
    n = len(x)
    if window > n:
        raise WindowTooLarge(f"window {window} exceeds series length {n}")
    make = sax_word if kind is WordKind.SAX else esax_word
    words = tuple(
        make(x.values[i : i + window], n_segments, alphabet) for i in range(n - window + 1)
    )
    return WordSequence(keyword=x.keyword, words=words, window=window, n_segments=n_segments)


def encode_features(ws: WordSequence) -> SymbolicFeatureVector:
    """Concatenate ordinal symbol indices (a=0, b=1, ...) in window order."""
    if not ws.words:
        raise EmptyInput(f"no words to encode for {ws.keyword!r}")
    a = ord("a")
    values = np.array(
        [ord(ch) - a for w in ws.words for ch in w.symbols], dtype=float
    )
    return SymbolicFeatureVector(keyword=ws.keyword, values=values)
