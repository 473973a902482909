"""Counter-based deterministic random streams.

All randomness in this package is derived from a 64-bit seed through the
splitmix64 output function evaluated at explicit counters.  Draw i of a
stream is a pure function of (seed, i), so streams are reproducible
bit-for-bit across platforms, prefix-stable (the first m draws do not
depend on how many draws follow), and safe to evaluate out of order or
in parallel.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = 0x9E3779B97F4A7C15  # 2**64 / golden ratio, the splitmix64 increment
_MASK = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; uint64 wraparound mod 2**64 is the point, so
    # silence the overflow warning numpy emits for scalar operands
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def _counter_words(seed: int, counters: np.ndarray) -> np.ndarray:
    """Mixed 64-bit words at the given counters of the seed's stream."""
    base = np.uint64((seed + _GOLDEN) & _MASK)
    idx = np.asarray(counters, dtype=np.uint64)
    return _mix(base + (idx + np.uint64(1)) * np.uint64(_GOLDEN))


def uniform01(seed: int, start: int, count: int) -> np.ndarray:
    """Uniform [0, 1) doubles at stream positions start .. start+count-1."""
    words = _counter_words(seed, np.arange(start, start + count, dtype=np.uint64))
    return (words >> np.uint64(11)) * 2.0**-53


def derive_seed(seed: int, label: int) -> int:
    """Child seed for an independent substream (e.g. one episode)."""
    return int(_counter_words(seed, np.array([label], dtype=np.uint64))[0])


def derive_seeds(seed: int, labels: np.ndarray) -> np.ndarray:
    """Vectorized ``derive_seed`` over an array of labels."""
    return _counter_words(seed, labels)


def coin(episode_seed: int | np.ndarray, step: int) -> np.ndarray:
    """Fair coin for the given step, 0 or 1; vectorized over episode seeds."""
    base = np.asarray(episode_seed, dtype=np.uint64)
    word = _mix(base + np.uint64((step + 1) * _GOLDEN & _MASK))
    return (word >> np.uint64(63)).astype(np.int64)
