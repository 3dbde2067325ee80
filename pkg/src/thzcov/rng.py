"""Counter-based random numbers keyed by (seed, trial, stream, counter).

Each draw is a pure function of its key, so any trial can be regenerated
in isolation and results do not depend on evaluation order or on how
trials are split across workers. The mixer is the SplitMix64 finaliser.
"""
from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_STREAM_MUL = np.uint64(0xD1B54A32D192ED03)
_COUNTER_MUL = np.uint64(0x8CB92BA72F3D8DD7)

STREAMS = {
    "walls_x": 1,
    "walls_y": 2,
    "humans": 3,
    "beam": 4,
    "human_pos": 5,
    "ppp_count": 6,
    "ppp_pos": 7,
}

_MASK64 = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _as_u64(x) -> np.ndarray:
    a = np.asarray(x)
    if a.dtype.kind == "i":
        a = a.astype(np.int64).view(np.uint64) if a.ndim else np.uint64(int(a) & _MASK64)
    return np.asarray(a, dtype=np.uint64)


def trial_keys(seed: int, trials, stream: str) -> np.ndarray:
    """Per-(trial, stream) base hash; reused for every counter in that stream."""
    sid = STREAMS[stream]
    s = np.uint64(int(seed) & _MASK64)
    t = _as_u64(trials)
    with np.errstate(over="ignore"):
        base = _mix(s + _GOLDEN)
        return _mix(base ^ (t * _GOLDEN + np.uint64(sid) * _STREAM_MUL))


def bits(keys: np.ndarray, counters) -> np.ndarray:
    c = _as_u64(counters)
    with np.errstate(over="ignore"):
        return _mix(keys ^ ((c + np.uint64(1)) * _COUNTER_MUL))


def uniform_from_keys(keys: np.ndarray, counters) -> np.ndarray:
    """Uniforms in the open interval (0, 1); broadcasting between keys and counters."""
    h = bits(keys, counters) >> np.uint64(11)
    return (h.astype(np.float64) + 0.5) * 2.0 ** -53


def uniform(seed: int, trials, stream: str, counters) -> np.ndarray:
    return uniform_from_keys(trial_keys(seed, trials, stream), counters)


def exponential(seed: int, trials, stream: str, counters, rate: float) -> np.ndarray:
    return -np.log(uniform(seed, trials, stream, counters)) / rate


class CounterGenerator:
    """Minimal ``numpy.random.Generator``-like view on one (seed, trial, stream).

    Successive calls consume successive counters, so the sequence is fixed by
    the key alone.
    """

    def __init__(self, seed: int, trial: int, stream: str):
        self._keys = trial_keys(seed, np.array([trial], dtype=np.int64), stream)[0]
        self._next = 0

    def random(self, size=None):
        n = 1 if size is None else int(np.prod(size))
        out = uniform_from_keys(self._keys, np.arange(self._next, self._next + n, dtype=np.uint64))
        self._next += n
        return float(out[0]) if size is None else out.reshape(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        u = self.random(size)
        return low + (high - low) * u
