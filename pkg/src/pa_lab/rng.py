"""Counter-based random number generation.

The whole laboratory draws its randomness from SplitMix64. Because the
generator is counter-based (output i is a pure function of seed and i),
streams can be produced scalar or in vectorized numpy batches with
identical results, and a stream's state is fully described by
(seed, counter). That makes replicates, checkpoints, and parallel runs
reproducible by construction.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

_U64_GOLDEN = np.uint64(GOLDEN)
_U64_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_U64_MUL2 = np.uint64(0x94D049BB133111EB)
_SHIFT30 = np.uint64(30)
_SHIFT27 = np.uint64(27)
_SHIFT31 = np.uint64(31)
_SHIFT11 = np.uint64(11)
_INV53 = 2.0**-53


def mix64(z: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit value."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, stream_id: int) -> int:
    """Derive an independent per-stream seed from a master seed.

    Defined as the first SplitMix64 output of the state
    master_seed XOR (stream_id * GOLDEN), so distinct stream ids give
    decorrelated streams and any single stream can be reconstructed
    without touching the others.
    """
    x = (master_seed ^ ((stream_id * GOLDEN) & MASK64)) & MASK64
    return mix64((x + GOLDEN) & MASK64)


class SplitMix64Stream:
    """A positioned stream of SplitMix64 outputs.

    State is (seed, counter); output i of the stream is
    mix64(seed + i * GOLDEN) for i = 1, 2, ...  Scalar and batched
    access advance the same counter and produce the same values.
    """

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int, counter: int = 0):
        self.seed = seed & MASK64
        self.counter = counter

    def state(self) -> tuple[int, int]:
        return (self.seed, self.counter)

    @classmethod
    def from_state(cls, state: tuple[int, int]) -> "SplitMix64Stream":
        return cls(state[0], state[1])

    def next_u64(self) -> int:
        self.counter += 1
        return mix64((self.seed + self.counter * GOLDEN) & MASK64)

    def next_float(self) -> float:
        """Next uniform in [0, 1) on the 2^-53 grid."""
        return (self.next_u64() >> 11) * _INV53

    def uniforms(self, count: int) -> np.ndarray:
        """Next `count` uniforms in [0, 1) as a float64 array.

        Bit-for-bit equal to `count` successive next_float() calls.
        """
        idx = np.arange(self.counter + 1, self.counter + count + 1, dtype=np.uint64)
        self.counter += count
        z = np.uint64(self.seed) + idx * _U64_GOLDEN
        z = (z ^ (z >> _SHIFT30)) * _U64_MUL1
        z = (z ^ (z >> _SHIFT27)) * _U64_MUL2
        z = z ^ (z >> _SHIFT31)
        return (z >> _SHIFT11) * _INV53


class BufferedUniforms:
    """Sequential uniform draws backed by batched stream reads.

    For consumers that do not know their draw count up front (event
    queues); the underlying stream position stays exact because batches
    are counter-addressed.
    """

    __slots__ = ("stream", "_buf", "_pos", "_chunk")

    def __init__(self, stream: SplitMix64Stream, chunk: int = 4096):
        self.stream = stream
        self._chunk = chunk
        self._buf: list[float] = []
        self._pos = 0

    def one(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self.stream.uniforms(self._chunk).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u
