"""Keystream generation and the 2M-point phase constellation.

The running key comes from a Fibonacci LFSR seeded with the shared secret.
Each transmitted symbol consumes log2(M) keystream bits to pick a basis;
the data bit then selects one of the two antipodal points of that basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is an optional accelerator
    njit = None

DEFAULT_DEGREE = 32
DEFAULT_TAPS = (32, 22, 2, 1)  # maximal-length polynomial x^32+x^22+x^2+x+1

MAPPINGS = ("alternating", "plain")


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class Constellation:
    """2M phases phi_j = pi*j/M with a (bit, basis) <-> point mapping rule.

    Basis m owns the antipodal pair (m, m+M).  "plain" puts bit b at
    j = m + b*M; "alternating" flips the polarity of every odd basis so
    that neighbouring points carry opposite bits.
    """

    m_bases: int
    mapping: str = "alternating"

    def __post_init__(self):
        if not _is_power_of_two(self.m_bases):
            raise ValueError(f"M must be a power of two, got {self.m_bases}")
        if self.mapping not in MAPPINGS:
            raise ValueError(f"unknown mapping {self.mapping!r}")

    @property
    def num_points(self) -> int:
        return 2 * self.m_bases

    @property
    def alternating(self) -> bool:
        return self.mapping == "alternating"

    def point_phase(self, j: int) -> float:
        if not 0 <= j < self.num_points:
            raise ValueError(f"point index {j} out of range")
        return math.pi * j / self.m_bases

    def point_bit(self, j: int) -> int:
        """Logical bit carried by point j (basis is implied by j mod M)."""
        if not 0 <= j < self.num_points:
            raise ValueError(f"point index {j} out of range")
        half = j // self.m_bases
        if self.alternating:
            return half ^ ((j % self.m_bases) & 1)
        return half


def encode(bit: int, basis: int, c: Constellation) -> int:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    if not 0 <= basis < c.m_bases:
        raise ValueError(f"basis {basis} out of range for M={c.m_bases}")
    if c.alternating:
        return basis + (bit ^ (basis & 1)) * c.m_bases
    return basis + bit * c.m_bases


def decode(j: int, basis: int, c: Constellation) -> int:
    """Keyed inverse of encode; rejects points outside the basis pair (desync)."""
    if not 0 <= basis < c.m_bases:
        raise ValueError(f"basis {basis} out of range for M={c.m_bases}")
    if j not in (basis, basis + c.m_bases):
        raise ValueError(f"point {j} is not in the keyed pair ({basis}, {basis + c.m_bases})")
    return decode_lenient(j, basis, c)


def decode_lenient(j, basis, c: Constellation):
    """Half-plane decode of any point against the keyed basis axis.

    Agrees with decode() on in-pair points; for arbitrary points (e.g. a
    wrong-key decrypt) it returns the bit of the nearer antipodal point.
    Accepts scalars or equal-length integer arrays.
    """
    raw = (np.asarray(j) - np.asarray(basis)) % (2 * c.m_bases) // c.m_bases
    if c.alternating:
        raw = raw ^ (np.asarray(basis) & 1)
    if np.ndim(raw) == 0:
        return int(raw)
    return raw


def dsr_offset(rng: np.random.Generator, d: int, j: int, m_bases: int) -> int:
    """Deliberate state-randomization: dither j by a uniform offset in [-d, d].

    d must stay below M/2 so the dithered point remains inside the keyed
    half-plane and Bob's decision is unaffected.
    """
    if not 0 <= d < m_bases / 2:
        raise ValueError(f"dsr offset d={d} must satisfy 0 <= d < M/2 = {m_bases / 2}")
    if d == 0:
        return j
    return int((j + rng.integers(-d, d + 1)) % (2 * m_bases))


def _lfsr_fill(state, tap_shifts, top, out):
    # Fibonacci stepping: emit the LSB, feed the tap parity back at the top.
    one = np.uint64(1)
    for i in range(out.size):
        out[i] = np.uint8(state & one)
        fb = np.uint64(0)
        for s in tap_shifts:
            fb ^= (state >> s) & one
        state = (state >> one) | (fb << top)
    return state


def _lfsr_fill_py(state, tap_shifts, top, out):
    for i in range(out.size):
        out[i] = state & 1
        fb = 0
        for s in tap_shifts:
            fb ^= (state >> s) & 1
        state = (state >> 1) | (fb << top)
    return state


if njit is not None:
    _lfsr_fill_fast = njit(cache=True)(_lfsr_fill)
else:  # pragma: no cover
    _lfsr_fill_fast = None


class KeystreamGen:
    """Fibonacci LFSR producing the running key from the seed key.

    Stateful and single-owner: do not share one generator across threads.
    """

    def __init__(self, register: int, taps: tuple[int, ...] = DEFAULT_TAPS,
                 degree: int = DEFAULT_DEGREE):
        if degree < 1:
            raise ValueError("degree must be >= 1")
        taps = tuple(sorted(set(int(t) for t in taps), reverse=True))
        if not taps or taps[0] != degree or taps[-1] < 1:
            raise ValueError("taps must be distinct positions in 1..degree including degree")
        register &= (1 << degree) - 1
        if register == 0:
            raise ValueError("LFSR register must not be all-zero")
        self._state = register
        self.taps = taps
        self.degree = degree
        self._tap_shifts = np.array([t - 1 for t in taps], dtype=np.uint64)

    @classmethod
    def from_hex(cls, seed_key: str, taps: tuple[int, ...] = DEFAULT_TAPS,
                 degree: int = DEFAULT_DEGREE) -> "KeystreamGen":
        """Big-endian hexadecimal fill of the register."""
        try:
            value = int(seed_key, 16)
        except ValueError:
            raise ValueError(f"seed key {seed_key!r} is not valid hexadecimal") from None
        return cls(value, taps, degree)

    @property
    def register(self) -> int:
        return self._state

    def bits(self, n: int) -> np.ndarray:
        """Next n keystream bits as a uint8 array; advances the state."""
        if n < 0:
            raise ValueError("bit count must be >= 0")
        out = np.empty(n, dtype=np.uint8)
        if n == 0:
            return out
        if _lfsr_fill_fast is not None and self.degree <= 64:
            state = _lfsr_fill_fast(np.uint64(self._state), self._tap_shifts,
                                    np.uint64(self.degree - 1), out)
            self._state = int(state)
        else:
            shifts = [t - 1 for t in self.taps]
            self._state = _lfsr_fill_py(self._state, shifts, self.degree - 1, out)
        return out

    def next_basis(self, m_bases: int) -> int:
        """Consume log2(M) bits and read them big-endian as the basis index."""
        if not _is_power_of_two(m_bases):
            raise ValueError(f"M must be a power of two, got {m_bases}")
        k = m_bases.bit_length() - 1
        if k == 0:
            return 0
        bits = self.bits(k)
        basis = 0
        for b in bits:
            basis = (basis << 1) | int(b)
        return basis

    def bases(self, m_bases: int, count: int) -> np.ndarray:
        """Vectorized next_basis: count basis indices, consuming count*log2(M) bits."""
        if not _is_power_of_two(m_bases):
            raise ValueError(f"M must be a power of two, got {m_bases}")
        k = m_bases.bit_length() - 1
        if k == 0:
            return np.zeros(count, dtype=np.int64)
        bits = self.bits(count * k).reshape(count, k).astype(np.int64)
        weights = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)
        return bits @ weights
