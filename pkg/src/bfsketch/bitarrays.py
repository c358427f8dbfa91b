"""Bit and saturating-counter arrays, plus little-endian bit packing helpers."""

from __future__ import annotations

import numpy as np

from .errors import FormatError, ParameterError


def pack_uint(values, width: int, word_align: bool = True) -> bytes:
    """Pack unsigned integers of ``width`` bits, LSB first, little-endian bit order.

    Element ``i`` occupies stream bits ``[i*width, (i+1)*width)``; stream bit
    ``t`` is bit ``t % 8`` of byte ``t // 8``.  With ``word_align`` the output is
    zero-padded to a multiple of 8 bytes.
    """
    vals = np.asarray(values, dtype=np.uint64).ravel()
    if width < 1 or width > 64:
        raise ParameterError(f"width must be in [1, 64], got {width}")
    if vals.size and width < 64 and int(vals.max()) >> width:
        raise ParameterError(f"value does not fit in {width} bits")
    shifts = np.arange(width, dtype=np.uint64)
    bits = ((vals[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8).ravel()
    out = np.packbits(bits, bitorder="little").tobytes()
    if word_align and len(out) % 8:
        out += bytes(8 - len(out) % 8)
    return out


def unpack_uint(data: bytes, count: int, width: int) -> np.ndarray:
    need = (count * width + 7) // 8
    if len(data) < need:
        raise FormatError(f"need {need} bytes for {count} x {width}-bit values, have {len(data)}", len(data))
    bits = np.unpackbits(np.frombuffer(data[:need], dtype=np.uint8), bitorder="little")
    bits = bits[: count * width].reshape(count, width).astype(np.uint64)
    weights = np.uint64(1) << np.arange(width, dtype=np.uint64)
    return (bits * weights[None, :]).sum(axis=1, dtype=np.uint64)


def packed_size(count: int, width: int, word_align: bool = True) -> int:
    nbytes = (count * width + 7) // 8
    if word_align:
        nbytes = (nbytes + 7) // 8 * 8
    return nbytes


class BitVector:
    """Fixed-length bit array backed by a ``uint8`` numpy array (one byte per bit).

    The unpacked layout keeps scalar access and vectorized gathers cheap; the
    packed form is produced only for serialization.
    """

    __slots__ = ("bits",)

    def __init__(self, size: int, bits: np.ndarray | None = None):
        if bits is not None:
            self.bits = np.asarray(bits, dtype=np.uint8).copy()
            if self.bits.shape != (size,):
                raise ParameterError("bit array shape does not match size")
        else:
            if size < 1:
                raise ParameterError(f"bit vector size must be >= 1, got {size}")
            self.bits = np.zeros(size, dtype=np.uint8)

    def __len__(self):
        return self.bits.shape[0]

    def __getitem__(self, i):
        return bool(self.bits[i])

    def __eq__(self, other):
        return isinstance(other, BitVector) and np.array_equal(self.bits, other.bits)

    def __repr__(self):
        if len(self) <= 64:
            return "<BitVector " + "".join(str(b) for b in self.bits) + ">"
        return f"<BitVector {self.popcount()}/{len(self)}>"

    def set(self, i):
        self.bits[i] = 1

    def clear(self, i):
        self.bits[i] = 0

    def all_set(self, indices) -> bool:
        bits = self.bits
        return all(bits[i] for i in indices)

    def popcount(self) -> int:
        return int(np.count_nonzero(self.bits))

    def rank(self, i: int) -> int:
        """Number of set bits strictly before position ``i``."""
        return int(np.count_nonzero(self.bits[:i]))

    def set_positions(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def copy(self) -> "BitVector":
        return BitVector(len(self), self.bits)

    def __and__(self, other: "BitVector") -> "BitVector":
        self._check(other)
        return BitVector(len(self), self.bits & other.bits)

    def __or__(self, other: "BitVector") -> "BitVector":
        self._check(other)
        return BitVector(len(self), self.bits | other.bits)

    def _check(self, other):
        if len(self) != len(other):
            raise ParameterError("cannot combine bit vectors of different sizes")

    def to_bytes(self) -> bytes:
        return pack_uint(self.bits, 1)

    @classmethod
    def from_bytes(cls, data: bytes, size: int) -> "BitVector":
        return cls(size, unpack_uint(data, size, 1).astype(np.uint8))


def _dtype_for(width: int):
    if width <= 8:
        return np.uint8
    if width <= 16:
        return np.uint16
    if width <= 32:
        return np.uint32
    return np.uint64


class CounterVector:
    """Array of ``width``-bit saturating counters.

    A counter that reaches ``2**width - 1`` is sticky: it is never incremented
    past the cap and never decremented again, so an overflow can only cause
    false positives, not false negatives.
    """

    __slots__ = ("counts", "width", "max_value", "saturation_events")

    def __init__(self, size: int, width: int = 4, counts: np.ndarray | None = None):
        if not 1 <= width <= 63:
            raise ParameterError(f"counter width must be in [1, 63], got {width}")
        if size < 1:
            raise ParameterError(f"counter vector size must be >= 1, got {size}")
        self.width = width
        self.max_value = (1 << width) - 1
        dtype = _dtype_for(width)
        if counts is None:
            self.counts = np.zeros(size, dtype=dtype)
        else:
            self.counts = np.asarray(counts, dtype=dtype).copy()
            if self.counts.shape != (size,):
                raise ParameterError("counter array shape does not match size")
        self.saturation_events = 0

    def __len__(self):
        return self.counts.shape[0]

    def __getitem__(self, i):
        return int(self.counts[i])

    def __eq__(self, other):
        return (isinstance(other, CounterVector) and self.width == other.width
                and np.array_equal(self.counts, other.counts))

    def increment(self, i: int, by: int = 1) -> bool:
        """Add ``by`` to counter ``i``; returns False when the counter saturated."""
        value = int(self.counts[i])
        if value + by > self.max_value:
            if value != self.max_value:
                self.counts[i] = self.max_value
            self.saturation_events += 1
            return False
        self.counts[i] = value + by
        return True

    def decrement(self, i: int) -> bool:
        """Subtract one; saturated and zero counters are left untouched (returns False)."""
        value = int(self.counts[i])
        if value == 0 or value == self.max_value:
            return False
        self.counts[i] = value - 1
        return True

    def saturated(self) -> int:
        return int(np.count_nonzero(self.counts == self.max_value))

    def copy(self) -> "CounterVector":
        out = CounterVector(len(self), self.width, self.counts)
        out.saturation_events = self.saturation_events
        return out

    def to_bytes(self) -> bytes:
        return pack_uint(self.counts, self.width)

    @classmethod
    def from_bytes(cls, data: bytes, size: int, width: int) -> "CounterVector":
        return cls(size, width, unpack_uint(data, size, width))
