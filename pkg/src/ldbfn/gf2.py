"""GF(2) signal layer of the symmetric linear deterministic butterfly network.

Every signal is a binary column vector of length ``q``, indexed 1..q from the
top (most significant level) down.  A link of strength ``n`` delivers the top
``n`` levels of the transmitted vector onto the bottom ``n`` levels of the
receiver; everything below level ``n`` of the transmitter falls under the
receiver's noise floor.  Addition of colliding signals is componentwise XOR.

The five-node topology: two sources (nodes 1, 2), one full-duplex relay
(node 0) and two destinations (nodes 3, 4).  There are no direct
source-destination links; source j reaches the *other* pair's destination
over a cross link of strength ``nc``, both sources reach the relay over
links of strength ``ns``, the relay reaches both destinations at strength
``nr`` and broadcasts an out-of-band feedback vector to both sources at
strength ``nf``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


class LayoutError(ValueError):
    """A signal layout or a pack/unpack request is inconsistent."""


@dataclass(frozen=True)
class BitVector:
    """Length-q column vector over GF(2); bits[0] is the top level."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("BitVector entries must be 0 or 1")

    @classmethod
    def zero(cls, q: int) -> "BitVector":
        return cls((0,) * q)

    @classmethod
    def from_string(cls, s: str) -> "BitVector":
        return cls(tuple(int(c) for c in s))

    def to_string(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __xor__(self, other: "BitVector") -> "BitVector":
        if len(other) != len(self):
            raise ValueError("length mismatch in XOR")
        return BitVector(tuple(a ^ b for a, b in zip(self.bits, other.bits)))

    def is_zero(self) -> bool:
        return not any(self.bits)


@dataclass(frozen=True)
class ChannelParams:
    """Level counts (nc, ns, nr, nf) of the symmetric network.

    nc: source -> other destination (cross link)
    ns: source -> relay
    nr: relay -> destination (in-band)
    nf: relay -> both sources (out-of-band feedback broadcast)

    The common vector length is q = max(nc, ns, nr, nf, 1); the floor of 1
    keeps the all-zero network representable with non-empty vectors.
    """

    nc: int
    ns: int
    nr: int
    nf: int = 0

    def __post_init__(self) -> None:
        for name in ("nc", "ns", "nr", "nf"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def q(self) -> int:
        return max(self.nc, self.ns, self.nr, self.nf, 1)

    def with_nf(self, nf: int) -> "ChannelParams":
        return ChannelParams(self.nc, self.ns, self.nr, nf)


@dataclass(frozen=True)
class NetworkInputs:
    """One channel use worth of transmitted vectors."""

    x1: BitVector
    x2: BitVector
    xr: BitVector  # relay, in-band
    xf: BitVector  # relay, out-of-band feedback


@dataclass(frozen=True)
class NetworkOutputs:
    """One channel use worth of received vectors."""

    y0: BitVector  # relay
    y1: BitVector  # source 1 (feedback)
    y2: BitVector  # source 2 (feedback)
    y3: BitVector  # destination 1
    y4: BitVector  # destination 2


def shift_receive(x: BitVector, n: int) -> BitVector:
    """Receive ``x`` through a link of strength ``n``.

    The top n bits of x land on the bottom n positions of the output and
    every other output position is 0 (the down-shift by q-n of the q x q
    shift matrix).  n = q is the identity, n = 0 annihilates.
    """
    q = len(x)
    if not 0 <= n <= q:
        raise ValueError(f"link strength {n} outside [0, {q}]")
    return BitVector((0,) * (q - n) + x.bits[:n])


def superpose(xs: Sequence[BitVector]) -> BitVector:
    """Componentwise XOR of one or more equal-length vectors."""
    if not xs:
        raise ValueError("superpose needs at least one vector")
    out = xs[0]
    for x in xs[1:]:
        out = out ^ x
    return out


def channel_step(inputs: NetworkInputs, params: ChannelParams) -> NetworkOutputs:
    """One noiseless use of the network.

    y0 = S^(q-ns) (x1 + x2)
    y1 = y2 = S^(q-nf) xf
    y3 = S^(q-nc) x2 + S^(q-nr) xr
    y4 = S^(q-nc) x1 + S^(q-nr) xr
    """
    q = params.q
    for name in ("x1", "x2", "xr", "xf"):
        if len(getattr(inputs, name)) != q:
            raise ValueError(f"{name} must have length q={q}")
    y0 = shift_receive(inputs.x1 ^ inputs.x2, params.ns)
    yf = shift_receive(inputs.xf, params.nf)
    relay_part = shift_receive(inputs.xr, params.nr)
    y3 = shift_receive(inputs.x2, params.nc) ^ relay_part
    y4 = shift_receive(inputs.x1, params.nc) ^ relay_part
    return NetworkOutputs(y0=y0, y1=yf, y2=yf, y3=y3, y4=y4)


@dataclass(frozen=True)
class Slot:
    """A named contiguous block of levels inside a length-q vector."""

    name: str
    start: int  # 0-based offset from the top level
    length: int

    @property
    def stop(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class SignalLayout:
    """Declarative stacking of named blocks inside a length-q vector.

    Positions not covered by any slot are zero padding.  Two slots may
    occupy intersecting level ranges only if the pair is declared in
    ``overlaps``; the packed content of shared levels is then the XOR of
    the two fragments.
    """

    q: int
    slots: tuple[Slot, ...]
    overlaps: frozenset[frozenset[str]] = frozenset()

    def __post_init__(self) -> None:
        names = [s.name for s in self.slots]
        if len(names) != len(set(names)):
            raise LayoutError(f"duplicate slot names in layout: {names}")
        for s in self.slots:
            if s.length < 0 or s.start < 0 or s.stop > self.q:
                raise LayoutError(f"slot {s.name} [{s.start},{s.stop}) outside [0,{self.q})")
        for i, a in enumerate(self.slots):
            for b in self.slots[i + 1:]:
                if a.start < b.stop and b.start < a.stop:
                    if frozenset((a.name, b.name)) not in self.overlaps:
                        raise LayoutError(
                            f"slots {a.name} and {b.name} intersect without a declared XOR overlap"
                        )

    @classmethod
    def from_blocks(cls, q: int, blocks: Iterable[tuple[str | None, int]]) -> "SignalLayout":
        """Build a layout from top-to-bottom (name, length) pairs.

        ``None`` names declare zero padding.  The lengths must sum to q
        exactly.
        """
        slots = []
        pos = 0
        for name, length in blocks:
            if length < 0:
                raise LayoutError(f"negative block length for {name}")
            if name is not None:
                slots.append(Slot(name, pos, length))
            pos += length
        if pos != q:
            raise LayoutError(f"block lengths sum to {pos}, expected q={q}")
        return cls(q=q, slots=tuple(slots))

    def slot(self, name: str) -> Slot:
        for s in self.slots:
            if s.name == name:
                return s
        raise LayoutError(f"no slot named {name}")

    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.slots)

    def occupied_extent(self) -> int:
        """Lowest level index touched by any slot (0 for an empty layout)."""
        return max((s.stop for s in self.slots if s.length > 0), default=0)


def pack(layout: SignalLayout, segments: Mapping[str, tuple[int, ...]]) -> BitVector:
    """Assemble a length-q vector by XOR-placing every named segment."""
    unknown = set(segments) - set(layout.names())
    if unknown:
        raise LayoutError(f"segments not in layout: {sorted(unknown)}")
    missing = set(layout.names()) - set(segments)
    if missing:
        raise LayoutError(f"missing segments: {sorted(missing)}")
    bits = [0] * layout.q
    for s in layout.slots:
        frag = segments[s.name]
        if len(frag) != s.length:
            raise LayoutError(f"segment {s.name} has length {len(frag)}, slot wants {s.length}")
        for k, b in enumerate(frag):
            bits[s.start + k] ^= b & 1
    return BitVector(tuple(bits))


def unpack(layout: SignalLayout, v: BitVector) -> dict[str, tuple[int, ...]]:
    """Read every named slot back out of ``v``.

    Exact inverse of :func:`pack` for slots that intersect nothing; a slot
    inside a declared XOR overlap reads back the mixed (XORed) levels,
    which is precisely what a receiver observes.
    """
    if len(v) != layout.q:
        raise LayoutError(f"vector length {len(v)} != layout q {layout.q}")
    return {s.name: v.bits[s.start:s.stop] for s in layout.slots}
