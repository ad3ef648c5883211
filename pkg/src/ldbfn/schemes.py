"""Capacity-achieving coding schemes for the four parameter regimes.

Each scheme composes four basic strategies:

* decode-forward (DF): both sources send zero-padded D-signals the relay can
  separate from their XOR and re-broadcast; destinations decode backward and
  strip the already-known interfering D-signal.
* compute-forward (CF): the relay decodes only the XOR of the two C-signals
  and forwards it one use later; each destination overhears the interfering
  C-signal on the cross link and XORs the two observations.
* cooperative neutralization (CN): sources hand the relay next use's
  N-signals below the destinations' noise floor; the relay transmits their
  XOR on exactly the levels where the interfering N-signal lands, so each
  destination receives its own N-signal clean.
* feedback (F): sources push F-signals up to the relay, the relay XORs and
  broadcasts them on the out-of-band feedback channel, each source strips
  its own contribution and forwards the partner's F-signal over the cross
  link two uses later.  The asymmetric variant serves one direction only
  and reuses the very level the owner transmits on.

A :class:`Scheme` is pure data: per-signal layouts with stream bindings for
the encoders, and ordered decode plans (subtract known, read levels,
combine) for the relay, the sources' feedback processing and the two
backward-decoding destinations.  Block index conventions: streams carry
blocks 1..N; a binding or step with offset k touches block t+k at use t;
the CN present slot carries block t-1 so the first use doubles as the
initialization step (relay silent, future signal only) and block N drains
at use N+1.

Allocation tie-breaking is the lexicographically smallest feasible integer
assignment in the documented per-regime variable order: D-components first,
so they are only used when a corner is not reachable without them, and
within split components the half that costs two destination levels first,
so allocation lands in the cheaper half.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .fm import IneqSystem, LinearIneq
from .gf2 import ChannelParams, SignalLayout, Slot
from .regions import RatePoint, Regime, applicable_regimes, achievable_region, regime_of


class SchemeError(RuntimeError):
    """A scheme was built or executed inconsistently (always a bug)."""


class InfeasibleTargetError(ValueError):
    """The requested rate pair lies outside the achievable region."""

    def __init__(self, message: str, violated=None):
        super().__init__(message)
        self.violated = violated


# Lexicographic minimization order per regime (leftmost minimized first):
# D-signals go first so they are spent only on asymmetric corners, feedback
# components before the in-band C-signal so feedback is spent sparingly,
# and the double-charged half of each split component before the single-
# charged one (regime A's low C-part; regime D's above-noise-floor halves),
# so allocation prefers the cheap half.
ALLOC_ORDER: dict[Regime, tuple[str, ...]] = {
    Regime.A: ("R1d", "R2d", "Rc2", "Rc1"),
    Regime.B: ("R1d", "R2d", "Rbar1d", "Rbar2d", "Rc", "Rn"),
    Regime.C: ("R1d", "R2d", "R1f", "R2f", "Rbarf", "Rc"),
    Regime.D: ("R1d", "R2d", "R1f", "R2f", "Rbarf1", "Rbarf2", "Rn1", "Rn2"),
}


def _require_regime(regime: Regime, p: ChannelParams) -> None:
    if regime not in applicable_regimes(p):
        raise ValueError(f"params {p} are not in regime {regime.value}")


def constraint_system(regime: Regime, p: ChannelParams) -> IneqSystem:
    """The regime's component-rate inequality system with parameters filled in."""
    _require_regime(regime, p)
    I = LinearIneq.of
    if regime is Regime.A:
        return IneqSystem(
            ("Rc1", "Rc2", "R1d", "R2d"),
            (
                I({"Rc1": 1, "Rc2": 1, "R1d": 1, "R2d": 1}, p.ns),
                I({"Rc1": 1, "Rc2": 2, "R1d": 1, "R2d": 1}, p.nc),
                I({"Rc1": 1}, p.nr - p.nc),
            ),
        )
    if regime is Regime.B:
        return IneqSystem(
            ("Rc", "R1d", "R2d", "Rbar1d", "Rbar2d", "Rn"),
            (
                I({"Rc": 1, "R1d": 1, "R2d": 1, "Rn": 1}, p.nc),
                I({"Rbar1d": 1, "Rbar2d": 1}, p.ns - p.nc),
                I({"Rn": 1}, p.ns - p.nc),
                I({"Rbar1d": 1, "Rbar2d": 1, "Rc": 2, "R1d": 1, "R2d": 1, "Rn": 1}, p.nr),
            ),
        )
    if regime is Regime.C:
        # The destination constraint charges each D-rate once, not twice: the
        # D-slot may share levels with the two-use-old symmetric-F delivery
        # and with the relay's forwarding block, because backward decoding
        # knows the interfering D-signal one use ahead and strips it.  With
        # a disjoint placement (2*R1d + 2*R2d) the asymmetric corners of the
        # capacity region would be unreachable for some parameter tuples.
        return IneqSystem(
            ("Rc", "R1d", "R2d", "R1f", "R2f", "Rbarf"),
            (
                I({"Rc": 1, "R1d": 1, "R2d": 1, "R1f": 1, "R2f": 1, "Rbarf": 1}, p.ns),
                I({"Rc": 1, "R1d": 1, "R2d": 1}, p.nr),
                I({"R1f": 1, "Rbarf": 1}, p.nf),
                I({"R2f": 1, "Rbarf": 1}, p.nf),
                I({"Rc": 2, "R1d": 1, "R2d": 1, "R1f": 1, "R2f": 1, "Rbarf": 2}, p.nc),
            ),
        )
    return IneqSystem(
        ("R1f", "R2f", "Rbarf1", "Rbarf2", "R1d", "R2d", "Rn1", "Rn2"),
        (
            I(
                {"R1f": 1, "R2f": 1, "Rbarf1": 2, "Rbarf2": 1, "R1d": 1, "R2d": 1, "Rn1": 2, "Rn2": 1},
                p.nc,
            ),
            I({"Rbarf2": 1, "Rn2": 1}, p.ns - p.nc),
            I({"R1d": 1, "R2d": 1, "Rn1": 1, "Rn2": 1}, p.nr),
            I({"R1f": 1, "Rbarf1": 1, "Rbarf2": 1}, p.nf),
            I({"R2f": 1, "Rbarf1": 1, "Rbarf2": 1}, p.nf),
        ),
    )


def rate_definitions(regime: Regime) -> tuple[dict[str, int], dict[str, int]]:
    """Linear maps from component rates to (R1, R2)."""
    if regime is Regime.A:
        return (
            {"Rc1": 1, "Rc2": 1, "R1d": 1},
            {"Rc1": 1, "Rc2": 1, "R2d": 1},
        )
    if regime is Regime.B:
        return (
            {"R1d": 1, "Rbar1d": 1, "Rc": 1, "Rn": 1},
            {"R2d": 1, "Rbar2d": 1, "Rc": 1, "Rn": 1},
        )
    if regime is Regime.C:
        return (
            {"Rc": 1, "R1d": 1, "R1f": 1, "Rbarf": 1},
            {"Rc": 1, "R2d": 1, "R2f": 1, "Rbarf": 1},
        )
    return (
        {"R1f": 1, "Rbarf1": 1, "Rbarf2": 1, "R1d": 1, "Rn1": 1, "Rn2": 1},
        {"R2f": 1, "Rbarf1": 1, "Rbarf2": 1, "R2d": 1, "Rn1": 1, "Rn2": 1},
    )


@dataclass(frozen=True)
class RateAllocation:
    """Feasible integer assignment of the regime's component rates."""

    regime: Regime
    values: tuple[tuple[str, int], ...]

    @classmethod
    def of(cls, regime: Regime, values: Mapping[str, int]) -> "RateAllocation":
        return cls(regime, tuple(sorted(values.items())))

    def as_dict(self) -> dict[str, int]:
        return dict(self.values)

    def get(self, var: str) -> int:
        return self.as_dict().get(var, 0)

    def rate_pair(self) -> tuple[int, int]:
        r1d, r2d = rate_definitions(self.regime)
        d = self.as_dict()
        return (
            sum(c * d.get(v, 0) for v, c in r1d.items()),
            sum(c * d.get(v, 0) for v, c in r2d.items()),
        )

    def uses_feedback(self) -> bool:
        d = self.as_dict()
        return any(d.get(v, 0) for v in ("R1f", "R2f", "Rbarf", "Rbarf1", "Rbarf2"))


def allocate(p: ChannelParams, target: tuple[int, int]) -> RateAllocation:
    """Lexicographically smallest feasible integer allocation hitting ``target``.

    The target must be an integer point of the achievable region; corner
    points always admit an allocation.
    """
    t1, t2 = target
    if t1 != int(t1) or t2 != int(t2):
        raise InfeasibleTargetError(f"target {target} is not an integer point")
    t1, t2 = int(t1), int(t2)
    region = achievable_region(p)
    if t1 < 0 or t2 < 0 or not region.contains((t1, t2)):
        pt = RatePoint(Fraction(t1), Fraction(t2))
        violated = next((h for h in region.halfspaces if not h.holds(pt)), None)
        detail = (
            f" (violates {int(violated.a1)}*R1 + {int(violated.a2)}*R2 <= {int(violated.b)})"
            if violated is not None
            else ""
        )
        raise InfeasibleTargetError(
            f"target ({t1}, {t2}) is outside the achievable region for {p}{detail}",
            violated=violated,
        )

    regime = regime_of(p)
    system = constraint_system(regime, p)
    r1_def, r2_def = rate_definitions(regime)
    order = ALLOC_ORDER[regime]
    rows = [(q.coeffs, int(q.bound)) for q in system.ineqs]

    caps = {}
    for v in order:
        cap = max(t1, t2)
        for coeffs, b in rows:
            c = coeffs.get(v, 0)
            if c > 0:
                cap = min(cap, b // c if b >= 0 else -1)
        caps[v] = cap

    def walk(i: int, assign: dict[str, int], slacks: list[int], r1: int, r2: int):
        if i == len(order):
            if r1 == t1 and r2 == t2:
                return dict(assign)
            return None
        v = order[i]
        rest = order[i + 1:]
        max_r1_rest = sum(r1_def.get(u, 0) * caps[u] for u in rest)
        max_r2_rest = sum(r2_def.get(u, 0) * caps[u] for u in rest)
        for val in range(caps[v] + 1):
            nr1 = r1 + r1_def.get(v, 0) * val
            nr2 = r2 + r2_def.get(v, 0) * val
            if nr1 > t1 or nr2 > t2:
                break
            new = [s - val * rows[k][0].get(v, 0) for k, s in enumerate(slacks)]
            if any(s < 0 for s in new):
                break
            if nr1 + max_r1_rest < t1 or nr2 + max_r2_rest < t2:
                continue
            assign[v] = val
            found = walk(i + 1, assign, new, nr1, nr2)
            if found is not None:
                return found
            del assign[v]
        return None

    found = walk(0, {}, [b for _, b in rows], 0, 0)
    if found is None:
        raise SchemeError(f"no integer allocation reaches {target} for {p} (regime {regime.value})")
    values = {v: found.get(v, 0) for v in system.vars}
    return RateAllocation.of(regime, values)


# ---------------------------------------------------------------------------
# Scheme data model


@dataclass(frozen=True)
class Binding:
    """Transmit slot content: block ``t + offset`` of ``stream`` at use t.

    ``take`` selects a sub-range of the stream block, starting at that bit,
    of the slot's length.  Multiple bindings of one slot XOR together.
    """

    slot: str
    stream: str
    offset: int
    take: int = 0


@dataclass(frozen=True)
class TransmitPlan:
    layout: SignalLayout
    bindings: tuple[Binding, ...]


@dataclass(frozen=True)
class Subtract:
    """XOR the known block's first ``length`` bits out of the received vector."""

    stream: str
    offset: int
    pos: int
    length: int

    kind = "subtract"


@dataclass(frozen=True)
class Read:
    """Copy received levels [pos, pos+length) into the block's bits [at, ...)."""

    stream: str
    offset: int
    pos: int
    length: int
    at: int = 0

    kind = "read"


@dataclass(frozen=True)
class Combine:
    """Store target = a XOR b (top-aligned, truncated to target length)."""

    target: str
    a: str
    b: str
    offset: int

    kind = "combine"


DecodeStep = Subtract | Read | Combine


@dataclass(frozen=True)
class Scheme:
    """A complete executable description of one capacity-achieving code."""

    params: ChannelParams
    regime: Regime
    alloc: RateAllocation
    stream_lengths: Mapping[str, int]
    sums: Mapping[str, tuple[str, ...]]
    transmit: Mapping[str, TransmitPlan]
    decode_plans: Mapping[int, tuple[DecodeStep, ...]]
    delivered: Mapping[int, tuple[str, ...]]
    rates: tuple[int, int]
    delta: int

    @property
    def feedback_levels(self) -> int:
        """Feedback levels occupied per use (the r_f of net-gain accounting)."""
        return self.transmit["xf"].layout.occupied_extent()

    def n_uses(self, n_blocks: int) -> int:
        return n_blocks + self.delta

    def message_streams(self) -> tuple[str, ...]:
        return tuple(s for s in self.stream_lengths if s not in self.sums)

    @staticmethod
    def owner(stream: str) -> int:
        return int(stream[-1])

    def source_active(self, n_blocks: int) -> tuple[int, int]:
        look = [0]
        for key in ("x1", "x2"):
            look += [-b.offset for b in self.transmit[key].bindings]
        return (1, n_blocks + max(look))

    def relay_active(self, n_blocks: int) -> tuple[int, int]:
        return (2, n_blocks + 1)

    def memory_spans(self) -> dict[str, int]:
        """Per-stream lookback (in uses) any encoder needs to keep."""
        spans: dict[str, int] = {}
        for plan in self.transmit.values():
            for b in plan.bindings:
                spans[b.stream] = max(spans.get(b.stream, 0), -b.offset)
        return spans

    def to_jsonable(self) -> dict:
        def step_json(s: DecodeStep) -> dict:
            if isinstance(s, Combine):
                return {"op": s.kind, "target": s.target, "a": s.a, "b": s.b, "offset": s.offset}
            d = {"op": s.kind, "stream": s.stream, "offset": s.offset, "pos": s.pos, "length": s.length}
            if isinstance(s, Read) and s.at:
                d["at"] = s.at
            return d

        return {
            "params": {"nc": self.params.nc, "ns": self.params.ns, "nr": self.params.nr, "nf": self.params.nf, "q": self.params.q},
            "regime": self.regime.value,
            "allocation": dict(self.alloc.values),
            "rates": list(self.rates),
            "delta": self.delta,
            "feedback_levels": self.feedback_levels,
            "streams": dict(self.stream_lengths),
            "sums": {k: list(v) for k, v in self.sums.items()},
            "layouts": {
                key: {
                    "slots": [
                        {"name": s.name, "start": s.start, "length": s.length}
                        for s in plan.layout.slots
                    ],
                    "overlaps": sorted(sorted(pair) for pair in plan.layout.overlaps),
                    "bindings": [
                        {"slot": b.slot, "stream": b.stream, "offset": b.offset, "take": b.take}
                        for b in plan.bindings
                    ],
                }
                for key, plan in self.transmit.items()
            },
            "decode_plans": {str(node): [step_json(s) for s in steps] for node, steps in self.decode_plans.items()},
            "delivered": {str(node): list(streams) for node, streams in self.delivered.items()},
        }


class _Builder:
    """Accumulates slots, bindings and decode steps for one scheme."""

    def __init__(self, p: ChannelParams, regime: Regime, alloc: RateAllocation):
        self.p = p
        self.q = p.q
        self.regime = regime
        self.alloc = alloc
        self.streams: dict[str, int] = {}
        self.sums: dict[str, tuple[str, ...]] = {}
        self.slots: dict[str, list[Slot]] = {k: [] for k in ("x1", "x2", "xr", "xf")}
        self.bindings: dict[str, list[Binding]] = {k: [] for k in ("x1", "x2", "xr", "xf")}
        self.overlaps: dict[str, set[frozenset[str]]] = {k: set() for k in ("x1", "x2", "xr", "xf")}
        self.plans: dict[int, list[DecodeStep]] = {0: [], 1: [], 2: [], 3: [], 4: []}
        self.delivered: dict[int, tuple[str, ...]] = {3: (), 4: ()}

    def stream(self, name: str, length: int, parts: tuple[str, ...] | None = None) -> None:
        if length > 0:
            self.streams[name] = length
            if parts is not None:
                self.sums[name] = tuple(p for p in parts if p in self.streams)

    def tx(self, signal: str, name: str, start: int, length: int,
           stream: str, offset: int, take: int = 0) -> None:
        if length <= 0:
            return
        self.slots[signal].append(Slot(name, start, length))
        self.bindings[signal].append(Binding(name, stream, offset, take))

    def tx_xor(self, signal: str, name: str, start: int, length: int,
               parts: tuple[tuple[str, int], ...]) -> None:
        """One slot fed by the XOR of several (stream, offset) bindings."""
        if length <= 0:
            return
        self.slots[signal].append(Slot(name, start, length))
        for stream, offset in parts:
            if self.streams.get(stream, 0) > 0:
                self.bindings[signal].append(Binding(name, stream, offset))

    def declare_overlap(self, signal: str, a: str, b: str) -> None:
        names = {s.name for s in self.slots[signal]}
        if a in names and b in names:
            self.overlaps[signal].add(frozenset((a, b)))

    def _slot(self, signal: str, name: str) -> Slot | None:
        for s in self.slots[signal]:
            if s.name == name:
                return s
        return None

    def land(self, signal: str, name: str, gain: int) -> tuple[int, int]:
        """(receive position, visible length) of a transmitted slot."""
        s = self._slot(signal, name)
        if s is None:
            return (0, 0)
        vis = min(s.stop, gain) - s.start
        if vis <= 0:
            return (0, 0)
        return (self.q - gain + s.start, vis)

    def sub(self, node: int, signal: str, slot: str, gain: int, stream: str, offset: int) -> None:
        pos, vis = self.land(signal, slot, gain)
        if vis > 0:
            self.plans[node].append(Subtract(stream, offset, pos, vis))

    def read(self, node: int, signal: str, slot: str, gain: int,
             stream: str, offset: int, at: int = 0) -> None:
        s = self._slot(signal, slot)
        if s is None:
            return
        pos, vis = self.land(signal, slot, gain)
        if vis != s.length:
            raise SchemeError(
                f"slot {slot} only partially visible at node {node} (gain {gain}); "
                "a read would be ambiguous"
            )
        self.plans[node].append(Read(stream, offset, pos, s.length, at))

    def combine(self, node: int, target: str, a: str, b: str, offset: int) -> None:
        if self.streams.get(target, 0) > 0:
            self.plans[node].append(Combine(target, a, b, offset))

    def build(self, delivered: Mapping[int, tuple[str, ...]]) -> Scheme:
        transmit = {
            key: TransmitPlan(
                SignalLayout(self.q, tuple(self.slots[key]), frozenset(self.overlaps[key])),
                tuple(self.bindings[key]),
            )
            for key in ("x1", "x2", "xr", "xf")
        }
        # Structural sanity: the relay may only occupy its top nr / nf levels.
        if transmit["xr"].layout.occupied_extent() > self.p.nr:
            raise SchemeError("relay in-band layout exceeds nr levels")
        if transmit["xf"].layout.occupied_extent() > self.p.nf:
            raise SchemeError("feedback layout exceeds nf levels")
        look = [1] + [-b.offset for key in ("x1", "x2") for b in transmit[key].bindings]
        delta = max(look)
        filtered_delivered = {
            node: tuple(s for s in streams if self.streams.get(s, 0) > 0)
            for node, streams in delivered.items()
        }
        return Scheme(
            params=self.p,
            regime=self.regime,
            alloc=self.alloc,
            stream_lengths=dict(self.streams),
            sums=dict(self.sums),
            transmit=transmit,
            decode_plans={n: tuple(steps) for n, steps in self.plans.items()},
            delivered=filtered_delivered,
            rates=self.alloc.rate_pair(),
            delta=delta,
        )


def _build_regime_a(p: ChannelParams, a: RateAllocation) -> Scheme:
    """CF + DF for ns <= nc <= nr.

    Sources stack [C-signal, D-signal] at the top.  The relay re-broadcasts
    the C-sum split around the sources' footprint: one part lands above
    everything the sources can reach at the destinations, the rest below
    the D-levels, leaving the overheard C-signal clean in between.
    """
    v = a.as_dict()
    Rc1, Rc2, R1d, R2d = v["Rc1"], v["Rc2"], v["R1d"], v["R2d"]
    Rc = Rc1 + Rc2
    b = _Builder(p, Regime.A, a)
    b.stream("c1", Rc)
    b.stream("c2", Rc)
    b.stream("csum", Rc, ("c1", "c2"))
    b.stream("d1", R1d)
    b.stream("d2", R2d)

    b.tx("x1", "c1", 0, Rc, "c1", 0)
    b.tx("x1", "d1", Rc, R1d, "d1", 0)
    b.tx("x2", "c2", 0, Rc, "c2", 0)
    b.tx("x2", "d2", Rc + R1d, R2d, "d2", 0)

    base = p.nr - p.nc
    b.tx("xr", "csum_hi", base - Rc1, Rc1, "csum", -1, take=0)
    b.tx("xr", "d1_fwd", base + Rc, R1d, "d1", -1)
    b.tx("xr", "d2_fwd", base + Rc + R1d, R2d, "d2", -1)
    b.tx("xr", "csum_lo", base + Rc + R1d + R2d, Rc2, "csum", -1, take=Rc1)

    # Relay: every component is clean inside its top ns levels.
    b.read(0, "x1", "c1", p.ns, "csum", 0)
    b.read(0, "x1", "d1", p.ns, "d1", 0)
    b.read(0, "x2", "d2", p.ns, "d2", 0)

    for dest, cross, own, other in ((3, "x2", 1, 2), (4, "x1", 2, 1)):
        b.sub(dest, cross, f"d{other}", p.nc, f"d{other}", 0)
        b.read(dest, "xr", "csum_hi", p.nr, "csum", -1, at=0)
        b.read(dest, "xr", "csum_lo", p.nr, "csum", -1, at=Rc1)
        b.read(dest, cross, f"c{other}", p.nc, f"c{other}", 0)
        b.read(dest, "xr", "d1_fwd", p.nr, "d1", -1)
        b.read(dest, "xr", "d2_fwd", p.nr, "d2", -1)
        b.combine(dest, f"c{own}", "csum", f"c{other}", 0)

    return b.build({3: ("c1", "d1"), 4: ("c2", "d2")})


def _build_regime_b(p: ChannelParams, a: RateAllocation) -> Scheme:
    """CF + CN + DF for nc <= min(ns, nr).

    The ns - nc levels the relay hears below the destinations' noise floor
    carry the future N-signals and the extra D-signals; the latter may XOR
    into the present N-slot, which is harmless because backward decoding
    knows them one use ahead.
    """
    v = a.as_dict()
    Rc, R1d, R2d, Rb1, Rb2, Rn = (
        v["Rc"], v["R1d"], v["R2d"], v["Rbar1d"], v["Rbar2d"], v["Rn"],
    )
    Rb = Rb1 + Rb2
    b = _Builder(p, Regime.B, a)
    b.stream("c1", Rc)
    b.stream("c2", Rc)
    b.stream("csum", Rc, ("c1", "c2"))
    b.stream("d1", R1d)
    b.stream("d2", R2d)
    b.stream("du1", Rb1)
    b.stream("du2", Rb2)
    b.stream("n1", Rn)
    b.stream("n2", Rn)
    b.stream("nsum", Rn, ("n1", "n2"))

    c_start = p.nc - Rc - R1d - R2d - Rn
    for sig, j in (("x1", 1), ("x2", 2)):
        b.tx(sig, f"c{j}", c_start, Rc, f"c{j}", 0)
        b.tx(sig, f"d{j}", c_start + Rc + (0 if j == 1 else R1d), (R1d, R2d)[j - 1], f"d{j}", 0)
        b.tx(sig, f"n{j}_present", p.nc - Rn, Rn, f"n{j}", -1)
        b.tx(sig, f"du{j}", p.ns - Rn - (Rb if j == 1 else Rb2), (Rb1, Rb2)[j - 1], f"du{j}", 0)
        b.tx(sig, f"n{j}_future", p.ns - Rn, Rn, f"n{j}", 0)
        b.declare_overlap(sig, f"n{j}_present", f"du{j}")

    base = p.nr - Rb - 2 * Rc - R1d - R2d - Rn
    b.tx("xr", "du1_fwd", base, Rb1, "du1", -1)
    b.tx("xr", "du2_fwd", base + Rb1, Rb2, "du2", -1)
    b.tx("xr", "csum_fwd", base + Rb, Rc, "csum", -1)
    b.tx("xr", "d1_fwd", base + Rb + 2 * Rc, R1d, "d1", -1)
    b.tx("xr", "d2_fwd", base + Rb + 2 * Rc + R1d, R2d, "d2", -1)
    b.tx("xr", "nsum_fwd", p.nr - Rn, Rn, "nsum", -1)

    # Relay, forward in time: strip the present N-sum it forwarded itself,
    # then everything else sits clean.
    b.sub(0, "x1", "n1_present", p.ns, "nsum", -1)
    b.read(0, "x1", "c1", p.ns, "csum", 0)
    b.read(0, "x1", "d1", p.ns, "d1", 0)
    b.read(0, "x2", "d2", p.ns, "d2", 0)
    b.read(0, "x1", "du1", p.ns, "du1", 0)
    b.read(0, "x2", "du2", p.ns, "du2", 0)
    b.read(0, "x1", "n1_future", p.ns, "nsum", 0)

    for dest, cross, own, other in ((3, "x2", 1, 2), (4, "x1", 2, 1)):
        b.sub(dest, cross, f"d{other}", p.nc, f"d{other}", 0)
        b.sub(dest, cross, f"du{other}", p.nc, f"du{other}", 0)
        b.read(dest, "xr", "du1_fwd", p.nr, "du1", -1)
        b.read(dest, "xr", "du2_fwd", p.nr, "du2", -1)
        b.read(dest, "xr", "csum_fwd", p.nr, "csum", -1)
        b.read(dest, cross, f"c{other}", p.nc, f"c{other}", 0)
        b.read(dest, "xr", "d1_fwd", p.nr, "d1", -1)
        b.read(dest, "xr", "d2_fwd", p.nr, "d2", -1)
        b.read(dest, cross, f"n{other}_present", p.nc, f"n{own}", -1)
        b.combine(dest, f"c{own}", "csum", f"c{other}", 0)

    return b.build({3: ("c1", "d1", "du1", "n1"), 4: ("c2", "d2", "du2", "n2")})


def _build_regime_c(p: ChannelParams, a: RateAllocation) -> Scheme:
    """CF + DF + symmetric/asymmetric F for max(nr, ns) < nc.

    The cross link is strong enough that the sources deliver relayed
    F-signals on levels the relay cannot even reach; the relay's own
    forwarding sits at the bottom of the destinations' view.  The D-slot
    rides in an XOR window with the two-use-old symmetric-F delivery and
    may also collide with the relay's forwarding block at the destinations;
    both interferers are already known wherever they matter, so each D-rate
    costs a single destination level.
    """
    v = a.as_dict()
    Rc, R1d, R2d, R1f, R2f, Rbf = (
        v["Rc"], v["R1d"], v["R2d"], v["R1f"], v["R2f"], v["Rbarf"],
    )
    Rfmax = max(R1f, R2f)
    b = _Builder(p, Regime.C, a)
    b.stream("c1", Rc)
    b.stream("c2", Rc)
    b.stream("csum", Rc, ("c1", "c2"))
    b.stream("d1", R1d)
    b.stream("d2", R2d)
    b.stream("f1", R1f)
    b.stream("f2", R2f)
    b.stream("fsum", Rfmax, ("f1", "f2"))
    b.stream("bf1", Rbf)
    b.stream("bf2", Rbf)
    b.stream("bfsum", Rbf, ("bf1", "bf2"))

    # Window start for the overlapped [bf delivery (+) D-slot] block.
    w0 = Rc + R1f + R2f + Rbf
    for sig, j, k in (("x1", 1, 2), ("x2", 2, 1)):
        b.tx(sig, f"c{j}", 0, Rc, f"c{j}", 0)
        # Asymmetric F: own signal up to the relay, partner's two uses later
        # on the same per-stream level.
        b.tx(sig, "f1_slot", Rc, R1f, "f1", 0 if j == 1 else -2)
        b.tx(sig, "f2_slot", Rc + R1f, R2f, "f2", -2 if j == 1 else 0)
        b.tx(sig, f"bf{j}_own", Rc + R1f + R2f, Rbf, f"bf{j}", 0)
        b.tx(sig, f"bf{k}_fwd", w0, Rbf, f"bf{k}", -2)
        b.tx(sig, f"d{j}", w0 + (0 if j == 1 else R1d), (R1d, R2d)[j - 1], f"d{j}", 0)
        b.declare_overlap(sig, f"bf{k}_fwd", f"d{j}")

    b.tx("xr", "d1_fwd", p.nr - Rc - R1d - R2d, R1d, "d1", -1)
    b.tx("xr", "d2_fwd", p.nr - Rc - R2d, R2d, "d2", -1)
    b.tx("xr", "csum_fwd", p.nr - Rc, Rc, "csum", -1)
    b.tx_xor("xf", "fsum", 0, Rfmax, (("f1", -1), ("f2", -1)))
    b.tx("xf", "bfsum", Rfmax, Rbf, "bfsum", -1)

    # Relay: strip the two-use-old F-signals riding on the same levels.
    b.sub(0, "x2", "f1_slot", p.ns, "f1", -2)
    b.sub(0, "x1", "f2_slot", p.ns, "f2", -2)
    b.sub(0, "x1", "bf2_fwd", p.ns, "bfsum", -2)
    b.read(0, "x1", "c1", p.ns, "csum", 0)
    b.read(0, "x1", "f1_slot", p.ns, "f1", 0)
    b.read(0, "x2", "f2_slot", p.ns, "f2", 0)
    b.read(0, "x1", "bf1_own", p.ns, "bfsum", 0)
    b.read(0, "x1", "d1", p.ns, "d1", 0)
    b.read(0, "x2", "d2", p.ns, "d2", 0)

    # Sources: decode the feedback broadcast, strip own contribution.
    for node, own, other in ((1, 1, 2), (2, 2, 1)):
        b.read(node, "xf", "fsum", p.nf, "fsum", -1)
        b.read(node, "xf", "bfsum", p.nf, "bfsum", -1)
        b.combine(node, f"f{other}", "fsum", f"f{own}", -1)
        b.combine(node, f"bf{other}", "bfsum", f"bf{own}", -1)

    for dest, cross, own, other in ((3, "x2", 1, 2), (4, "x1", 2, 1)):
        b.sub(dest, cross, f"d{other}", p.nc, f"d{other}", 0)
        b.read(dest, cross, f"c{other}", p.nc, f"c{other}", 0)
        b.read(dest, cross, f"f{own}_slot", p.nc, f"f{own}", -2)
        b.read(dest, cross, f"bf{own}_fwd", p.nc, f"bf{own}", -2)
        b.read(dest, "xr", "d1_fwd", p.nr, "d1", -1)
        b.read(dest, "xr", "d2_fwd", p.nr, "d2", -1)
        b.read(dest, "xr", "csum_fwd", p.nr, "csum", -1)
        b.combine(dest, f"c{own}", "csum", f"c{other}", 0)

    return b.build({3: ("c1", "d1", "f1", "bf1"), 4: ("c2", "d2", "f2", "bf2")})


def _build_regime_d(p: ChannelParams, a: RateAllocation) -> Scheme:
    """CN + DF + symmetric/asymmetric F for nr < nc <= ns.

    Anything the destinations never need (future N-signals, the sym-F
    signals headed to the relay) rides below their noise floor when the
    ns - nc window has room, with the overflow placed above the aligned
    blocks; the two-part split of those streams tracks exactly that.
    """
    v = a.as_dict()
    R1f, R2f, Rba, Rbb, R1d, R2d, Rn1, Rn2 = (
        v["R1f"], v["R2f"], v["Rbarf1"], v["Rbarf2"], v["R1d"], v["R2d"], v["Rn1"], v["Rn2"],
    )
    Rfmax = max(R1f, R2f)
    b = _Builder(p, Regime.D, a)
    b.stream("f1", R1f)
    b.stream("f2", R2f)
    b.stream("fsum", Rfmax, ("f1", "f2"))
    b.stream("bfa1", Rba)
    b.stream("bfa2", Rba)
    b.stream("bfasum", Rba, ("bfa1", "bfa2"))
    b.stream("bfb1", Rbb)
    b.stream("bfb2", Rbb)
    b.stream("bfbsum", Rbb, ("bfb1", "bfb2"))
    b.stream("d1", R1d)
    b.stream("d2", R2d)
    b.stream("na1", Rn1)
    b.stream("na2", Rn1)
    b.stream("nasum", Rn1, ("na1", "na2"))
    b.stream("nb1", Rn2)
    b.stream("nb2", Rn2)
    b.stream("nbsum", Rn2, ("nb1", "nb2"))

    pad0 = p.nc - (R1f + R2f + 2 * Rba + Rbb + R1d + R2d + 2 * Rn1 + Rn2)
    pos_f1 = pad0
    pos_f2 = pos_f1 + R1f
    pos_bfa_fwd = pos_f2 + R2f
    pos_bfb_fwd = pos_bfa_fwd + Rba
    pos_bfa_own = pos_bfb_fwd + Rbb
    pos_na_fut = pos_bfa_own + Rba
    pos_d = pos_na_fut + Rn1
    pos_na = pos_d + R1d + R2d
    pos_nb = pos_na + Rn1
    pos_bfb_own = p.nc
    pos_nb_fut = p.nc + Rbb

    for sig, j, k in (("x1", 1, 2), ("x2", 2, 1)):
        b.tx(sig, "f1_slot", pos_f1, R1f, "f1", 0 if j == 1 else -2)
        b.tx(sig, "f2_slot", pos_f2, R2f, "f2", -2 if j == 1 else 0)
        b.tx(sig, f"bfa{k}_fwd", pos_bfa_fwd, Rba, f"bfa{k}", -2)
        b.tx(sig, f"bfb{k}_fwd", pos_bfb_fwd, Rbb, f"bfb{k}", -2)
        b.tx(sig, f"bfa{j}_own", pos_bfa_own, Rba, f"bfa{j}", 0)
        b.tx(sig, f"na{j}_future", pos_na_fut, Rn1, f"na{j}", 0)
        b.tx(sig, f"d{j}", pos_d + (0 if j == 1 else R1d), (R1d, R2d)[j - 1], f"d{j}", 0)
        b.tx(sig, f"na{j}_present", pos_na, Rn1, f"na{j}", -1)
        b.tx(sig, f"nb{j}_present", pos_nb, Rn2, f"nb{j}", -1)
        b.tx(sig, f"bfb{j}_own", pos_bfb_own, Rbb, f"bfb{j}", 0)
        b.tx(sig, f"nb{j}_future", pos_nb_fut, Rn2, f"nb{j}", 0)

    rbase = p.nr - R1d - R2d - Rn1 - Rn2
    b.tx("xr", "d1_fwd", rbase, R1d, "d1", -1)
    b.tx("xr", "d2_fwd", rbase + R1d, R2d, "d2", -1)
    b.tx("xr", "nasum_fwd", rbase + R1d + R2d, Rn1, "nasum", -1)
    b.tx("xr", "nbsum_fwd", p.nr - Rn2, Rn2, "nbsum", -1)
    b.tx_xor("xf", "fsum", 0, Rfmax, (("f1", -1), ("f2", -1)))
    b.tx("xf", "bfasum", Rfmax, Rba, "bfasum", -1)
    b.tx("xf", "bfbsum", Rfmax + Rba, Rbb, "bfbsum", -1)

    # Relay, forward: strip everything it already knows, then read clean.
    b.sub(0, "x2", "f1_slot", p.ns, "f1", -2)
    b.sub(0, "x1", "f2_slot", p.ns, "f2", -2)
    b.sub(0, "x1", "bfa2_fwd", p.ns, "bfasum", -2)
    b.sub(0, "x1", "bfb2_fwd", p.ns, "bfbsum", -2)
    b.sub(0, "x1", "na1_present", p.ns, "nasum", -1)
    b.sub(0, "x1", "nb1_present", p.ns, "nbsum", -1)
    b.read(0, "x1", "f1_slot", p.ns, "f1", 0)
    b.read(0, "x2", "f2_slot", p.ns, "f2", 0)
    b.read(0, "x1", "bfa1_own", p.ns, "bfasum", 0)
    b.read(0, "x1", "bfb1_own", p.ns, "bfbsum", 0)
    b.read(0, "x1", "na1_future", p.ns, "nasum", 0)
    b.read(0, "x1", "nb1_future", p.ns, "nbsum", 0)
    b.read(0, "x1", "d1", p.ns, "d1", 0)
    b.read(0, "x2", "d2", p.ns, "d2", 0)

    for node, own, other in ((1, 1, 2), (2, 2, 1)):
        b.read(node, "xf", "fsum", p.nf, "fsum", -1)
        b.read(node, "xf", "bfasum", p.nf, "bfasum", -1)
        b.read(node, "xf", "bfbsum", p.nf, "bfbsum", -1)
        b.combine(node, f"f{other}", "fsum", f"f{own}", -1)
        b.combine(node, f"bfa{other}", "bfasum", f"bfa{own}", -1)
        b.combine(node, f"bfb{other}", "bfbsum", f"bfb{own}", -1)

    for dest, cross, own, other in ((3, "x2", 1, 2), (4, "x1", 2, 1)):
        b.sub(dest, cross, f"d{other}", p.nc, f"d{other}", 0)
        b.read(dest, cross, f"f{own}_slot", p.nc, f"f{own}", -2)
        b.read(dest, cross, f"bfa{own}_fwd", p.nc, f"bfa{own}", -2)
        b.read(dest, cross, f"bfb{own}_fwd", p.nc, f"bfb{own}", -2)
        b.read(dest, "xr", "d1_fwd", p.nr, "d1", -1)
        b.read(dest, "xr", "d2_fwd", p.nr, "d2", -1)
        b.read(dest, cross, f"na{other}_present", p.nc, f"na{own}", -1)
        b.read(dest, cross, f"nb{other}_present", p.nc, f"nb{own}", -1)

    return b.build(
        {3: ("f1", "bfa1", "bfb1", "d1", "na1", "nb1"), 4: ("f2", "bfa2", "bfb2", "d2", "na2", "nb2")}
    )


_BUILDERS = {
    Regime.A: _build_regime_a,
    Regime.B: _build_regime_b,
    Regime.C: _build_regime_c,
    Regime.D: _build_regime_d,
}


def build_scheme(p: ChannelParams, alloc: RateAllocation) -> Scheme:
    """Materialize the full per-use signal plan for a feasible allocation."""
    system = constraint_system(alloc.regime, p)
    d = alloc.as_dict()
    for q in system.ineqs:
        lhs = sum(int(c) * d.get(v, 0) for v, c in q.coeffs.items())
        if lhs > q.bound:
            raise SchemeError(f"allocation {d} violates {q}")
    return _BUILDERS[alloc.regime](p, alloc)


def scheme_for_target(p: ChannelParams, target: tuple[int, int]) -> Scheme:
    return build_scheme(p, allocate(p, target))
