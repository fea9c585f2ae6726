"""Packet pairing, CFO cancellation, and trajectory alignment.

Off-the-shelf radios impose an unknown carrier frequency offset that shows
up as phase +eps on the forward channel and -eps on the reverse channel of a
near-simultaneous packet pair. Multiplying the two channels cancels that
phase and doubles the geometric displacement phase, which is why downstream
steering uses the round-trip phase factor.

Packets carry an embedded counter instead of synchronized clocks; pairing is
a greedy in-order merge on counters, which is optimal for in-order streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateChannelError,
    InvalidArgumentError,
    MalformedLogError,
)
from .types import AgentId, CsiPacket, Trajectory


@dataclass(frozen=True)
class ExchangeLog:
    """Received packets of one bidirectional exchange.

    forward: packets sent by the remote agent, measured at the receiver.
    reverse: packets sent by the receiver, measured at the remote agent.
    Each stream is sorted by counter; counters may have gaps (losses).
    """

    forward: tuple[CsiPacket, ...]
    reverse: tuple[CsiPacket, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "forward", tuple(self.forward))
        object.__setattr__(self, "reverse", tuple(self.reverse))


@dataclass(frozen=True)
class PairingStats:
    """Bookkeeping for one exchange.

    sent counts transmissions inferred from the counter span (both
    directions); received counts packets present in the log; dropped counts
    unpaired packets on the shorter side, so paired + dropped equals
    min(|forward|, |reverse|); out_of_span counts paired entries discarded
    for falling outside the trajectory window.
    """

    sent: int = 0
    received: int = 0
    paired: int = 0
    dropped: int = 0
    out_of_span: int = 0


@dataclass(frozen=True)
class PairedChannel:
    """CFO-cancelled channel sequence aligned with interpolated positions."""

    timestamps: np.ndarray
    positions: np.ndarray
    channels: np.ndarray
    pairing_stats: PairingStats = field(default_factory=PairingStats)

    def __post_init__(self) -> None:
        ts = np.asarray(self.timestamps, dtype=float)
        pos = np.asarray(self.positions, dtype=float)
        ch = np.asarray(self.channels, dtype=complex)
        if not (ts.shape == ch.shape and ts.ndim == 1 and pos.shape == (ts.size, 3)):
            raise InvalidArgumentError(
                f"inconsistent entry shapes: {ts.shape}, {pos.shape}, {ch.shape}"
            )
        if ts.size > 1 and np.any(np.diff(ts) < 0):
            raise InvalidArgumentError("entries must be sorted by timestamp")
        for arr in (ts, pos, ch):
            arr.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "channels", ch)

    def __len__(self) -> int:
        return int(self.timestamps.size)

    def subsample(self, step: int) -> "PairedChannel":
        """Every step-th entry (the paper's sub-sample configuration)."""
        if step < 1:
            raise InvalidArgumentError(f"subsample step must be >= 1, got {step}")
        if step == 1:
            return self
        return replace(
            self,
            timestamps=self.timestamps[::step].copy(),
            positions=self.positions[::step].copy(),
            channels=self.channels[::step].copy(),
        )


def _check_stream(packets: Sequence[CsiPacket], name: str) -> None:
    counters = [p.counter for p in packets]
    for prev, cur in zip(counters, counters[1:]):
        if cur == prev:
            raise MalformedLogError(f"{name} stream repeats counter {cur}")
        if cur < prev:
            raise MalformedLogError(f"{name} stream is not sorted by counter ({prev} then {cur})")


def pair_packets(
    log: ExchangeLog, max_counter_skew: int = 0
) -> list[tuple[CsiPacket, CsiPacket]]:
    """Greedy in-order matching of forward/reverse packets by counter.

    Every returned pair satisfies |forward.counter - reverse.counter| <=
    max_counter_skew and each packet is used at most once. Either stream
    being empty yields an empty result.
    """
    if max_counter_skew < 0:
        raise InvalidArgumentError(f"max_counter_skew must be >= 0, got {max_counter_skew}")
    _check_stream(log.forward, "forward")
    _check_stream(log.reverse, "reverse")

    pairs: list[tuple[CsiPacket, CsiPacket]] = []
    i = j = 0
    while i < len(log.forward) and j < len(log.reverse):
        fwd, rev = log.forward[i], log.reverse[j]
        if abs(fwd.counter - rev.counter) <= max_counter_skew:
            pairs.append((fwd, rev))
            i += 1
            j += 1
        elif fwd.counter < rev.counter:
            i += 1
        else:
            j += 1
    return pairs


def cancel_cfo(pairs: Sequence[tuple[CsiPacket, CsiPacket]]) -> np.ndarray:
    """Forward*reverse channel products; the shared CFO phase cancels.

    The result's geometric phase is doubled, so profile computation on it
    must use the round-trip phase factor.
    """
    if len(pairs) == 0:
        raise InvalidArgumentError("cancel_cfo needs at least one packet pair")
    bad = [
        fwd.counter
        for fwd, rev in pairs
        if abs(fwd.channel) == 0.0 or abs(rev.channel) == 0.0
    ]
    if bad:
        raise DegenerateChannelError(
            f"zero-magnitude channel in pairs with counters {bad}"
        )
    return np.array([fwd.channel * rev.channel for fwd, rev in pairs], dtype=complex)


def align_to_trajectory(
    channels,
    pair_timestamps,
    traj: Trajectory,
    stats: PairingStats | None = None,
) -> PairedChannel:
    """Attach interpolated positions to a channel sequence.

    Entries timestamped outside the trajectory span are dropped and counted
    in the returned stats.
    """
    ch = np.asarray(channels, dtype=complex)
    ts = np.asarray(pair_timestamps, dtype=float)
    if ch.shape != ts.shape or ch.ndim != 1:
        raise InvalidArgumentError(
            f"channels and timestamps must be equal-length 1-d, got {ch.shape} vs {ts.shape}"
        )
    if len(traj) == 0:
        raise InvalidArgumentError("trajectory is empty")

    t0, t1 = traj.span
    in_span = (ts >= t0) & (ts <= t1)
    dropped_here = int(ts.size - in_span.sum())
    ts, ch = ts[in_span], ch[in_span]

    if stats is None:
        stats = PairingStats(paired=int(ts.size) + dropped_here, received=int(ts.size) + dropped_here)
    stats = replace(stats, out_of_span=stats.out_of_span + dropped_here)
    return PairedChannel(ts, traj.interpolate(ts), ch, stats)


def pair_exchange(
    log: ExchangeLog, traj: Trajectory, max_counter_skew: int = 0
) -> PairedChannel:
    """Full pairing pipeline: pair by counter, cancel CFO, align to motion."""
    pairs = pair_packets(log, max_counter_skew)
    if not pairs:
        raise InvalidArgumentError("no packet pairs survive counter matching")
    counters = [p.counter for p in log.forward] + [p.counter for p in log.reverse]
    stats = PairingStats(
        sent=2 * (max(counters) + 1),
        received=len(log.forward) + len(log.reverse),
        paired=len(pairs),
        dropped=min(len(log.forward), len(log.reverse)) - len(pairs),
    )
    products = cancel_cfo(pairs)
    timestamps = [fwd.timestamp for fwd, _ in pairs]
    return align_to_trajectory(products, timestamps, traj, stats)


def round_robin_schedule(
    initiator: AgentId, responders: Sequence[AgentId], n_rounds: int
) -> list[AgentId]:
    """Transmission order for the TDMA-style exchange protocol.

    The initiator broadcasts, then each responder replies in fixed order;
    the whole cycle repeats n_rounds times. No two agents ever share a slot.
    """
    if len(responders) == 0:
        raise InvalidArgumentError("at least one responder required")
    if len(set(responders)) != len(responders):
        raise InvalidArgumentError(f"responder ids must be distinct, got {list(responders)}")
    if initiator in responders:
        raise InvalidArgumentError("initiator cannot also be a responder")
    if n_rounds < 0:
        raise InvalidArgumentError(f"n_rounds must be >= 0, got {n_rounds}")
    return [initiator, *responders] * n_rounds
