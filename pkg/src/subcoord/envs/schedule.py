"""Arrival and departure schedules for open multi-agent systems."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EntitySchedule:
    """Active rounds [arrival, departure], both inclusive, 1-based."""

    arrival: int
    departure: int

    def active(self, t):
        return self.arrival <= t <= self.departure

    @property
    def lifespan(self):
        return self.departure - self.arrival


@dataclass(frozen=True)
class OpenSchedule:
    entries: tuple

    def active_ids(self, t):
        return tuple(i for i, e in enumerate(self.entries) if e.active(t))

    @property
    def count(self):
        return len(self.entries)


def open_schedule(T, base_count, extra_count, min_lifespan, window_fraction, rng):
    """Base entities span the whole horizon; extras arrive inside a window.

    Extras arrive uniformly in [1, window_fraction * T] and stay for
    max(min_lifespan, sampled residual) rounds, capped at the horizon.
    Raises on contradictory parameters (e.g. a window so late that the
    minimum lifespan cannot fit).
    """
    T = int(T)
    if T <= min_lifespan:
        raise ValueError(f"horizon {T} must exceed the minimum lifespan {min_lifespan}")
    if not (0.0 < window_fraction <= 1.0):
        raise ValueError("window fraction must lie in (0, 1]")
    window = max(1, int(window_fraction * T))
    if extra_count > 0 and window + min_lifespan > T:
        raise ValueError(
            f"arrival window [1, {window}] plus minimum lifespan {min_lifespan} "
            f"exceeds the horizon {T}"
        )
    entries = [EntitySchedule(1, T) for _ in range(base_count)]
    for _ in range(extra_count):
        arrival = 1 + int(rng.integers(window))
        residual = int(rng.integers(T - arrival + 1))
        departure = min(arrival + max(min_lifespan, residual), T)
        entries.append(EntitySchedule(arrival, departure))
    return OpenSchedule(tuple(entries))
