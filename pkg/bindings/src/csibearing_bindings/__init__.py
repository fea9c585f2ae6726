"""Scripting layer over the csibearing core: plain mappings in, plain
mappings out.

Exposes six operations -- estimate_bearing, compute_profile,
profile_variance, find_peaks, localize, and simulate_channel -- for callers
that hold records, scenes, and observations as native dict/list structures
(for example straight from json.load) rather than core dataclasses. Results
are numerically identical to what the CLI produces on the same serialized
inputs.

Profiles cross the boundary as shape + flat float64 buffer + bin metadata,
never as nested lists. Errors from the core propagate unchanged, message
included. No global mutable state is held; concurrent calls are fine, and
the heavy numerics run inside numpy kernels, which release the interpreter
lock.
"""

from .api import (
    compute_profile,
    estimate_bearing,
    find_peaks,
    localize,
    profile_variance,
    simulate_channel,
)

__version__ = "0.1.0"

__all__ = [
    "compute_profile",
    "estimate_bearing",
    "find_peaks",
    "localize",
    "profile_variance",
    "simulate_channel",
]
