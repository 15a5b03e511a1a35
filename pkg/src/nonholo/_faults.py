"""Test-only fault injection hooks.

Pipeline functions pass selected intermediate matrices through
:func:`apply`. Outside an :func:`inject` block this is the identity.
"""
from contextlib import contextmanager
from contextvars import ContextVar

FAULT_TARGETS = ("fiber_metric", "projector", "multipliers")

_active: ContextVar[dict] = ContextVar("nonholo_faults", default={})


def apply(name, value):
    rel = _active.get().get(name)
    if rel is None:
        return value
    return value * (1.0 + rel)


@contextmanager
def inject(name, rel=1e-3):
    """Scale the named intermediate by ``1 + rel`` for the duration of the block."""
    if name not in FAULT_TARGETS:
        raise ValueError(f"unknown fault target {name!r}; expected one of {FAULT_TARGETS}")
    faults = dict(_active.get())
    faults[name] = rel
    token = _active.set(faults)
    try:
        yield
    finally:
        _active.reset(token)
