"""Requirement -> past-time formula, via a fixed template table.

With M the scope guard (``true`` for global scope), c the condition and R the
response:

==================  ======================================================
no condition        H (M -> R)            never: H (M -> !R)
condition           H ((M S (M & c)) -> R)    never: H ((M S (M & c)) -> !R)
condition, within   H !((M & !R) S[n,inf] (M & c & !R))
==================  ======================================================

"within n ticks" without a trigger has no finite-prefix violation and is
rejected. The result is constant-folded, so global scope drops the guard.
"""

from __future__ import annotations

from .errors import NonMonitorable
from .expr import SignalRef
from .formula import (
    TRUE,
    Atom,
    Formula,
    Historically,
    Implies,
    LAnd,
    LNot,
    Since,
    fold,
)
from .fretish import Always, InMode, Never, Requirement, Within


def formalize(req: Requirement) -> Formula:
    guard: Formula = Atom(SignalRef(req.scope.mode)) if isinstance(req.scope, InMode) else TRUE
    response: Formula = Atom(req.response)
    timing = req.timing

    if req.condition is None:
        if isinstance(timing, Always):
            body = Implies(guard, response)
        elif isinstance(timing, Never):
            body = Implies(guard, LNot(response))
        elif isinstance(timing, Within):
            raise NonMonitorable(
                f"{req.id}: 'within {timing.ticks} ticks' needs a when/upon trigger to start the deadline"
            )
        else:
            raise NonMonitorable(f"{req.id}: unsupported timing {timing!r}")
        return fold(Historically(body))

    # "upon" is parsed separately but shares the "when" encoding.
    trigger = Atom(req.condition.expr)
    armed = Since(guard, LAnd(guard, trigger))
    if isinstance(timing, Always):
        body = Implies(armed, response)
    elif isinstance(timing, Never):
        body = Implies(armed, LNot(response))
    elif isinstance(timing, Within):
        pending = LAnd(guard, LNot(response))
        started = LAnd(LAnd(guard, trigger), LNot(response))
        body = LNot(Since(pending, started, timing.ticks, None))
    else:
        raise NonMonitorable(f"{req.id}: unsupported timing {timing!r}")
    return fold(Historically(body))
