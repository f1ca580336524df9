"""All-pairs data-race prediction over recorded concurrency traces."""

from .trace import Event, Kind, ParseError, Trace, TraceError, ValidationError, parse_trace, validate_trace
from .vclock import Epoch, VectorClock

__all__ = [
    "Epoch",
    "Event",
    "Kind",
    "ParseError",
    "Trace",
    "TraceError",
    "ValidationError",
    "VectorClock",
    "parse_trace",
    "validate_trace",
]
