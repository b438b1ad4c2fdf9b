"""Toolkit-wide exception types.

Separated so that every module (and the CLI exit-code mapping) can agree on
what "ran out of budget" and "outside the supported fragment" mean without
import cycles.
"""

from __future__ import annotations


class CapExceeded(RuntimeError):
    """A construction hit its configured size cap.

    ``detail`` carries whatever partial counts the construction had when it
    gave up, so callers can emit a partial report.
    """

    def __init__(self, message: str, detail: dict | None = None):
        super().__init__(message)
        self.detail = dict(detail or {})


class UnsupportedInput(ValueError):
    """The input is well-formed but outside the fragment this toolkit
    implements (e.g. a certificate routine whose hypotheses fail)."""
