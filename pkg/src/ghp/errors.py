"""Exception hierarchy shared by all pipeline stages.

Every exception carries the name of the module that raised it so the
command line front end can emit a machine readable error record.
"""

from __future__ import annotations


class GHPError(Exception):
    """Base class for all library errors."""

    module = "ghp"

    def __init__(self, detail: str = "", module: str | None = None):
        super().__init__(detail)
        self.detail = detail
        if module is not None:
            self.module = module

    def as_record(self) -> dict:
        return {"error": type(self).__name__, "module": self.module, "detail": self.detail}


# hermite
class DegreeCapExceeded(GHPError):
    module = "hermite"


# roots
class NonConvergence(GHPError):
    module = "roots"


# elliptic
class DomainError(GHPError, ValueError):
    module = "elliptic"


# actions
class TurningPointCollision(GHPError):
    module = "actions"


class LabelAmbiguity(GHPError):
    module = "actions"


class BranchSuspect(GHPError):
    module = "actions"


class ContourDegenerate(GHPError):
    module = "actions"


class NewtonDiverged(GHPError):
    module = "actions"


# region
class ClassificationFailure(GHPError):
    module = "region"


class CutCrossing(GHPError):
    module = "region"


class BranchJump(GHPError):
    module = "region"


class LogSingular(GHPError):
    module = "region"


class TraceLost(GHPError):
    module = "region"


class EdgeMismatch(GHPError):
    module = "region"


# lattice
class OutsideK(GHPError):
    module = "lattice"


# compare
class MatchingAmbiguous(GHPError):
    module = "compare"


class FitDegenerate(GHPError):
    module = "compare"
