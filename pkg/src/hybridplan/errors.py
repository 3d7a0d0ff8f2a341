"""Exception types shared across the package.

Unsolvability is not an error: operations that can legitimately fail
return the ``Incompatible`` / ``Infeasible`` sentinels instead of raising.
"""


class HybridPlanError(Exception):
    """Base class for all package errors."""


class NotBiconnected(HybridPlanError):
    pass


class NotPlanar(HybridPlanError):
    pass


class MismatchedRotation(HybridPlanError):
    """A rotation system does not cover exactly the incident edges."""


class LeafNotPresent(HybridPlanError):
    pass


class LeafSetMismatch(HybridPlanError):
    pass


class TooLarge(HybridPlanError):
    """An enumeration guard was exceeded."""


class NotJoinable(HybridPlanError):
    pass


class InvalidConstraint(HybridPlanError):
    pass


class InvalidSolution(HybridPlanError):
    pass


class MissingSideAnnotation(HybridPlanError):
    pass


class InvalidSideStructure(HybridPlanError):
    pass


class NotAClique(HybridPlanError):
    pass


class FrameNotBiconnected(HybridPlanError):
    pass


class BudgetExceeded(HybridPlanError):
    pass


class InternalError(HybridPlanError):
    """An internal invariant failed; indicates a bug, never silently ignored."""


class _Sentinel:
    __slots__ = ("_name",)

    def __init__(self, name):
        self._name = name

    def __repr__(self):
        return self._name

    def __bool__(self):
        return False


#: Returned by tree operations whose result set of orders is empty.
INCOMPATIBLE = _Sentinel("Incompatible")

#: Returned by solvers when no solution exists.
INFEASIBLE = _Sentinel("Infeasible")
