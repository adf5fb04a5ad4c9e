"""Exception hierarchy.

Every error carries a stable ``code`` string; the CLI prints it and exits
with status 1.
"""


class TropicalError(Exception):
    code = "error"

    def __init__(self, message: str = "", **context):
        super().__init__(message)
        self.context = context

    def to_dict(self) -> dict:
        out = {"error": self.code, "message": str(self)}
        out.update({k: _plain(v) for k, v in self.context.items()})
        return out


def _plain(value):
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return str(value)


class CategoryError(TropicalError):
    code = "category"


class CycleDetected(CategoryError):
    code = "cycle_detected"


class DuplicateArrow(CategoryError):
    code = "duplicate_arrow"


class MissingLCA(CategoryError):
    code = "missing_lca"


class UnknownObject(CategoryError):
    code = "unknown_object"


class SizeLimit(TropicalError):
    code = "size_limit"


class SpaceError(TropicalError):
    code = "space"


class MassMismatch(SpaceError):
    code = "mass_mismatch"


class NotSurjective(SpaceError):
    code = "not_surjective"


class InvalidSpace(SpaceError):
    code = "invalid_space"


class DiagramError(TropicalError):
    code = "diagram"


class NonCommutative(DiagramError):
    code = "non_commutative"


class ShapeMismatch(DiagramError):
    code = "shape_mismatch"


class MissingMap(DiagramError):
    code = "missing_map"


class ZeroMassAtom(DiagramError):
    code = "zero_mass_atom"


class NotAReduction(DiagramError):
    code = "not_a_reduction"


class InclusionViolation(TropicalError):
    code = "inclusion_violation"


class GroupTooLarge(SizeLimit):
    code = "group_too_large"


class NotAChain(TropicalError):
    code = "not_a_chain"


class NotMonotone(TropicalError):
    code = "not_monotone"


class ParseError(TropicalError):
    code = "parse_error"


#: Stable error codes, exposed through the CLI.
ERROR_CODES = {
    cls.code: cls
    for cls in (
        TropicalError, CategoryError, CycleDetected, DuplicateArrow, MissingLCA,
        UnknownObject, SizeLimit, SpaceError, MassMismatch, NotSurjective,
        InvalidSpace, DiagramError, NonCommutative, ShapeMismatch, MissingMap,
        ZeroMassAtom, NotAReduction, InclusionViolation, GroupTooLarge,
        NotAChain, NotMonotone, ParseError,
    )
}
