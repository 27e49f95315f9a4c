"""Exception types shared across the package."""


class TheoryForgeError(Exception):
    """Base class for package errors."""


# knowledge graph
class DuplicateId(TheoryForgeError):
    pass


class UnknownEntity(TheoryForgeError):
    pass


class UnknownInput(TheoryForgeError):
    pass


class EntityInUse(TheoryForgeError):
    pass


class ArityMismatch(TheoryForgeError):
    pass


# production rules
class IncompatibleCategories(TheoryForgeError):
    pass


class InvalidMapping(TheoryForgeError):
    pass


class EmptyIndexSet(TheoryForgeError):
    pass


class FullQuantification(TheoryForgeError):
    pass


class WrongArity(TheoryForgeError):
    pass


class MissingInit(TheoryForgeError):
    pass


class InvalidSharingMap(TheoryForgeError):
    pass


class TooFewIndices(TheoryForgeError):
    pass


class NotAnExample(TheoryForgeError):
    pass


class NotAConstant(TheoryForgeError):
    pass


class IndexOutOfRange(TheoryForgeError):
    pass


class NotAPredicate(TheoryForgeError):
    pass


class ForbiddenPath(TheoryForgeError):
    pass


class CategoryMismatch(TheoryForgeError):
    pass


class MissingValue(TheoryForgeError):
    pass


class EmptySet(TheoryForgeError):
    pass


# DSL / compiler
class DslSyntaxError(TheoryForgeError):
    pass


class UnresolvedName(TheoryForgeError):
    pass


class NameCollision(TheoryForgeError):
    pass


class UnsupportedConstruct(TheoryForgeError):
    pass


class RecursionDepthExceeded(TheoryForgeError):
    pass


# prover
class SolverUnavailable(TheoryForgeError):
    pass


class MalformedOutput(TheoryForgeError):
    pass


class NonFieldConstruct(TheoryForgeError):
    pass


class TooManyVariables(TheoryForgeError):
    pass


# scoring
class ScoreSyntaxError(TheoryForgeError):
    pass


class LengthMismatch(TheoryForgeError):
    pass


class ZeroWeights(TheoryForgeError):
    pass


class UnknownPrimitive(TheoryForgeError):
    pass


class UnknownAbstraction(TheoryForgeError):
    pass


class ScoreTypeError(TheoryForgeError):
    pass


class DepthExceeded(TheoryForgeError):
    pass


# environment
class UnknownConfig(TheoryForgeError):
    pass


class NoApplicableActions(TheoryForgeError):
    pass


class BudgetExceeded(TheoryForgeError):
    """Raised internally when an evaluation step budget runs out."""
