"""Exception hierarchy.

Every error raised by the library derives from :class:`HgError` so the CLI can
map it onto an exit code with a single ``except`` clause.
"""


class HgError(Exception):
    """Base class for library errors."""

    exit_code = 1


class InvalidInput(HgError, ValueError):
    """Malformed or shape-inconsistent input data."""

    exit_code = 2


class DegeneratePolytope(InvalidInput):
    """Input points do not span a full-dimensional affine hull."""


class NotAdmissible(InvalidInput):
    """Weight function violates positivity, monotonicity or log-convexity."""


class EmptyDerivative(InvalidInput):
    pass


class ZeroTwist(InvalidInput):
    """A pushforward was requested along the zero coweight."""


class DegreeOverflow(InvalidInput):
    pass


class NotCoercive(HgError):
    """The objective has no minimizer (origin not interior, or bad profile)."""

    exit_code = 3


# rank-one profiles use the same condition under a different name
NonCoercive = NotCoercive


class NoConvergence(HgError):
    exit_code = 4


NonConvergence = NoConvergence


class ToleranceNotMet(HgError):
    """Adaptive quadrature exhausted its evaluation budget."""

    exit_code = 4
