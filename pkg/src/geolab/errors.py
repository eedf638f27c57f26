"""Exception types shared across the package.

Every error carries an ``exit_code`` so the command line front end can map
failures onto its documented exit codes (2 = usage / bad input, 1 = a check
or solve failed, 3 = resource budget exceeded).
"""


class GeolabError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class NonFiniteInput(GeolabError):
    """An input array contains NaN or infinity."""


class InvalidExponent(GeolabError):
    """A norm exponent is outside its admissible range."""


class InvalidExponents(GeolabError):
    """A pair of exponents violates an ordering constraint (e.g. p < q)."""


class NotPsd(GeolabError):
    """A matrix expected to be symmetric positive semidefinite is not."""


class DimensionMismatch(GeolabError):
    """Operands have incompatible shapes."""


class OrderViolated(GeolabError):
    """The semidefinite order S <= T required by an operation fails."""


class SingularCoefficient(GeolabError):
    """A coefficient matrix that must be invertible is singular."""


class DegenerateBasis(GeolabError):
    """Subspace basis elements are (numerically) linearly dependent."""


class NoConvergence(GeolabError):
    """An iterative solver exhausted its budget.

    Attributes
    ----------
    n_iter : iterations actually performed.
    best_residual : smallest residual seen before giving up.
    """

    exit_code = 1

    def __init__(self, message, n_iter=None, best_residual=None):
        super().__init__(message)
        self.n_iter = n_iter
        self.best_residual = best_residual


class SampleTooSmall(GeolabError):
    """A sampling budget is too small to cover the object being probed."""


class NotInSubspace(GeolabError):
    """A matrix does not lie in the subspace a certificate refers to."""


class TooLarge(GeolabError):
    """A requested object exceeds the configured size budget."""

    exit_code = 3


class Disconnected(GeolabError):
    """A graph that must be connected is not."""


class CollapsedPair(GeolabError):
    """Two distinct points share one image, so a distortion ratio is infinite."""


class InvalidChain(GeolabError):
    """A Markov chain specification is malformed."""


class NotAMartingale(GeolabError):
    """Successive stages violate the conditional-expectation identity."""
