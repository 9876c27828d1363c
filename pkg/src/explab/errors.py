"""Exception hierarchy shared across the toolkit."""


class ExplabError(Exception):
    """Base class for all toolkit errors."""


# --- channel construction ---------------------------------------------------

class NonStochasticRow(ExplabError):
    """A transition-matrix row does not sum to one within tolerance."""


class NegativeEntry(ExplabError):
    """A probability entry is negative."""


class AlphabetTooSmall(ExplabError):
    """Input or output alphabet has fewer than two symbols."""


class DegenerateChannel(ExplabError):
    """Channel parameters outside the admissible open region."""


class InfiniteDistance(ExplabError):
    """Some symbol pair has disjoint output support (zero-error behaviour)."""


# --- exponent computations --------------------------------------------------

class RhoOutOfRange(ExplabError):
    """Tilting parameter outside its admissible interval."""


class RateOutOfRange(ExplabError):
    """Rate outside the operation's admissible interval."""


class NonConvergence(ExplabError):
    """Iterative ascent failed to meet tolerance within the budget."""


class BracketExhausted(ExplabError):
    """Supremum still increasing at the search cap."""


class Diverging(ExplabError):
    """Sphere-packing supremum not attained within the bracket."""


class BisectionFailure(ExplabError):
    """Monotonicity assumption violated or root bracket not found."""


# --- types / oracle ---------------------------------------------------------

class SupportViolation(ExplabError):
    """Joint distribution puts mass outside the product support."""


class LengthMismatch(ExplabError):
    """Sequences of unequal length."""


class EnumerationTooLarge(ExplabError):
    """Joint-type enumeration would exceed the size guard."""


class EmptyFeasibleSet(ExplabError):
    """No grid point satisfies the divergence constraint."""


# --- simulation -------------------------------------------------------------

class InstanceTooLarge(ExplabError):
    """Exhaustive evaluation would exceed the output-space guard."""


class TooFewSamples(ExplabError):
    """Not enough samples for the requested statistic."""


class QuadratureFailure(ExplabError):
    """Adaptive quadrature did not reach the requested tolerance."""
