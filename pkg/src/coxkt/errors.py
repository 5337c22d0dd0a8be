"""Exception types shared across the package."""


class CoxKTError(Exception):
    """Base class for all domain errors raised by this package."""


class MalformedInputError(CoxKTError):
    """Input data violates a structural precondition (bad descriptor, bad matrix)."""


class DiagramError(CoxKTError):
    """Coxeter diagram text or matrix fails the Coxeter-matrix axioms."""


class NotHyperbolicSimplexError(CoxKTError):
    """Diagram is not a hyperbolic simplex group (offending subdiagram in args)."""


class RealizationError(CoxKTError):
    """Numerical failure while realizing or folding a finite reflection group."""


class ChainComplexError(CoxKTError):
    """Differentials do not compose to zero, or dimensions do not chain."""


class KBError(CoxKTError):
    """Knowledge-base file is malformed or internally inconsistent."""


class MissingEntryError(KBError):
    """No stored value (and no vanishing rule) for a requested (group, q)."""


class FixtureError(KBError):
    """A bundled fixture fails its declared consistency check."""


class MissingIntersectionError(CoxKTError):
    """The join intersection table has no entry for a stabilizer pair."""


class SpectralError(CoxKTError):
    """Coefficient complex violates the shape the collapse argument needs."""


class UnresolvedSymbolError(CoxKTError):
    """Derivation engine exhausted its rules with symbols left over."""


class RuleApplicationError(CoxKTError):
    """A rewrite rule was applied to an expression it does not match."""
