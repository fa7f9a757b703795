"""Exception hierarchy shared by all modules."""


class EKError(Exception):
    """Base class for every error raised by the package."""


class FieldError(EKError):
    """Operands live in incompatible fields or an element is missing from the tower."""


class TowerTooDeep(FieldError):
    """A required extension would exceed the absolute degree cap."""


class ReducibleModulus(FieldError):
    """The polynomial offered as a minimal polynomial factors over the base."""


class NoRootError(EKError):
    """A defining polynomial has no simple root in the requested p-adic field."""


class PrecisionError(EKError):
    """Invalid or exhausted p-adic precision."""


class PrecisionExhausted(PrecisionError):
    """The requested output precision cannot be certified with the current budget."""


class TruncationError(EKError):
    """A coefficient at or above the truncation order was requested."""


class CompositionError(EKError):
    """Inner series of a composition has a nonzero constant term or bad shape."""


class DomainError(EKError):
    """Precondition of exp/log/reversion violated."""


class ResidueError(EKError):
    """Antiderivative requested for a series with a nonzero z^-1 term."""


class NotElliptic(EKError):
    """Pole descent left a residual that is not a polynomial in wp and wp'."""


class CrossCheckError(EKError):
    """Two independent constructions of the same object disagree."""


class OrbitError(EKError):
    """The pi-orbit of a torsion point did not close within the step budget."""


class NotIntegral(EKError):
    """A formal endomorphism series has a non-integral coefficient."""


class CongruenceError(EKError):
    """The Frobenius congruence for [pi](s) fails."""


class AuditError(EKError):
    """A torsion sum that must vanish does not vanish at certified precision."""


class OracleMismatch(EKError):
    """An independent oracle disagrees with the primary computation."""


class PoleError(EKError):
    """Evaluation requested at a pole."""


class ConvergenceBudget(EKError):
    """A lattice sum would need a radius beyond the configured cap."""


class PathThroughLattice(EKError):
    """An integration path passes too close to a lattice point."""


class UnknownIdentity(EKError):
    """Identity name not present in the verification registry."""


class ConfigError(EKError):
    """Invalid run configuration."""
