class PoslogError(Exception):
    """Base exception for all poslog errors"""
    pass

class SignatureError(PoslogError):
    """Error in a signature declaration"""
    pass

class SortError(PoslogError):
    """Ill-sorted term, formula or assignment"""
    pass

class FormulaError(PoslogError):
    """Malformed formula"""
    pass

class TheoryError(PoslogError):
    """Theory sentences incompatible with the declared kind"""
    pass

class ParseError(PoslogError):
    """Error when reading poslog text"""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        message = "; ".join(str(d) for d in self.diagnostics) or "parse error"
        super().__init__(message)

class StructureError(PoslogError):
    """Malformed finite structure"""
    pass

class HomomorphismError(PoslogError):
    """Sorted map that is not a homomorphism"""
    pass

class UniverseClassError(PoslogError):
    """Malformed universe class or structure outside the class"""
    pass

class NotContinuableError(PoslogError):
    """No continuation into a pec member exists in the class"""
    pass

class PreconditionError(PoslogError):
    """Operation called outside its precondition"""
    pass

class ResourceCeilingError(PoslogError):
    """Enumeration or search exceeded the configured ceiling"""
    pass

class EmptyPositiveClassError(PoslogError):
    """The class has no pec member"""
    pass

class IndistinguishableAtDepthError(PoslogError):
    """Two types coincide at the given depth"""
    pass

class NotConstructibleError(PoslogError):
    """Formula is not a Boolean combination of positive formulas"""
    pass

class NotGeometricError(PoslogError):
    """Formula is outside the geometric fragment"""
    pass

class NoExistentialMemberError(PoslogError):
    """A designated existential member is required but unavailable"""
    pass

class FragmentCoverageError(PoslogError):
    """Theory sentence outside the chosen fragment"""
    pass

class ModelError(PoslogError):
    """Structure fails an axiom it is required to satisfy"""
    pass

class ConfigError(PoslogError):
    """Error in configuration"""
    pass
