"""Exception types raised across the package.

Every error carries a short machine-readable ``code`` so the CLI can emit
structured JSON on failure.
"""


class Mch2Error(Exception):
    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


# fields
class NonPositiveMomentum(Mch2Error):
    code = "non_positive_momentum"


class TailViolation(Mch2Error):
    code = "tail_violation"


class GridMismatch(Mch2Error):
    code = "grid_mismatch"


# direct scattering
class NearSingularK(Mch2Error):
    code = "near_singular_k"


class IntegratorDivergence(Mch2Error):
    code = "integrator_divergence"


class XDependenceDetected(Mch2Error):
    code = "x_dependence_detected"


class NonSimpleZero(Mch2Error):
    code = "non_simple_zero"


class CountMismatch(Mch2Error):
    code = "count_mismatch"


class BoundarySpectrum(Mch2Error):
    code = "boundary_spectrum"


# phase
class SingularK(Mch2Error):
    code = "singular_k"


class RegionBoundary(Mch2Error):
    code = "region_boundary"


class ReflectionAtUnitModulus(Mch2Error):
    code = "reflection_at_unit_modulus"


class OnJumpContour(Mch2Error):
    code = "on_jump_contour"


class BranchAmbiguity(Mch2Error):
    code = "branch_ambiguity"


# soliton / RH
class TDerivativeVanishes(Mch2Error):
    code = "t_derivative_vanishes"


class SingularSystem(Mch2Error):
    code = "singular_system"


class NonInvertibleMJ0(Mch2Error):
    code = "non_invertible_mj0"


class LimitNotConverged(Mch2Error):
    code = "limit_not_converged"


class DegenerateG3(Mch2Error):
    code = "degenerate_g3"


class InvalidSpectrum(Mch2Error):
    code = "invalid_spectrum"


# asymptotics
class DegenerateG(Mch2Error):
    code = "degenerate_g"


class UnitReflection(Mch2Error):
    code = "unit_reflection"


# pde
class CFLViolation(Mch2Error):
    code = "cfl_violation"


class PositivityLoss(Mch2Error):
    code = "positivity_loss"
