class FractureSimError(Exception):
    pass


class ConfigurationError(FractureSimError, ValueError):
    """Invalid geometry, material or scenario input."""


class InputError(FractureSimError, ValueError):
    pass


class SingularMaterialError(FractureSimError, ValueError):
    pass


class JacobianError(FractureSimError):
    pass


class SingularSystemError(FractureSimError):
    """Reduced stiffness is not positive definite (unconstrained rigid mode)."""


class SolverError(FractureSimError):
    pass
