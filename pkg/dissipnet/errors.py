class DissipnetError(Exception):
    pass


class ConfigError(DissipnetError, ValueError):
    pass


class InvalidStateError(DissipnetError, ValueError):
    pass


class SolverError(DissipnetError, RuntimeError):
    pass


class DegenerateSteadyStateError(SolverError):
    def __init__(self, kernel_dim: int):
        super().__init__(f"Steady state is not unique: {kernel_dim} eigenvalues in the Liouvillian kernel")
        self.kernel_dim = kernel_dim


class ConvergenceTimeoutError(SolverError):
    def __init__(self, horizon: float, last_distance: float):
        super().__init__(f"Not converged within horizon {horizon:.6g}, last trace distance {last_distance:.3e}")
        self.horizon = horizon
        self.last_distance = last_distance


class IllConditionedNetworkError(SolverError):
    def __init__(self, condition_number: float):
        super().__init__(f"Network loop matrix is ill-conditioned (condition number {condition_number:.3e})")
        self.condition_number = condition_number


class EliminationInvalidError(SolverError):
    def __init__(self, ratio: float):
        super().__init__(f"Adiabatic elimination invalid: dispersive ratio {ratio:.3f} >= 1")
        self.ratio = ratio
