"""Exception hierarchy; every error knows the CLI exit code it maps to"""

from typing import Tuple


class LabError(Exception):
    """Base class for laboratory errors"""

    exit_code = 1


class ConfigError(LabError):
    """Invalid configuration or command-line usage"""

    exit_code = 2


class DomainError(LabError, ValueError):
    """Argument outside the domain of a function"""

    exit_code = 2


class CoexistenceError(LabError):
    """Two equal-depth global minimizers: the caller has to condition on a phase"""

    exit_code = 3

    def __init__(self, K: float, J: float, minimizers: Tuple[float, ...]) -> None:
        self.K = K
        self.J = J
        self.minimizers = minimizers
        listed = ", ".join(f"{m:.12g}" for m in minimizers)
        super().__init__(
            f"(K={K:g}, J={J:g}) lies on the coexistence curve, phases {listed}; "
            "condition on a neighbourhood of one phase"
        )

    def __reduce__(self) -> Tuple[type, Tuple[float, float, Tuple[float, ...]]]:
        return type(self), (self.K, self.J, self.minimizers)


class CriticalPointError(LabError):
    """The critical point (K, J) = (0, 1) has no Gaussian scaling"""

    exit_code = 3

    def __init__(self) -> None:
        super().__init__("(K, J) = (0, 1) is the critical point; use the quartic scaling S_n/n^(3/4)")

    def __reduce__(self) -> Tuple[type, Tuple[()]]:
        return type(self), ()


class EmptyConditionError(LabError):
    """Conditioning set carries no mass of the law"""

    exit_code = 4


class NoCoexistenceError(LabError):
    """No positive local minimizer of phi anywhere in the J-bracket"""

    exit_code = 4


class BracketError(LabError):
    """Bisection bracket has no sign change or the bracket function is not monotone"""

    exit_code = 4


class IntegrabilityError(LabError):
    """exp(-G) is not integrable or the quadrature guard failed"""

    exit_code = 4
