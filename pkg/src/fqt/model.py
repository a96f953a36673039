"""Physical parameters and bath spectral functions of the three-qubit transistor.

Natural units are used throughout: hbar = k_B = 1.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# beyond this |omega/T| the Bose factor is replaced by its asymptotic form
_EXP_GUARD = 700.0


@dataclass(frozen=True)
class SystemParams:
    """Energy scales, bath temperatures and coupling of the transistor.

    The degenerate working point is built in: omega_E = omega_C = omega_CE = 0
    and omega_EB = omega_BC = delta.  ``tb_zero`` selects the analytic
    T_B -> 0 limit, in which case ``t_b`` is ignored.
    """

    delta: float = 1.0
    t_e: float = 0.2
    t_b: float = 0.1
    t_c: float = 0.02
    kappa: float = 1.0
    omega0: float = 0.0
    tb_zero: bool = False

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError(f"delta must be positive, got {self.delta}")
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if not (self.t_e > 0 and self.t_c > 0):
            raise DomainError("bath temperatures must be positive")
        if not self.tb_zero and not self.t_b > 0:
            raise DomainError("t_b must be positive unless tb_zero is set")

    def temperature(self, bath):
        return {"E": self.t_e, "B": 0.0 if self.tb_zero else self.t_b, "C": self.t_c}[bath]

    def replace(self, **changes):
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return SystemParams(**fields)


def thermal_occupancy(omega, t):
    """Bose-Einstein occupancy 1/(exp(omega/t) - 1).

    Negative frequencies give n(-w) = -(1 + n(w)).
    """
    if omega == 0:
        raise DomainError("occupancy diverges at omega = 0")
    if not t > 0:
        raise DomainError(f"temperature must be positive, got {t}")
    x = omega / t
    if x > _EXP_GUARD:
        return float(np.exp(-x))
    if x < -_EXP_GUARD:
        return -1.0 - float(np.exp(x))
    return float(1.0 / np.expm1(x))


def spectral_function(omega, t, kappa=1.0, zero_t=False):
    """Ohmic bath rate G(omega) = kappa * omega * (1 + n(omega)).

    With ``zero_t`` the T -> 0 limit is returned: kappa*omega for emission
    (omega > 0) and nothing for absorption.
    """
    if zero_t:
        return kappa * omega if omega > 0 else 0.0
    if omega < 0:
        # omega*(1 + n(omega)) = |omega|*n(|omega|), without the cancellation
        return -kappa * omega * thermal_occupancy(-omega, t)
    return kappa * omega * (1.0 + thermal_occupancy(omega, t))
