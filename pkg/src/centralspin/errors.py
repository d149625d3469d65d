"""Exception hierarchy shared by every module of the package."""


class CentralSpinError(Exception):
    """Base class; carries the CLI exit code for numerical guards."""

    exit_code = 3


class ConfigError(CentralSpinError):
    exit_code = 2


class DecoupledModel(CentralSpinError):
    """Raised when the analytic eigensystem is requested at zero coupling."""


class DimensionTooLarge(CentralSpinError):
    pass


class MapSingular(CentralSpinError):
    """The dynamical map is not invertible at time ``t``."""

    def __init__(self, t, reason=""):
        self.t = t
        super().__init__(f"dynamical map singular at t={t!r} {reason}".strip())


class ThetaSingular(CentralSpinError):
    pass


class EigenvalueUnderflow(CentralSpinError):
    pass


class EnergyOutOfRange(CentralSpinError):
    pass


class NotHPTA(CentralSpinError):
    pass


class GridTooCoarse(CentralSpinError):
    pass
