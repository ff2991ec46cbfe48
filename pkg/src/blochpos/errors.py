"""Exception hierarchy shared by all blochpos modules.

Each error carries a short ``slug`` used in CLI diagnostics and an
``exit_code`` consumed by the command-line front end:

  2  configuration problems (bad file, unknown key, missing block)
  3  precondition violations (bad argument, zone boundary, truncation)
  4  numerical failures discovered during computation
  5  self-check disagreement between independent routes
"""


class BlochPosError(Exception):
    slug = "error"
    exit_code = 1


class ConfigError(BlochPosError):
    slug = "config-error"
    exit_code = 2


class InvalidArgumentError(BlochPosError):
    slug = "invalid-argument"
    exit_code = 3


class ZoneBoundaryError(InvalidArgumentError):
    slug = "zone-boundary-excluded"


class TruncationError(InvalidArgumentError):
    slug = "truncation-too-small"


class SupportViolationError(InvalidArgumentError):
    slug = "support-violation"


class FoldingSeamError(InvalidArgumentError):
    slug = "folding-seam"


class WrongOperationError(InvalidArgumentError):
    slug = "wrong-operation"


class NyquistError(InvalidArgumentError):
    slug = "nyquist-violation"


class NumericalFailureError(BlochPosError):
    slug = "numerical-failure"
    exit_code = 4


class DegenerateBandsError(NumericalFailureError):
    slug = "degenerate-bands"


class BandOverlapError(NumericalFailureError):
    slug = "band-overlap"


class WindowDeficitError(NumericalFailureError):
    slug = "window-deficit"


class SelfCheckError(BlochPosError):
    slug = "self-check-failed"
    exit_code = 5
