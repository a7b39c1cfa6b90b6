"""Exception types shared across the package."""


class BfsmcError(Exception):
    """Base class for all package errors."""


class DomainError(BfsmcError, ValueError):
    """A parameter lies outside its contractual domain."""


class InfeasibleWeightsError(DomainError):
    """The weight family bottoms out: p + r*kappa <= 0."""


class RejectedPairError(BfsmcError):
    """Gain screen found rho_min <= 0; the gains are too small."""


class InvalidPairError(BfsmcError):
    """A sampled decrease rate rho(z) was non-positive."""


class NumericError(BfsmcError):
    """Root finding or sampling failed to converge."""


class TuningFailureError(BfsmcError):
    """Gain tuning exceeded its retry cap."""


class BarrierBlowupError(BfsmcError):
    """V reached the barrier guard band: V >= bound * (1 - guard)."""

    def __init__(self, bound: float, value: float):
        super().__init__(f"barrier blowup: V={value!r} against bound {bound!r}")
        self.bound = bound
        self.value = value


class BlowupError(BfsmcError):
    """A state component became non-finite during integration."""


class ScenarioError(BfsmcError, ValueError):
    """Scenario file is malformed or violates a module invariant."""

    def __init__(self, message: str, section: str | None = None, key: str | None = None):
        loc = ""
        if section is not None:
            loc = f"[{section}]" + (f" {key}" if key else "")
            message = f"{loc}: {message}"
        super().__init__(message)
        self.section = section
        self.key = key
