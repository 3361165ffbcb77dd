"""Exception hierarchy shared by all lipfree modules."""


class LipfreeError(Exception):
    """Base class for every error raised by the package."""


class StructureError(LipfreeError):
    """Malformed input: non-square matrix, mismatched spaces, unknown point."""


class DegenerateMoleculeError(LipfreeError):
    pass


class PreconditionError(LipfreeError):
    """A stated hypothesis of an operation does not hold.

    ``hypothesis`` names the failed condition so callers (and the CLI) can
    report it verbatim.
    """

    def __init__(self, hypothesis, detail=""):
        self.hypothesis = hypothesis
        self.detail = detail
        msg = hypothesis if not detail else f"{hypothesis}: {detail}"
        super().__init__(msg)


class LipschitzViolation(PreconditionError):
    def __init__(self, pair, ratio, bound):
        self.pair = pair
        self.ratio = ratio
        self.bound = bound
        super().__init__(
            "partial function is not L-Lipschitz",
            f"pair {pair} has ratio {ratio!r} > L={bound!r}",
        )


class DisconnectedError(LipfreeError):
    pass


class ContradictionDiagnostic(LipfreeError):
    """molecule_filter reached the branch that is impossible for valid inputs."""

    def __init__(self, j_mass, threshold, detail=""):
        self.j_mass = j_mass
        self.threshold = threshold
        super().__init__(
            f"dropped mass {j_mass!r} exceeds {threshold!r}; input is not "
            f"near-square or the discretization is too coarse. {detail}".strip()
        )


class ResolutionError(LipfreeError):
    """The discretized space is too coarse for a requested construction."""


class VerificationError(LipfreeError):
    """A numerical verification failed; the CLI maps this to exit code 2."""
