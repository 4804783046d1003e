"""Exception types shared across the package."""


class StructDistError(Exception):
    """Base class for all errors raised by this package."""


class InvalidProblem(StructDistError):
    """Malformed input: bad shapes, broken invariants, unparseable documents."""


class UnsupportedInference(StructDistError):
    """The requested quantity cannot be computed exactly for this family."""


class VacuousDistribution(StructDistError):
    """No structure has finite score; the distribution assigns no mass."""


class SamplerStepLimit(StructDistError):
    """A random-walk sampler exceeded its step budget on near-degenerate weights."""


ONE_TO_ONE_REASON = "partition intractable for one-to-one matching"
