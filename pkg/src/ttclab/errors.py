"""Exception types shared across the toolkit."""


class TtclabError(Exception):
    """Base class for all toolkit errors."""


class GenerationExhausted(TtclabError):
    """Rejection sampling failed to produce a valid polygon.

    Raised after the attempt budget is spent; usually signals a pathological
    generator configuration (e.g. spikiness 1.0 with 12 vertices).
    """


class PairConstructionFailed(TtclabError):
    """A matched concave/convex pair could not be built for the requested kinematics."""


class NoCollision(TtclabError):
    """Exact-geometry sweep found no contact for any t >= 0."""


class NoCollisionWithinHorizon(TtclabError):
    """Mask sweep found no overlap within the frame horizon."""

    def __init__(self, horizon_frames: int):
        self.horizon_frames = horizon_frames
        super().__init__(f"no overlap within {horizon_frames} frames")


class TooFewObjects(TtclabError):
    """Fewer than two connected components where two objects were expected."""


class EmptyMask(TtclabError):
    """Operation requires at least one set pixel."""


class SchemaError(TtclabError):
    """Input file does not match its documented schema."""


class UnknownVideo(TtclabError):
    """A response row references a video id absent from the metadata."""


class MissingCell(TtclabError):
    """A (tau, condition) aggregation cell has no videos."""


class EmptyIntersection(TtclabError):
    """Model and human tables share no ground-truth TTC values."""


class TooFewPoints(TtclabError):
    """U-shape detection needs at least three sweep points."""
