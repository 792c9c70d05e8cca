"""Exception taxonomy shared across manipkit modules."""


class ManipkitError(Exception):
    """Base class for all manipkit errors."""


# --- data model / serialization ---------------------------------------------


class ParseError(ManipkitError):
    """Input document (JSON manifest, robot XML, F-CoT text) is malformed."""


class SchemaError(ManipkitError):
    """Document parsed but a required field is missing or has the wrong type."""


class InvariantError(ManipkitError):
    """A validated value violates a structural invariant; message names the field path."""


class IoError(ManipkitError):
    """Filesystem read or write failed."""


class RleError(ManipkitError):
    """Run-length counts are inconsistent with the mask dimensions."""


class EmptyMaskError(ManipkitError):
    """Mask has no foreground pixels."""


# --- kinematics / projection -------------------------------------------------


class CycleError(ManipkitError):
    """Joint graph is not a tree rooted at a single base link."""


class UnknownLinkError(ManipkitError):
    """A joint or keypoint references a link that was never declared."""


class ArityError(ManipkitError):
    """joint_positions length does not match the model's actuated joint count."""


class BehindCameraError(ManipkitError):
    """Point lies at or behind the camera plane (z <= 1e-9)."""


class TooFewVisibleError(ManipkitError):
    """Fewer than two keypoints are visible; no bounding box can be formed."""


# --- calibration --------------------------------------------------------------


class NoSamplesError(ManipkitError):
    """Calibration requested with an empty sample list."""


class DivergenceError(ManipkitError):
    """Calibration objective became non-finite."""


class MaxIterError(ManipkitError):
    """Iteration cap reached before convergence (raised only in strict mode)."""


# --- alignment correction ------------------------------------------------------


class MissingAnnotationError(ManipkitError):
    """An operation needs an annotation the episode does not carry; message names it."""


class OutOfRangeError(ManipkitError):
    """A frame index falls outside the episode's frame range."""


# --- annotation derivation -----------------------------------------------------


class MissingContactError(ManipkitError):
    """Episode has no contact annotation."""


class MissingMaskError(ManipkitError):
    """No (non-empty) object mask at the required frame."""


class NoOverlapError(ManipkitError):
    """No primitive clip overlaps the semantic clip above the threshold."""


class MissingRepresentationError(ManipkitError):
    """A selected F-CoT representation is not derivable at the requested frame."""


# --- vqa factory ----------------------------------------------------------------


class DimMismatchError(ManipkitError):
    """Overlay spec dimensions do not match the target image."""


# --- metrics ---------------------------------------------------------------------


class ShapeError(ManipkitError):
    """Predicted and ground-truth arrays disagree in shape."""


class EmptyError(ManipkitError):
    """Metric input is empty."""


class EmptyTraceError(ManipkitError):
    """DTW input trace has no points."""


class DegenerateRectError(ManipkitError):
    """Rectangle has x2 < x1 or y2 < y1."""


class EmptyReferenceError(ManipkitError):
    """BLEU called with no references."""


class LengthMismatchError(ManipkitError):
    """Paired metric inputs have different lengths."""


# --- pipeline ----------------------------------------------------------------------


class ConfigError(ManipkitError):
    """Run configuration is missing, malformed, or inconsistent."""


class DependencyError(ManipkitError):
    """Run plan stages violate the required ordering."""


class TooFewEpisodesError(ManipkitError):
    """Corpus too small to fill the requested number of QC subsets."""


# --- curation service -----------------------------------------------------------------


class ClientTimeoutError(ManipkitError):
    """External annotation client did not answer in time."""


class StaleRevisionError(ManipkitError):
    """Edit was based on an outdated episode revision."""


class EditSchemaError(ManipkitError):
    """Edit body is missing fields or has the wrong shape for its kind."""
