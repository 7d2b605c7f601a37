"""Exception hierarchy shared by all voxmeet subsystems."""


class VoxmeetError(Exception):
    """Base class for every error raised by this package."""


# --- capture ---------------------------------------------------------------

class DimensionError(VoxmeetError):
    """Image or camera dimensions do not agree."""


class InvalidTransform(VoxmeetError):
    """A 4x4 matrix is not a rigid transform (orthonormal rotation, det +1)."""


class EmptyInput(VoxmeetError):
    """An operation that needs at least one element got none."""


class FusionMismatch(VoxmeetError):
    """Frames offered for fusion do not share source or capture time."""


# --- codec -----------------------------------------------------------------

class EmptyFrame(VoxmeetError):
    """Operation requires a non-empty point cloud."""


class BitstreamError(VoxmeetError):
    """Malformed encoded payload. ``offset`` is the failing byte position."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class HeaderError(VoxmeetError):
    """Encoded-frame header disagrees with its payload."""


class SizeError(VoxmeetError):
    """Requested more elements than the container holds."""


# --- wire ------------------------------------------------------------------

class PayloadTooLarge(VoxmeetError):
    """Message payload exceeds the 16 MiB framing limit."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(message)
        self.offset = offset


class FrameError(VoxmeetError):
    """Byte stream does not start with a valid frame. ``offset`` marks where."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class ProtocolError(VoxmeetError):
    """Frame is structurally sound but semantically unsupported."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class NeedMoreData(VoxmeetError):
    """Buffer holds only a frame prefix; ``needed`` more bytes at minimum."""

    def __init__(self, needed: int):
        super().__init__(f"need at least {needed} more bytes")
        self.needed = needed


# --- orchestrator ----------------------------------------------------------

class ConfigError(VoxmeetError):
    """Configuration value outside its allowed range."""


class NoSuchSession(VoxmeetError):
    """Session id is unknown (never created, or already destroyed)."""


class SessionFull(VoxmeetError):
    """Session already holds max_members."""


class AlreadyJoined(VoxmeetError):
    """Member id is already present in the session."""


class NotAMember(VoxmeetError):
    """Sender is not a member of the addressed session."""


# --- harness ---------------------------------------------------------------

class ScenarioError(VoxmeetError):
    """Scenario could not be brought up or completed."""


class NoData(VoxmeetError):
    """A statistic was requested over an empty measurement set."""


class IoError(VoxmeetError):
    """Report files could not be written or read."""
