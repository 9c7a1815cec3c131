"""Dataset and container errors."""


class DataFoundryError(Exception):
    """Base class for dataset generation and file format failures."""

    pass


class IdxFormatError(DataFoundryError):
    """Raised when an IDX file is malformed; carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class ContainerFormatError(DataFoundryError):
    """Raised when a TAGD container is malformed or cannot represent a value."""

    pass


class UnsupportedVersionError(ContainerFormatError):
    """Raised when a TAGD container declares a version this reader does not know."""

    def __init__(self, version: int) -> None:
        super().__init__(f"unsupported TAGD container version {version}")
        self.version = version


class MissingMnistError(DataFoundryError):
    """Raised when the MNIST IDX files needed for TextureMNIST are not available."""

    pass
