"""Data foundry package: dataset generators, IDX ingestion and the TAGD container."""

from packages.data_foundry.container import (
    container_read,
    container_write,
    load_bundle,
    save_bundle,
)
from packages.data_foundry.errors import (
    ContainerFormatError,
    DataFoundryError,
    IdxFormatError,
    MissingMnistError,
    UnsupportedVersionError,
)
from packages.data_foundry.idx import find_mnist_files, load_idx, write_idx
from packages.data_foundry.models import (
    NO_CLASS,
    DatasetBundle,
    DatasetKind,
    DatasetMetadata,
    Texture,
    TextureBank,
)
from packages.data_foundry.shapes import (
    MAX_OBJECTS,
    SPRITE_MASKS,
    SPRITES_PER_IMAGE,
    generate_shapes,
    generate_shapes_splits,
    render_sprite_bitmap,
)
from packages.data_foundry.tmnist import (
    generate_textured_mnist,
    generate_textured_mnist_splits,
    shift_mask,
    texture_bank,
)

__all__ = [
    # Models
    "NO_CLASS",
    "DatasetBundle",
    "DatasetKind",
    "DatasetMetadata",
    "Texture",
    "TextureBank",
    # Generators
    "MAX_OBJECTS",
    "SPRITE_MASKS",
    "SPRITES_PER_IMAGE",
    "generate_shapes",
    "generate_shapes_splits",
    "render_sprite_bitmap",
    "generate_textured_mnist",
    "generate_textured_mnist_splits",
    "shift_mask",
    "texture_bank",
    # IDX
    "find_mnist_files",
    "load_idx",
    "write_idx",
    # Container
    "container_read",
    "container_write",
    "load_bundle",
    "save_bundle",
    # Errors
    "ContainerFormatError",
    "DataFoundryError",
    "IdxFormatError",
    "MissingMnistError",
    "UnsupportedVersionError",
]
