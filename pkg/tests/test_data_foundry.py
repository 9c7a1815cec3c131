"""
Tests for dataset generation and file formats.

Tests cover:
- Shapes sprites, determinism and ignore masks
- TextureMNIST composition from synthetic digits
- IDX reading and writing, including malformed files
- The TAGD container and dataset bundles
"""

import gzip
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import synthetic_digits
from packages.autodiff import make_rng
from packages.data_foundry import (
    NO_CLASS,
    SPRITE_MASKS,
    ContainerFormatError,
    DatasetKind,
    IdxFormatError,
    MissingMnistError,
    UnsupportedVersionError,
    container_read,
    container_write,
    find_mnist_files,
    generate_shapes,
    generate_shapes_splits,
    generate_textured_mnist,
    generate_textured_mnist_splits,
    load_bundle,
    load_idx,
    render_sprite_bitmap,
    save_bundle,
    shift_mask,
    texture_bank,
    write_idx,
)


TRIANGLE_UP = (
    "...##...",
    "...##...",
    "..####..",
    "..####..",
    ".######.",
    ".######.",
    "########",
    "########",
)


class TestSprites:
    """8×8 sprite bitmaps."""

    @pytest.mark.parametrize(
        "name,expected",
        [
            ("triangle_up", TRIANGLE_UP),
            ("triangle_down", TRIANGLE_UP[::-1]),
            ("square", ("########",) * 8),
        ],
    )
    def test_bitmap(self, name, expected):
        assert tuple(render_sprite_bitmap(name).splitlines()) == expected

    def test_triangle_down_is_mirrored(self):
        assert np.array_equal(SPRITE_MASKS["triangle_down"], SPRITE_MASKS["triangle_up"][::-1])

    def test_square_is_full(self):
        assert SPRITE_MASKS["square"].all()
        assert SPRITE_MASKS["square"].shape == (8, 8)


class TestShapes:
    """Shapes generation."""

    @pytest.fixture(scope="class")
    def shapes(self):
        return generate_shapes(50, seed=3)

    def test_geometry_and_metadata(self, shapes):
        assert shapes.inputs.shape == (50, 400)
        assert shapes.metadata.kind == DatasetKind.SHAPES
        assert shapes.metadata.mode == "binary"
        assert shapes.metadata.data_mean == pytest.approx(0.26)
        assert not shapes.has_class_labels

    def test_binary_pixels(self, shapes):
        assert set(np.unique(shapes.inputs)) <= {0.0, 1.0}

    def test_labels_follow_pixels(self, shapes):
        assert shapes.labels.max() <= 3
        assert np.array_equal(shapes.labels > 0, shapes.inputs == 1.0)

    def test_background_ignored(self, shapes):
        assert np.all(shapes.ignore[shapes.inputs == 0.0])
        assert not np.all(shapes.ignore)

    def test_mean_intensity_plausible(self, shapes):
        assert 0.2 < shapes.inputs.mean() < 0.4

    def test_same_seed_same_images(self):
        assert np.array_equal(generate_shapes(5, 9).inputs, generate_shapes(5, 9).inputs)
        assert not np.array_equal(generate_shapes(5, 9).inputs, generate_shapes(5, 10).inputs)

    def test_example_independent_of_count(self):
        assert np.array_equal(generate_shapes(3, 4).labels, generate_shapes(6, 4).labels[:3])

    def test_count_must_be_positive(self):
        with pytest.raises(ValueError):
            generate_shapes(0, 1)

    def test_splits(self):
        splits = generate_shapes_splits(1, counts={"train": 4, "test": 2})
        assert splits["train"].count == 4
        assert splits["test"].count == 2
        assert splits["train"].metadata.split == "train"
        assert splits["test"].metadata.seed == 1

    def test_test_split_shares_no_image_with_train(self):
        splits = generate_shapes_splits(0, counts={"train": 300, "test": 100})
        train = {row.tobytes() for row in splits["train"].inputs}
        assert not any(row.tobytes() in train for row in splits["test"].inputs)

    def test_unknown_split_rejected(self):
        with pytest.raises(ValueError):
            generate_shapes(2, 0, split="holdout")

    def test_single_object_has_no_overlaps(self):
        bundle = generate_shapes(20, seed=0, objects=1)
        assert set(np.unique(bundle.labels)) == {0, 1}
        assert np.array_equal(bundle.ignore, bundle.inputs == 0.0)
        assert bundle.metadata.objects == 1

    def test_more_objects(self):
        bundle = generate_shapes(20, seed=0, objects=5)
        assert bundle.labels.max() == 5
        assert all((row == 5).any() for row in bundle.labels)
        assert bundle.metadata.objects == 5

    def test_default_object_count_recorded(self):
        assert generate_shapes(1, seed=0).metadata.objects == 3

    @pytest.mark.parametrize("objects", [0, 256])
    def test_object_count_bounds(self, objects):
        with pytest.raises(ValueError):
            generate_shapes(2, 0, objects=objects)


class TestTexturedMnist:
    """TextureMNIST composition."""

    def test_texture_bank(self):
        bank = texture_bank()
        assert len(bank) == 20
        assert len(set(bank.textures)) == 20
        image = bank.render(7, 1.3, 28, 28)
        assert image.shape == (28, 28)
        assert image.min() >= 0.0
        assert image.max() <= 1.0

    def test_two_digits(self, mnist_arrays):
        images, labels = mnist_arrays
        bundle = generate_textured_mnist(8, 2, images, labels, seed=0)
        assert bundle.inputs.shape == (8, 784)
        assert bundle.metadata.kind == DatasetKind.TMNIST2
        assert bundle.metadata.mode == "continuous"
        assert np.all((bundle.inputs >= 0.0) & (bundle.inputs <= 1.0))
        assert not bundle.ignore.any()
        for row in bundle.class_labels:
            assert row[0] != row[1]
            assert NO_CLASS not in row
        assert set(np.unique(bundle.labels)) <= {0, 1, 2}
        assert (bundle.labels == 2).any()

    def test_one_digit(self, mnist_arrays):
        images, labels = mnist_arrays
        bundle = generate_textured_mnist(5, 1, images, labels, seed=2)
        assert bundle.metadata.kind == DatasetKind.TMNIST1
        assert np.all(bundle.class_labels[:, 1] == NO_CLASS)
        assert set(np.unique(bundle.labels)) == {0, 1}
        assert all(len(classes) == 1 for classes in bundle.class_sets())

    def test_digit_region_matches_threshold(self, mnist_arrays):
        images, labels = mnist_arrays
        bundle = generate_textured_mnist(3, 1, images, labels, seed=5)
        # Bars are 0.9 (inside the digit) with a 0.3 fringe (below the threshold)
        assert all((bundle.labels[i] == 1).sum() == 18 * 4 for i in range(3))

    def test_class_targets(self, mnist_arrays):
        images, labels = mnist_arrays
        bundle = generate_textured_mnist(4, 2, images, labels, seed=1)
        targets = bundle.class_targets()
        np.testing.assert_allclose(targets.sum(axis=1), 1.0)
        for row, classes in zip(targets, bundle.class_labels, strict=True):
            assert row[classes[0]] == 0.5
            assert row[classes[1]] == 0.5

    def test_deterministic(self, mnist_arrays):
        images, labels = mnist_arrays
        a = generate_textured_mnist(3, 2, images, labels, seed=4)
        b = generate_textured_mnist(3, 2, images, labels, seed=4)
        assert np.array_equal(a.inputs, b.inputs)

    def test_missing_digits(self):
        with pytest.raises(MissingMnistError):
            generate_textured_mnist(2, 1, None, None, seed=0)

    def test_bad_digit_count(self, mnist_arrays):
        with pytest.raises(ValueError):
            generate_textured_mnist(2, 3, *mnist_arrays, seed=0)

    def test_two_digits_need_two_classes(self):
        images = np.ones((3, 28, 28))
        with pytest.raises(ValueError):
            generate_textured_mnist(2, 2, images, np.zeros(3, dtype=np.int64), seed=0)

    def test_splits(self, mnist_arrays):
        images, labels = mnist_arrays
        test_images, test_labels = synthetic_digits(10)
        splits = generate_textured_mnist_splits(
            1,
            images,
            labels,
            test_images,
            test_labels,
            seed=0,
            counts={"train": 3, "validation": 2, "test": 2},
            train_split=30,
        )
        assert list(splits) == ["train", "validation", "test"]
        assert [s.metadata.seed for s in splits.values()] == [0, 0, 0]
        assert splits["validation"].count == 2

    def test_test_split_shares_no_image_with_train(self, mnist_arrays):
        images, labels = mnist_arrays
        splits = generate_textured_mnist_splits(
            2,
            images,
            labels,
            images,
            labels,
            seed=0,
            counts={"train": 20, "validation": 5, "test": 20},
            train_split=30,
        )
        train = {row.tobytes() for row in splits["train"].inputs}
        assert not any(row.tobytes() in train for row in splits["test"].inputs)

    def test_digit_count_recorded(self, mnist_arrays):
        assert generate_textured_mnist(2, 2, *mnist_arrays, seed=0).metadata.objects == 2


class TestShiftMask:
    """Mask translation."""

    def test_shift_down_right(self):
        mask = np.zeros((4, 4), dtype=bool)
        mask[0, 0] = True
        shifted = shift_mask(mask, 2, 1)
        assert shifted[2, 1]
        assert shifted.sum() == 1

    def test_leaves_frame(self):
        mask = np.zeros((4, 4), dtype=bool)
        mask[3, 3] = True
        assert not shift_mask(mask, 2, 2).any()

    @given(
        st.integers(min_value=-3, max_value=3),
        st.integers(min_value=-3, max_value=3),
        st.integers(min_value=0, max_value=2**16 - 1),
    )
    @settings(max_examples=50)
    def test_never_adds_pixels(self, rows, cols, seed):
        mask = make_rng(seed).random((6, 6)) < 0.5
        shifted = shift_mask(mask, rows, cols)
        assert shifted.sum() <= mask.sum()
        assert np.array_equal(shift_mask(shifted, -rows, -cols) & mask, shift_mask(shifted, -rows, -cols))


class TestIdx:
    """IDX files."""

    def test_images_scaled(self, tmp_path):
        raw = np.arange(2 * 3 * 3, dtype=np.uint8).reshape(2, 3, 3) * 10
        path = write_idx(tmp_path / "images", raw)
        loaded = load_idx(path)
        assert loaded.shape == (2, 3, 3)
        np.testing.assert_allclose(loaded, raw / 255.0)

    def test_labels_gzip(self, tmp_path):
        path = write_idx(tmp_path / "labels.gz", np.array([3, 1, 4], dtype=np.uint8), compress=True)
        assert path.read_bytes()[:2] == b"\x1f\x8b"
        assert load_idx(path).tolist() == [3, 1, 4]

    def test_unknown_magic(self, tmp_path):
        path = tmp_path / "bad"
        path.write_bytes(struct.pack(">II", 0x00000805, 0))
        with pytest.raises(IdxFormatError) as exc:
            load_idx(path)
        assert exc.value.offset == 0

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "short"
        path.write_bytes(struct.pack(">IIII", 0x00000803, 2, 3, 3) + bytes(10))
        with pytest.raises(IdxFormatError) as exc:
            load_idx(path)
        assert exc.value.offset == 26

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "header"
        path.write_bytes(b"\x00\x00")
        with pytest.raises(IdxFormatError):
            load_idx(path)

    def test_label_out_of_range(self, tmp_path):
        path = write_idx(tmp_path / "labels", np.array([1, 12], dtype=np.uint8))
        with pytest.raises(IdxFormatError) as exc:
            load_idx(path)
        assert exc.value.offset == 9

    def test_only_uint8(self, tmp_path):
        with pytest.raises(ValueError):
            write_idx(tmp_path / "x", np.zeros(3))

    def test_find_files(self, tmp_path):
        images, labels = synthetic_digits(4)
        write_idx(tmp_path / "train-images-idx3-ubyte.gz", (images * 255).astype(np.uint8), compress=True)
        write_idx(tmp_path / "train-labels-idx1-ubyte", labels.astype(np.uint8))
        write_idx(tmp_path / "t10k-images-idx3-ubyte", (images * 255).astype(np.uint8))
        write_idx(tmp_path / "t10k-labels-idx1-ubyte", labels.astype(np.uint8))
        found = find_mnist_files(tmp_path)
        assert found["train_images"].name.endswith(".gz")
        assert load_idx(found["test_labels"]).tolist() == labels.tolist()

    def test_find_files_missing(self, tmp_path):
        with pytest.raises(MissingMnistError, match="train-images"):
            find_mnist_files(tmp_path)


class TestContainer:
    """TAGD containers."""

    def test_arrays_and_metadata(self, tmp_path):
        path = container_write(
            tmp_path / "c.tagd",
            {"mask": np.array([True, False]), "values": np.linspace(0, 1, 6).reshape(2, 3)},
            {"artifact": "test", "note": "ünïcode"},
        )
        arrays, metadata = container_read(path)
        assert list(arrays) == ["mask", "values"]
        assert arrays["mask"].dtype == np.uint8
        assert arrays["values"].shape == (2, 3)
        assert metadata["note"] == "ünïcode"

    def test_header_layout(self, tmp_path):
        path = container_write(tmp_path / "c.tagd", {"a": np.zeros(2, dtype=np.uint8)})
        data = path.read_bytes()
        assert data[:4] == b"TAGD"
        assert struct.unpack("<II", data[4:12]) == (1, 1)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "x.tagd"
        path.write_bytes(b"NOPE" + bytes(8))
        with pytest.raises(ContainerFormatError):
            container_read(path)

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "v2.tagd"
        path.write_bytes(b"TAGD" + struct.pack("<II", 2, 0) + struct.pack("<I", 0))
        with pytest.raises(UnsupportedVersionError) as exc:
            container_read(path)
        assert exc.value.version == 2

    def test_truncated(self, tmp_path):
        path = container_write(tmp_path / "c.tagd", {"a": np.ones(10)})
        path.write_bytes(path.read_bytes()[:40])
        with pytest.raises(ContainerFormatError, match="truncated"):
            container_read(path)

    def test_unsupported_dtype(self, tmp_path):
        with pytest.raises(ContainerFormatError):
            container_write(tmp_path / "c.tagd", {"a": np.ones(3, dtype=np.int32)})

    def test_non_ascii_name(self, tmp_path):
        with pytest.raises(ContainerFormatError):
            container_write(tmp_path / "c.tagd", {"ä": np.ones(3)})

    def test_bundle_round_trip(self, tmp_path, mnist_arrays):
        bundle = generate_textured_mnist(3, 2, *mnist_arrays, seed=0, split="test")
        loaded = load_bundle(save_bundle(tmp_path / "tm.tagd", bundle))
        assert loaded.metadata == bundle.metadata
        assert np.array_equal(loaded.inputs, bundle.inputs)
        assert np.array_equal(loaded.class_labels, bundle.class_labels)
        assert loaded.ignore.dtype == bool

    def test_bundle_rejects_other_artifacts(self, tmp_path):
        path = container_write(tmp_path / "c.tagd", {"inputs": np.ones((1, 2))}, {"artifact": "checkpoint"})
        with pytest.raises(ContainerFormatError, match="dataset"):
            load_bundle(path)

    def test_bundle_missing_entry(self, tmp_path):
        shapes = generate_shapes(2, 0)
        metadata = {"artifact": "dataset", **shapes.metadata.model_dump(mode="json")}
        path = container_write(tmp_path / "c.tagd", {"inputs": shapes.inputs}, metadata)
        with pytest.raises(ContainerFormatError, match="labels"):
            load_bundle(path)

    def test_gzip_is_not_a_container(self, tmp_path):
        path = tmp_path / "c.tagd"
        path.write_bytes(gzip.compress(b"TAGD"))
        with pytest.raises(ContainerFormatError):
            container_read(path)
