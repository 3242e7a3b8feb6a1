import numpy as np
import pytest

from domgen import tensorio


class TestDtns:
    def test_round_trip_shapes(self, tmp_path):
        rng = np.random.default_rng(0)
        for shape in [(4,), (3, 5), (2, 3, 4), (1, 2, 3, 4)]:
            arr = rng.normal(0, 1, shape).astype(np.float32)
            path = tmp_path / "t.dtns"
            tensorio.write_tensor(path, arr)
            back = tensorio.read_tensor(path)
            assert back.shape == shape
            assert np.allclose(back, arr, atol=1e-7)

    def test_header_layout(self):
        blob = tensorio.tensor_to_bytes(np.zeros((2, 3), dtype=np.float32))
        assert blob[:4] == b"DTNS"
        assert blob[4] == 1  # version
        assert blob[5] == 2  # rank
        dims = np.frombuffer(blob[6:14], dtype="<u4")
        assert list(dims) == [2, 3]
        assert len(blob) == 14 + 4 * 6

    def test_float32_quantization(self):
        arr = np.array([1.0 + 1e-12, np.pi])
        back, _ = tensorio.tensor_from_bytes(tensorio.tensor_to_bytes(arr))
        assert np.allclose(back, arr, atol=1e-6)

    def test_stack_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        tensors = [rng.normal(0, 1, (2, 3)), rng.normal(0, 1, (4,)), rng.normal(0, 1, (1, 1, 5))]
        path = tmp_path / "stack.dtns"
        tensorio.write_tensor_stack(path, tensors)
        back = tensorio.read_tensor_stack(path)
        assert len(back) == 3
        for orig, restored in zip(tensors, back):
            assert restored.shape == orig.shape
            assert np.allclose(restored, orig, atol=1e-6)

    def test_bad_magic(self):
        with pytest.raises(ValueError):
            tensorio.tensor_from_bytes(b"NOPE" + bytes(20))

    def test_truncated(self):
        blob = tensorio.tensor_to_bytes(np.ones((4, 4)))
        with pytest.raises(ValueError):
            tensorio.tensor_from_bytes(blob[:-8])

    def test_rank_zero_rejected(self):
        with pytest.raises(ValueError):
            tensorio.tensor_to_bytes(np.float64(3.0))

    def test_deterministic_bytes(self):
        arr = np.linspace(0, 1, 12).reshape(3, 4)
        assert tensorio.tensor_to_bytes(arr) == tensorio.tensor_to_bytes(arr.copy())


class TestPng:
    def test_round_trip_rgb(self, tmp_path):
        rng = np.random.default_rng(2)
        img = rng.uniform(0, 1, (9, 7, 3))
        path = tmp_path / "img.png"
        tensorio.write_png(path, img)
        back = tensorio.read_png(path)
        assert back.shape == (9, 7, 3)
        # 8-bit quantization: half a step of 1/255
        assert np.abs(back - img).max() <= 0.5 / 255 + 1e-12

    def test_round_trip_gray(self, tmp_path):
        rng = np.random.default_rng(3)
        img = rng.uniform(0, 1, (5, 6, 1))
        path = tmp_path / "gray.png"
        tensorio.write_png(path, img)
        back = tensorio.read_png(path)
        assert back.shape == (5, 6, 1)
        assert np.abs(back - img).max() <= 0.5 / 255 + 1e-12

    def test_write_clamps(self, tmp_path):
        img = np.array([[[-0.2, 0.5, 1.3]]])
        path = tmp_path / "clamp.png"
        tensorio.write_png(path, img)
        back = tensorio.read_png(path)
        assert back[0, 0, 0] == 0.0
        assert back[0, 0, 2] == 1.0

    def test_deterministic_bytes(self, tmp_path):
        rng = np.random.default_rng(4)
        img = rng.uniform(0, 1, (8, 8, 3))
        p1, p2 = tmp_path / "a.png", tmp_path / "b.png"
        tensorio.write_png(p1, img)
        tensorio.write_png(p2, img)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_shape_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            tensorio.write_png(tmp_path / "bad.png", np.zeros((4, 4, 2)))
