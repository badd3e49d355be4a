import json

import numpy as np
import pytest

import rtmri

SMALL = {
    "acquisition": {"base_resolution": 32, "frames": 5, "seed": 4},
    "coils": {"ring": {"count": 4}},
    "reconstruct": {"virtual_channels": 3},
}


@pytest.fixture(scope="module")
def dataset():
    return rtmri.simulate(SMALL)


def test_default_config_is_json():
    cfg = json.loads(rtmri.default_config())
    assert cfg["acquisition"]["spokes_per_frame"] == 9
    assert cfg["reconstruct"]["method"] == "ame"


def test_simulate_shapes(dataset):
    m = dataset.manifest
    assert (m["frames"], m["coils"], m["samples_per_spoke"]) == (5, 4, 64)
    assert dataset.samples(0).shape == (4, 9 * 64)
    assert dataset.trajectory(0).shape == (9 * 64, 2)
    assert dataset.truth.shape == (5, 32, 32)
    assert np.all(np.abs(dataset.trajectory(2)) <= 0.5)


def test_round_trip(dataset, tmp_path):
    rtmri.write_dataset(tmp_path / "ds", dataset)
    back = rtmri.read_dataset(tmp_path / "ds")
    assert back.manifest == dataset.manifest
    np.testing.assert_array_equal(back.samples(3), dataset.samples(3).astype(np.complex64))


def test_nufft_adjoint_pair():
    rng = np.random.default_rng(0)
    img = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    k = rng.uniform(-0.5, 0.5, size=(200, 2))
    y = rng.standard_normal(200) + 1j * rng.standard_normal(200)
    lhs = np.vdot(y, rtmri.nufft_forward(img, k))
    rhs = np.vdot(rtmri.nufft_adjoint(y, k, 16), img)
    assert abs(lhs - rhs) < 1e-10 * abs(lhs)
    x = np.arange(16) - 8
    direct = np.exp(-2j * np.pi * (k[:, :1] * x[None, :])[:, None, :] - 2j * np.pi * (k[:, 1:] * x[None, :])[:, :, None])
    exact = (direct * img[None]).sum(axis=(1, 2))
    err = np.linalg.norm(rtmri.nufft_forward(img, k, 8, np.pi * np.sqrt(16 * 2.25 - 0.8), 2.0) - exact) / np.linalg.norm(exact)
    assert err < 1e-5


@pytest.mark.parametrize("method", ["nlinv", "nlinv-med", "ame"])
def test_reconstruct(dataset, method):
    cfg = dict(SMALL, reconstruct={"method": method, "virtual_channels": 3})
    out = rtmri.reconstruct(dataset, cfg)
    assert out["images"].shape == (5, 32, 32)
    assert out["failures"] == []
    assert out["virtual_channels"] == 3
    assert 0.5 < out["retained_energy"] <= 1.0
    report = rtmri.metrics(out["images"], dataset.truth)
    assert len(report["roi_rmse"]) == 5
    assert max(report["roi_rmse"]) < 0.6
    assert report["profile"].shape == (32, 5)


def test_pca_energies_nonincreasing(dataset):
    e = rtmri.pca_energies(dataset, 4)["energies"]
    assert all(a >= b for a, b in zip(e, e[1:]))


def test_flow_and_warp():
    y, x = np.mgrid[0:48, 0:48]
    a = np.exp(-((x - 22.0) ** 2 + (y - 24.0) ** 2) / 50.0)
    b = np.exp(-((x - 21.0) ** 2 + (y - 24.0) ** 2) / 50.0)
    ux, uy = rtmri.estimate_motion(a, b)
    inside = a > 0.1
    assert np.mean(np.hypot(ux[inside] - 1.0, uy[inside])) < 0.3
    warped = rtmri.warp(a.astype(complex), ux, uy)
    assert np.abs(warped.real - b)[inside].max() < 0.05


def test_metrics_and_median():
    series = np.ones((4, 16, 16), dtype=complex)
    assert rtmri.metrics(series)["temporal_sharpness"] == 0.0
    np.testing.assert_array_equal(rtmri.temporal_median(series, 1), series)


def test_errors(dataset):
    with pytest.raises(rtmri.ConfigError):
        rtmri.simulate({"acquisition": {"frames": 0}})
    with pytest.raises(rtmri.ConfigError):
        rtmri.reconstruct(dataset, {"reconstruct": {"method": "sense"}})
    with pytest.raises(ValueError):
        rtmri.pca_energies(dataset, 9)
    with pytest.raises(OSError):
        rtmri.read_dataset("/nonexistent/dataset")
