"""Kernel backend selection and numba/numpy agreement."""

import subprocess
import sys

import numpy as np
import pytest

from pepslab import backend
from pepslab.contraction import peps_norm
from pepslab.network import random_network

from oracles import count_tilings_python, random_tileset


@pytest.fixture(autouse=True)
def _restore_backend():
    yield
    backend.set_backend("auto")


def test_set_backend_roundtrip():
    assert backend.set_backend("numpy") == "numpy"
    assert backend.backend_name() == "numpy"
    assert backend.set_backend("numba") == "numba"
    assert backend.backend_name() == "numba"
    # numba is installed here, so auto resolves to it
    assert backend.set_backend("auto") == "numba"


def test_set_backend_rejects_unknown_name():
    with pytest.raises(ValueError, match="unknown backend"):
        backend.set_backend("cuda")
    # failed call leaves the previous selection in place
    assert backend.backend_name() in ("numba", "numpy")


@pytest.mark.parametrize("shape", [(4, 4, 4), (3, 7, 2), (1, 5, 6)])
def test_matmul_backends_agree_with_numpy_operator(shape):
    m, k, n = shape
    rng = np.random.default_rng(11)
    a = rng.normal(size=(m, k)) + 1j * rng.normal(size=(m, k))
    b = rng.normal(size=(k, n)) + 1j * rng.normal(size=(k, n))
    backend.set_backend("numba")
    out_nb = backend.matmul(a, b)
    backend.set_backend("numpy")
    out_np = backend.matmul(a, b)
    np.testing.assert_allclose(out_nb, a @ b, atol=1e-13)
    np.testing.assert_allclose(out_np, a @ b, atol=1e-13)


def test_matmul_rejects_shape_mismatch():
    with pytest.raises(ValueError, match="shape mismatch"):
        backend.matmul(np.zeros((2, 3)), np.zeros((2, 3)))
    with pytest.raises(ValueError, match="shape mismatch"):
        backend.matmul(np.zeros(4), np.zeros(4))


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_count_tilings_backends_match_python_anchor(seed):
    ts = random_tileset(seed, count=3, colors=2)
    sides = np.array(ts.tiles, dtype=np.int64)
    args = (sides[:, 0], sides[:, 1], sides[:, 2], sides[:, 3], 2, 3)
    backend.set_backend("numba")
    n_nb = backend.count_tilings(*args)
    backend.set_backend("numpy")
    n_np = backend.count_tilings(*args)
    assert n_nb == n_np == count_tilings_python(ts, 2, 3)


def test_count_tilings_open_boundary_differs_from_torus():
    # single tile with mismatched opposite edges: open strip tiles, torus does not
    left = np.array([0])
    top = np.array([0])
    right = np.array([1])
    bottom = np.array([0])
    for name in ("numba", "numpy"):
        backend.set_backend(name)
        assert backend.count_tilings(left, top, right, bottom, 1, 2, periodic=False) == 0
        assert backend.count_tilings(left, top, right, bottom, 1, 1, periodic=False) == 1
        assert backend.count_tilings(left, top, right, bottom, 1, 1, periodic=True) == 0


def test_peps_norm_agrees_across_backends():
    net = random_network(4, 4, bond_dim=2, delta=0.7, seed=9)
    backend.set_backend("numba")
    n_nb = peps_norm(net)
    backend.set_backend("numpy")
    n_np = peps_norm(net)
    assert n_nb == pytest.approx(n_np, rel=1e-12)


@pytest.mark.parametrize("name", ["numpy", "numba"])
def test_env_var_selects_backend_at_import(name):
    code = "import pepslab; print(pepslab.backend_name())"
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"PEPSLAB_BACKEND": name, "PATH": "/usr/bin:/bin"},
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == name


def test_env_var_rejects_unknown_backend_at_import():
    out = subprocess.run(
        [sys.executable, "-c", "import pepslab"],
        capture_output=True,
        text=True,
        env={"PEPSLAB_BACKEND": "gpu", "PATH": "/usr/bin:/bin"},
    )
    assert out.returncode != 0
    assert "unknown backend" in out.stderr
