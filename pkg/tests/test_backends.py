import numpy as np
import pytest

from nlmsr import _backend, _pykernels
from nlmsr.kernreg import solve_normal_batch

needs_ext = pytest.mark.skipif("cython" not in _backend.available(), reason="compiled extension not built")


@pytest.fixture
def ext():
    from nlmsr import _kernels

    return _kernels


def test_selection():
    assert "python" in _backend.available()
    prev = _backend.get_backend()
    _backend.set_backend("python")
    assert _backend.kernels() is _pykernels
    _backend.set_backend(prev)
    with pytest.raises(ValueError):
        _backend.set_backend("fortran")


def test_search_offsets():
    offs = _pykernels.search_offsets(2)
    assert len(offs) == 13
    assert all(dy * dy + dx * dx <= 4 for dy, dx in offs)
    assert list(map(tuple, offs)) == sorted(map(tuple, offs))


@needs_ext
@pytest.mark.parametrize("q,r", [(3, 2), (5, 4), (7, 3)])
def test_nlm_agrees(ext, rng, q, r):
    img = rng.uniform(0, 255, (19, 23))
    a = ext.nlm_filter(img, q, r, 30.0, 1.7, 1)
    b = _pykernels.nlm_filter(img, q, r, 30.0, 1.7, 1)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


@needs_ext
@pytest.mark.parametrize("order", [0, 1, 2])
def test_fit_agrees(ext, rng, order):
    img = rng.uniform(0, 255, (17, 14))
    a, na = ext.nonlocal_fit(img, 5, 3, 40.0, 1.5, order, 0.0, 2)
    b, nb = _pykernels.nonlocal_fit(img, 5, 3, 40.0, 1.5, order, 0.0, 1)
    assert na == nb
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


@needs_ext
@pytest.mark.parametrize("order,p", [(0, 2), (1, 2), (2, 2), (2, 3)])
def test_fuse_agrees(ext, rng, order, p):
    frames = rng.uniform(0, 255, (3, 9, 8))
    pilot = rng.uniform(0, 255, (9 * p, 8 * p))
    # unrelated random pilot and frames: sigma_r must be wide enough to keep
    # the weights (and so the systems) well conditioned, or last-bit exp
    # differences get amplified
    a = ext.fuse(pilot, frames, p, 3, 2, 150.0, 1.0, 2.0 * p, order, 0.0, 2)
    b = _pykernels.fuse(pilot, frames, p, 3, 2, 150.0, 1.0, 2.0 * p, order, 0.0, 1)
    assert a[1:] == b[1:]
    np.testing.assert_allclose(a[0], b[0], rtol=0, atol=1e-12)


@needs_ext
def test_ridge_agrees(ext, rng):
    img = rng.uniform(0, 255, (12, 12))
    a, _ = ext.nonlocal_fit(img, 3, 2, 40.0, 1.0, 2, 1e-3, 1)
    b, _ = _pykernels.nonlocal_fit(img, 3, 2, 40.0, 1.0, 2, 1e-3, 1)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_batch_solver_against_lstsq(rng):
    n = 50
    X = rng.uniform(-2, 2, (n, 10, 6))
    w = rng.uniform(0.1, 1, (n, 10))
    y = rng.uniform(0, 255, (n, 10))
    A = np.einsum("nki,nk,nkj->ijn", X, w, X)
    g = np.einsum("nki,nk,nk->in", X, w, y)
    beta, bad = solve_normal_batch(A, g)
    assert not bad.any()
    for t in range(n):
        sw = np.sqrt(w[t])
        ref = np.linalg.lstsq(X[t] * sw[:, None], y[t] * sw, rcond=None)[0]
        np.testing.assert_allclose(beta[:, t], ref, rtol=1e-8, atol=1e-8)


@needs_ext
def test_fuse_agrees_on_synthetic_sequence(ext):
    from nlmsr import scenes
    from nlmsr.imgcore import uniform_kernel
    from nlmsr.superres import initial_estimate, synth_degrade

    seq = synth_degrade(scenes.test_scene(48), 2, uniform_kernel(3), 2.0, 9, seed=7)
    pilot = initial_estimate(seq, 0, 2)
    for order in (0, 1, 2):
        a = ext.fuse(pilot, seq, 2, 5, 3, 20.0, 1.5, 6.0, order, 0.0, 1)
        b = _pykernels.fuse(pilot, seq, 2, 5, 3, 20.0, 1.5, 6.0, order, 0.0, 1)
        assert a[1:] == b[1:]
        np.testing.assert_allclose(a[0], b[0], rtol=0, atol=1e-9)


def test_falls_back_when_extension_missing():
    import subprocess
    import sys

    code = (
        "import sys; sys.modules['nlmsr._kernels'] = None\n"
        "from nlmsr import _backend; print(_backend.get_backend(), _backend.available())"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True).stdout
    assert out.strip() == "python ['python']"
