import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from berrytherm import _kernels_py, kernels
from berrytherm.core import PhysicalParams
from berrytherm.evolution import band_to_dense, dense_rhs, dense_to_band
from berrytherm.fock import FockSpace

try:
    from berrytherm import _kernels as compiled
except ImportError:  # pragma: no cover - depends on the build
    compiled = None

BACKENDS = [pytest.param(_kernels_py, id="python")]
BACKENDS.append(pytest.param(compiled, id="cython", marks=pytest.mark.skipif(compiled is None, reason="extension not built")))


def random_band(rng, N_f, N_d, K):
    R = rng.normal(size=(N_f, 2 * K + 1, N_d, N_d)) + 1j * rng.normal(size=(N_f, 2 * K + 1, N_d, N_d))
    R[~_kernels_py.band_mask(N_f, K)] = 0
    return R


def dense_reference(R, g, t, Omega, omega):
    N_f, W, N_d, _ = R.shape
    K = (W - 1) // 2
    params = PhysicalParams(g, Omega, omega)
    space = FockSpace(N_f, N_d)
    return dense_to_band(dense_rhs(params, t, band_to_dense(R), space), N_f, N_d, K)


@pytest.mark.parametrize("impl", BACKENDS)
@pytest.mark.parametrize("shape", [(7, 3, 2), (12, 4, 3), (5, 2, 4), (9, 6, 2)])
def test_liouvillian_matches_dense(impl, shape):
    N_f, N_d, K = shape
    rng = np.random.default_rng(sum(shape))
    R = random_band(rng, N_f, N_d, K)
    g, t, Omega, omega = 0.7, 0.31, 1.3, 0.9
    ca, cf = np.exp(-1j * Omega * t), np.exp(-1j * omega * t)
    out = impl.liouvillian_band(R, g, complex(ca), complex(cf), np.empty_like(R))
    np.testing.assert_allclose(out, dense_reference(R, g, t, Omega, omega), atol=1e-12)


@pytest.mark.parametrize("impl", BACKENDS)
def test_populations(impl):
    R = random_band(np.random.default_rng(3), 6, 3, 2)
    np.testing.assert_array_equal(impl.band_populations(R), np.real(np.einsum("iaa->ia", R[:, 2])))


@settings(max_examples=40)
@given(seed=st.integers(0, 2**31), t=st.floats(0, 100), g=st.floats(1e-3, 10))
def test_property_backends_agree(seed, t, g):
    if compiled is None:
        pytest.skip("extension not built")
    R = random_band(np.random.default_rng(seed), 10, 3, 4)
    ca, cf = complex(np.exp(-1j * 1.1 * t)), complex(np.exp(-1j * 0.8 * t))
    a = _kernels_py.liouvillian_band(R, g, ca, cf)
    b = compiled.liouvillian_band(R, g, ca, cf, np.empty_like(R))
    np.testing.assert_allclose(b, a, atol=1e-12 * g * np.abs(R).max() * 10)


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    if compiled is not None:
        assert kernels.BACKEND == "cython"
