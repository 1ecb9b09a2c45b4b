"""Pure numpy versions of the compiled kernels.

Banded density matrices
-----------------------
``R[i, K + k, a, b] = rho[(i, a), (i + k, b)]`` for field indices ``i`` and
offsets ``|k| <= K``; ``a``, ``b`` are atom indices.  Entries whose column
field index ``i + k`` falls outside ``[0, N_f)`` are kept at zero.

The interaction Hamiltonian is ``g X (x) Y`` with

    X = ca d + conj(ca) d^+,   Y = cf f + conj(cf) f^+

so ``ca = exp(-i Omega t)`` and ``cf = exp(-i omega t)`` in the interaction
picture.
"""
from __future__ import annotations

import numpy as np


def _apply_x_left(R, ca, sq_d):
    # (X M)[a, b] = sqrt(a+1) ca M[a+1, b] + sqrt(a) conj(ca) M[a-1, b]
    out = np.zeros_like(R)
    out[..., :-1, :] += ca * sq_d[1:, None] * R[..., 1:, :]
    out[..., 1:, :] += np.conj(ca) * sq_d[1:, None] * R[..., :-1, :]
    return out


def _apply_x_right(R, ca, sq_d):
    # (M X)[a, b] = sqrt(b) ca M[a, b-1] + sqrt(b+1) conj(ca) M[a, b+1]
    out = np.zeros_like(R)
    out[..., :, 1:] += ca * sq_d[None, 1:] * R[..., :, :-1]
    out[..., :, :-1] += np.conj(ca) * sq_d[None, 1:] * R[..., :, 1:]
    return out


def band_mask(N_f: int, K: int) -> np.ndarray:
    i = np.arange(N_f)[:, None]
    j = i + np.arange(-K, K + 1)[None, :]
    return (j >= 0) & (j < N_f)


def liouvillian_band(R: np.ndarray, g: float, ca: complex, cf: complex, out: np.ndarray | None = None):
    """``-i [H_I, rho]`` in banded storage, truncated to the band."""
    N, W, Nd, _ = R.shape
    K = (W - 1) // 2
    sq_d = np.sqrt(np.arange(Nd, dtype=float))
    sq_f = np.sqrt(np.arange(N + 1, dtype=float))
    i = np.arange(N)
    j = i[:, None] + np.arange(-K, K + 1)[None, :]
    jc = np.clip(j, 0, N)

    XR = _apply_x_left(R, ca, sq_d)
    RX = _apply_x_right(R, ca, sq_d)
    acc = np.zeros_like(R)
    # H rho: Y[i, i+1] = sqrt(i+1) cf, Y[i, i-1] = sqrt(i) conj(cf)
    acc[:-1, 1:] += (cf * sq_f[1:N])[:, None, None, None] * XR[1:, :-1]
    acc[1:, :-1] += (np.conj(cf) * sq_f[1:N])[:, None, None, None] * XR[:-1, 1:]
    # rho H: Y[j+1, j] = sqrt(j+1) conj(cf), Y[j-1, j] = sqrt(j) cf
    acc[:, :-1] -= (np.conj(cf) * sq_f[np.clip(jc[:, :-1] + 1, 0, N)])[..., None, None] * RX[:, 1:]
    acc[:, 1:] -= (cf * sq_f[jc[:, 1:]])[..., None, None] * RX[:, :-1]
    acc *= -1j * g
    acc[~band_mask(N, K)] = 0
    if out is not None:
        out[...] = acc
        return out
    return acc


def band_populations(R: np.ndarray) -> np.ndarray:
    """Diagonal of ``rho`` reshaped to ``(N_f, N_d)``."""
    K = (R.shape[1] - 1) // 2
    return np.real(np.einsum("iaa->ia", R[:, K]))
