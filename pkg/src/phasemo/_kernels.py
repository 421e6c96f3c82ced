"""Hot numeric kernels with optional numba acceleration.

Every kernel has a pure-numpy implementation and, when numba is importable,
an @njit twin.  The active backend is chosen at import time from the
``PHASEMO_NUMBA`` environment variable ("0"/"false"/"off" forces numpy) and
can be switched at runtime with :func:`set_backend` (used by the tests and
the backend benchmark).
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE_VALUES = {"0", "false", "off", "no"}


def _env_wants_numba() -> bool:
    return os.environ.get("PHASEMO_NUMBA", "1").strip().lower() not in _DISABLE_VALUES


try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def _cfr_accumulate_np(steer_phase, delays, gains, freq_offsets):
    # H[k,n,s] = sum_p gains[k,p] * exp(-j*steer_phase[k,p,n]) * exp(-2j*pi*f_s*tau[k,p])
    steer = np.exp(-1j * steer_phase)  # [K,P,N]
    delay = np.exp(-2j * np.pi * delays[:, :, None] * freq_offsets[None, None, :])  # [K,P,S]
    return np.einsum("kp,kpn,kps->kns", gains, steer, delay)


def _apply_per_subcarrier_np(phi, gammas, x):
    # y[n,s,t] = sum_v phi[n,v] * sum_k gammas[s,v,k] * x[k,s,t]
    streams = np.einsum("svk,kst->vst", gammas, x)
    return np.einsum("nv,vst->nst", phi, streams)


def _zoh_hold_np(z, oversample):
    return np.repeat(z, oversample)


def _fps_modulate_np(signal, period):
    reps = signal.shape[0] // period.shape[0]
    return signal * np.tile(period, reps)


# ---------------------------------------------------------------------------
# numba twins
# ---------------------------------------------------------------------------


@njit(cache=True)
def _cfr_accumulate_nb(steer_phase, delays, gains, freq_offsets):  # pragma: no cover - jitted
    K, P, N = steer_phase.shape
    S = freq_offsets.shape[0]
    out = np.zeros((K, N, S), dtype=np.complex128)
    steer = np.empty(N, dtype=np.complex128)
    delay = np.empty(S, dtype=np.complex128)
    for k in range(K):
        for p in range(P):
            for n in range(N):
                steer[n] = np.exp(-1j * steer_phase[k, p, n])
            g = gains[k, p]
            for s in range(S):
                delay[s] = g * np.exp(-2j * np.pi * delays[k, p] * freq_offsets[s])
            for n in range(N):
                a = steer[n]
                for s in range(S):
                    out[k, n, s] += a * delay[s]
    return out


@njit(cache=True)
def _apply_per_subcarrier_nb(phi, gammas, x):  # pragma: no cover - jitted
    N, V = phi.shape
    S, _, K = gammas.shape
    T = x.shape[2]
    out = np.zeros((N, S, T), dtype=np.complex128)
    xs = np.empty((K, T), dtype=np.complex128)
    for s in range(S):
        xs[:, :] = x[:, s, :]
        streams = gammas[s] @ xs  # [V,T]
        out[:, s, :] = phi @ streams
    return out


@njit(cache=True)
def _zoh_hold_nb(z, oversample):  # pragma: no cover - jitted
    n = z.shape[0]
    out = np.empty(n * oversample, dtype=np.complex128)
    for i in range(n):
        for l in range(oversample):
            out[i * oversample + l] = z[i]
    return out


@njit(cache=True)
def _fps_modulate_nb(signal, period):  # pragma: no cover - jitted
    m = period.shape[0]
    out = np.empty_like(signal)
    for i in range(signal.shape[0]):
        out[i] = signal[i] * period[i % m]
    return out


_NUMPY_IMPLS = {
    "cfr_accumulate": _cfr_accumulate_np,
    "apply_per_subcarrier": _apply_per_subcarrier_np,
    "zoh_hold": _zoh_hold_np,
    "fps_modulate": _fps_modulate_np,
}

_NUMBA_IMPLS = {
    "cfr_accumulate": _cfr_accumulate_nb,
    "apply_per_subcarrier": _apply_per_subcarrier_nb,
    "zoh_hold": _zoh_hold_nb,
    "fps_modulate": _fps_modulate_nb,
}

_active = dict(_NUMPY_IMPLS)
_backend_name = "numpy"


def set_backend(name: str) -> str:
    """Select the kernel backend ("numba" or "numpy"); returns the active one.

    Falls back to numpy when numba is unavailable.
    """
    global _active, _backend_name
    if name == "numba" and HAVE_NUMBA:
        _active = dict(_NUMBA_IMPLS)
        _backend_name = "numba"
    elif name in ("numba", "numpy"):
        _active = dict(_NUMPY_IMPLS)
        _backend_name = "numpy"
    else:
        raise ValueError(f"unknown backend {name!r}")
    return _backend_name


def active_backend() -> str:
    return _backend_name


def cfr_accumulate(steer_phase, delays, gains, freq_offsets):
    """Accumulate multipath contributions into a [K,N,S] frequency response."""
    return _active["cfr_accumulate"](
        np.ascontiguousarray(steer_phase, dtype=np.float64),
        np.ascontiguousarray(delays, dtype=np.float64),
        np.ascontiguousarray(gains, dtype=np.complex128),
        np.ascontiguousarray(freq_offsets, dtype=np.float64),
    )


def apply_per_subcarrier(phi, gammas, x):
    """Emit antenna spectra: y[n,s,t] = phi @ gammas[s] @ x[:,s,t] for each s."""
    return _active["apply_per_subcarrier"](
        np.ascontiguousarray(phi, dtype=np.complex128),
        np.ascontiguousarray(gammas, dtype=np.complex128),
        np.ascontiguousarray(x, dtype=np.complex128),
    )


def zoh_hold(z, oversample: int):
    """Hold each sample for `oversample` output samples (zero-order hold)."""
    return _active["zoh_hold"](np.ascontiguousarray(z, dtype=np.complex128), oversample)


def fps_modulate(signal, period):
    """Pointwise-multiply `signal` by the periodic switching waveform `period`."""
    return _active["fps_modulate"](
        np.ascontiguousarray(signal, dtype=np.complex128),
        np.ascontiguousarray(period, dtype=np.complex128),
    )


set_backend("numba" if _env_wants_numba() else "numpy")
