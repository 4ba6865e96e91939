"""Variational mode decomposition.

The signal is mirror-extended to twice its length and moved to the
frequency domain with a real FFT, so every update below runs on the
positive half-spectrum ``0 .. 0.5`` cycles/sample. Modes are updated one
at a time with the freshest estimates of the others (Gauss-Seidel), then
the center frequencies and the Lagrange multiplier.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

_DENOM_FLOOR = 1e-30


class VmdError(RuntimeError):
    """Decomposition diverged or was given unusable input."""


class OmegaInit(str, enum.Enum):
    UNIFORM = "uniform-spaced"
    ZERO = "zero"


@dataclass(frozen=True)
class VmdConfig:
    mode_count: int = 7
    bandwidth_penalty: float = 2000.0
    ascent_rate: float = 0.1
    tolerance: float = 1e-7
    max_iterations: int = 500
    omega_init: OmegaInit = OmegaInit.UNIFORM

    def __post_init__(self):
        object.__setattr__(self, "omega_init", OmegaInit(self.omega_init))
        if self.mode_count < 1:
            raise ValueError("mode_count must be >= 1")
        if not self.bandwidth_penalty > 0:
            raise ValueError("bandwidth_penalty must be > 0")
        if self.ascent_rate < 0:
            raise ValueError("ascent_rate must be >= 0")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class ModeSet:
    """Time-domain modes (K x T) ordered by ascending center frequency."""

    modes: np.ndarray
    center_frequencies: np.ndarray
    iterations_used: int
    final_update_norm: float
    residual: float = float("nan")
    spectra: np.ndarray | None = None

    @property
    def mode_count(self) -> int:
        return self.modes.shape[0]


def mirror_extend(signal) -> np.ndarray:
    """Reflect the first and second halves of ``signal`` onto its ends.

    >>> mirror_extend([1, 2, 3, 4]).tolist()
    [2.0, 1.0, 1.0, 2.0, 3.0, 4.0, 4.0, 3.0]
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise VmdError("mirror_extend needs a 1-D signal with at least 2 samples")
    half = x.size // 2
    return np.concatenate([x[:half][::-1], x, x[half:][::-1]])


def dft(signal) -> np.ndarray:
    """Unitary DFT of arbitrary length."""
    return np.fft.fft(np.asarray(signal), norm="ortho")


def idft(spectrum) -> np.ndarray:
    return np.fft.ifft(np.asarray(spectrum), norm="ortho")


def _initial_omegas(config: VmdConfig) -> np.ndarray:
    k = config.mode_count
    if config.omega_init is OmegaInit.ZERO:
        return np.zeros(k)
    return 0.5 * (np.arange(k) + 0.5) / k


def decompose(signal, config: VmdConfig = VmdConfig()) -> ModeSet:
    """Split ``signal`` into ``config.mode_count`` band-limited modes.

    Parameters
    ----------
    signal : array_like
        Real, finite samples, at least ``4 * mode_count`` of them.
    config : VmdConfig
        ``bandwidth_penalty`` weights mode compactness, ``ascent_rate`` is
        the dual-ascent step (0 gives noise slack, no exact reconstruction).

    Returns
    -------
    ModeSet
        Modes truncated back to the original window, center frequencies in
        cycles/sample, and the relative reconstruction residual.
    """
    f = np.asarray(signal, dtype=float)
    if f.ndim != 1:
        raise VmdError("signal must be 1-D")
    if not np.all(np.isfinite(f)):
        raise VmdError("signal contains non-finite values")
    K = config.mode_count
    T = f.size
    if T < 4 * K:
        raise VmdError(f"signal length {T} too short for {K} modes (need >= {4 * K})")

    extended = mirror_extend(f)
    n_ext = extended.size
    f_hat = np.fft.rfft(extended)
    freqs = np.fft.rfftfreq(n_ext)
    two_alpha = 2.0 * config.bandwidth_penalty

    u_hat = np.zeros((K, freqs.size), dtype=complex)
    lam = np.zeros(freqs.size, dtype=complex)
    omega = _initial_omegas(config)
    total = np.zeros(freqs.size, dtype=complex)

    update_norm = np.inf
    n = 0
    while n < config.max_iterations:
        n += 1
        previous = u_hat.copy()
        for k in range(K):
            others = total - u_hat[k]
            u_hat[k] = (f_hat - others + lam / 2.0) / (1.0 + two_alpha * (freqs - omega[k]) ** 2)
            total = others + u_hat[k]
            power = np.abs(u_hat[k]) ** 2
            mass = power.sum()
            if mass > 0:
                omega[k] = freqs @ power / mass
        lam = lam + config.ascent_rate * (f_hat - total)

        diff = np.sum(np.abs(u_hat - previous) ** 2, axis=1)
        ref = np.maximum(np.sum(np.abs(previous) ** 2, axis=1), _DENOM_FLOOR)
        update_norm = float(np.sum(diff / ref))
        if not (np.isfinite(update_norm) and np.all(np.isfinite(omega))):
            raise VmdError(f"decomposition diverged at iteration {n}")
        if update_norm < config.tolerance:
            break

    order = np.argsort(omega, kind="stable")
    u_hat = u_hat[order]
    omega = omega[order]

    half = T // 2
    modes = np.fft.irfft(u_hat, n=n_ext, axis=1)[:, half : half + T]
    norm = np.linalg.norm(f)
    residual = float(np.linalg.norm(modes.sum(axis=0) - f) / norm) if norm > 0 else float(
        np.linalg.norm(modes.sum(axis=0))
    )
    return ModeSet(
        modes=modes,
        center_frequencies=np.clip(omega, 0.0, 0.5),
        iterations_used=n,
        final_update_norm=update_norm,
        residual=residual,
        spectra=u_hat,
    )


def reconstruct(modes) -> np.ndarray:
    """Element-wise sum of the mode rows."""
    rows = modes.modes if isinstance(modes, ModeSet) else np.asarray(modes, dtype=float)
    return np.asarray(rows, dtype=float).sum(axis=0)
