"""Signal conditioning for 12-lead ECG records.

The chain mirrors how records flow into training: bandpass filtering for
baseline-wander and power-line suppression, length regularization, random or
deterministic segment extraction, and per-lead normalization. All functions
are pure: they return new records and never mutate their inputs.

The bandpass is a Butterworth IIR designed from the analog prototype via the
bilinear transform with frequency pre-warping, applied forward-backward
(zero-phase) so waveform morphology is not time-shifted. The effective
magnitude response of the two-pass application is the squared single-pass
response.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional

import numpy as np

from .errors import SignalError

if TYPE_CHECKING:  # pragma: no cover
    from .dataio.labels import LabelVector

__all__ = [
    "N_LEADS", "EcgRecord", "FilterSpec", "SegmentSpec", "NormalizationMethod",
    "design_butterworth_bandpass", "sosfilt", "filtfilt_sos",
    "butterworth_bandpass", "analytic_bandpass_gain",
    "draw_segment_start", "segment_extract", "extract_segment_at",
    "pad_or_truncate", "normalize", "normalize_array",
]

N_LEADS = 12

_EPS = 1e-8


# ---------------------------------------------------------------------------
# domain types


@dataclass
class EcgRecord:
    """A 12-lead ECG: signal matrix [12, m] in millivolts at ``fs`` Hz."""

    signal: np.ndarray
    fs: float
    id: str = ""
    labels: Optional["LabelVector"] = None

    def __post_init__(self):
        self.signal = np.asarray(self.signal, dtype=np.float64)
        if self.signal.ndim != 2 or self.signal.shape[0] != N_LEADS:
            raise SignalError(
                f"record {self.id!r}: expected [{N_LEADS}, m] signal, "
                f"got shape {self.signal.shape}")
        if self.signal.shape[1] < 1:
            raise SignalError(f"record {self.id!r}: empty signal")
        if self.fs <= 0:
            raise SignalError(f"record {self.id!r}: fs must be positive, got {self.fs}")
        if not np.all(np.isfinite(self.signal)):
            raise SignalError(f"record {self.id!r}: signal contains NaN/Inf")

    @property
    def n_samples(self) -> int:
        return self.signal.shape[1]

    def with_signal(self, signal: np.ndarray) -> "EcgRecord":
        return EcgRecord(signal=signal, fs=self.fs, id=self.id, labels=self.labels)


@dataclass(frozen=True)
class FilterSpec:
    """Butterworth bandpass: prototype order and band edges in Hz."""

    fs: float
    order: int = 2
    low_cut: float = 1.0
    high_cut: float = 45.0

    def __post_init__(self):
        if self.order < 1:
            raise SignalError(f"filter order must be >= 1, got {self.order}")
        if not 0 < self.low_cut < self.high_cut:
            raise SignalError(
                f"need 0 < low_cut < high_cut, got {self.low_cut}, {self.high_cut}")
        if self.fs <= 2 * self.high_cut:
            raise SignalError(
                f"Nyquist violation: fs={self.fs} must exceed 2*high_cut="
                f"{2 * self.high_cut}")


@dataclass(frozen=True)
class SegmentSpec:
    """A validated segment: start s, length l, source length m, s + l <= m."""

    l: int
    s: int
    m: int

    def __post_init__(self):
        if self.s < 0 or self.l < 1 or self.s + self.l > self.m:
            raise SignalError(
                f"invalid segment: s={self.s}, l={self.l}, m={self.m} "
                "(need 0 <= s and s + l <= m)")


class NormalizationMethod(str, Enum):
    MINMAX = "minmax"
    ZSCORE = "zscore"
    RSCALE = "rscale"
    LOGSCALE = "logscale"
    L2 = "l2"


# ---------------------------------------------------------------------------
# Butterworth bandpass design (bilinear transform of the analog prototype)


def _prototype_poles(order: int) -> list[complex]:
    """Left-half-plane poles of the unit-cutoff analog Butterworth lowpass."""
    return [cmath.exp(1j * math.pi * (2 * k - 1 + order) / (2 * order))
            for k in range(1, order + 1)]


def design_butterworth_bandpass(spec: FilterSpec) -> np.ndarray:
    """Return second-order sections [n_sections, 6] (b0 b1 b2 a0 a1 a2).

    A prototype of order N yields a bandpass with 2N poles, N digital zeros
    at z=1 and N at z=-1; the overall gain is normalized to 1 at the (warped)
    geometric center of the band.
    """
    fs2 = 2.0 * spec.fs
    w1 = fs2 * math.tan(math.pi * spec.low_cut / spec.fs)
    w2 = fs2 * math.tan(math.pi * spec.high_cut / spec.fs)
    bw = w2 - w1
    w0sq = w1 * w2

    s_poles: list[complex] = []
    for p in _prototype_poles(spec.order):
        q = p * bw / 2.0
        disc = cmath.sqrt(q * q - w0sq)
        s_poles.extend([q + disc, q - disc])

    z_poles = [(fs2 + s) / (fs2 - s) for s in s_poles]

    # section denominators from conjugate (or real) pole pairs
    tol = 1e-10
    complex_upper = sorted((z for z in z_poles if z.imag > tol),
                           key=lambda z: (z.real, z.imag))
    real_poles = sorted(z.real for z in z_poles if abs(z.imag) <= tol)
    sections: list[list[float]] = []
    for z in complex_upper:
        sections.append([1.0, 0.0, -1.0, 1.0, -2.0 * z.real, abs(z) ** 2])
    for i in range(0, len(real_poles), 2):
        r1, r2 = real_poles[i], real_poles[i + 1]
        sections.append([1.0, 0.0, -1.0, 1.0, -(r1 + r2), r1 * r2])
    if len(sections) != spec.order:
        raise SignalError("internal design error: section count mismatch")

    # normalize overall gain to 1 at the warped center frequency
    wc = 2.0 * math.atan(math.sqrt(w0sq) / fs2)
    zc = cmath.exp(1j * wc)
    h = 1.0 + 0.0j
    for b0, b1, b2, a0, a1, a2 in sections:
        h *= (b0 * zc * zc + b1 * zc + b2) / (a0 * zc * zc + a1 * zc + a2)
    k = 1.0 / abs(h)
    for coeffs in sections:
        coeffs[0] *= k ** (1.0 / spec.order)
        coeffs[1] *= k ** (1.0 / spec.order)
        coeffs[2] *= k ** (1.0 / spec.order)

    return np.asarray(sections, dtype=np.float64)


def analytic_bandpass_gain(freq_hz: float, spec: FilterSpec, passes: int = 1) -> float:
    """Closed-form magnitude response at ``freq_hz``.

    Uses the Butterworth bandpass formula |H|^2 = 1/(1 + x^(2N)) with
    x = (w^2 - w0^2)/(bw * w) evaluated at bilinear-prewarped frequencies, so
    it matches the digital filter exactly. ``passes=2`` gives the effective
    forward-backward gain.
    """
    if freq_hz < 0 or freq_hz > spec.fs / 2:
        raise SignalError(f"probe frequency {freq_hz} outside [0, fs/2]")
    if freq_hz == 0.0 or freq_hz == spec.fs / 2:
        return 0.0
    fs2 = 2.0 * spec.fs
    w = fs2 * math.tan(math.pi * freq_hz / spec.fs)
    w1 = fs2 * math.tan(math.pi * spec.low_cut / spec.fs)
    w2 = fs2 * math.tan(math.pi * spec.high_cut / spec.fs)
    x = (w * w - w1 * w2) / ((w2 - w1) * w)
    single = 1.0 / math.sqrt(1.0 + x ** (2 * spec.order))
    return single ** passes


def sosfilt(sections: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Causal cascade of biquads along the last axis (direct form II transposed)."""
    y = np.array(x, dtype=np.float64, copy=True)
    lead_shape = y.shape[:-1]
    n = y.shape[-1]
    for b0, b1, b2, _a0, a1, a2 in sections:
        z1 = np.zeros(lead_shape)
        z2 = np.zeros(lead_shape)
        src = y.copy()
        for i in range(n):
            xi = src[..., i]
            yi = b0 * xi + z1
            z1 = b1 * xi - a1 * yi + z2
            z2 = b2 * xi - a2 * yi
            y[..., i] = yi
    return y


def filtfilt_sos(sections: np.ndarray, x: np.ndarray,
                 padlen: int | None = None) -> np.ndarray:
    """Zero-phase filtering: odd-reflection padding, forward pass, backward pass."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    if padlen is None:
        padlen = min(n - 1, 3 * (2 * len(sections) + 1))
    if padlen >= n:
        padlen = n - 1
    if padlen > 0:
        left = 2.0 * x[..., :1] - x[..., padlen:0:-1]
        right = 2.0 * x[..., -1:] - x[..., -2:-padlen - 2:-1]
        ext = np.concatenate([left, x, right], axis=-1)
    else:
        ext = x
    y = sosfilt(sections, ext)
    y = sosfilt(sections, y[..., ::-1])[..., ::-1]
    if padlen > 0:
        y = y[..., padlen:-padlen]
    return np.ascontiguousarray(y)


def butterworth_bandpass(record: EcgRecord, spec: FilterSpec | None = None,
                         padlen: int | None = None) -> EcgRecord:
    """Filter every lead with identical coefficients, zero-phase."""
    if spec is None:
        spec = FilterSpec(fs=record.fs)
    if spec.fs != record.fs:
        raise SignalError(
            f"filter designed for fs={spec.fs} applied to record at fs={record.fs}")
    sections = design_butterworth_bandpass(spec)
    if padlen is None:
        # a second's worth of padding pushes edge transients out of the signal
        padlen = min(record.n_samples - 1, int(record.fs))
    return record.with_signal(filtfilt_sos(sections, record.signal, padlen=padlen))


# ---------------------------------------------------------------------------
# length regularization and segmentation


def draw_segment_start(m: int, l: int, rng: np.random.Generator) -> SegmentSpec:
    """Draw the start s uniformly from {0, ..., m - l}."""
    if l > m:
        raise SignalError(f"segment length {l} exceeds available length {m}; pad first")
    s = int(rng.integers(0, m - l, endpoint=True))
    return SegmentSpec(l=l, s=s, m=m)


def extract_segment_at(record: EcgRecord, s: int, l: int) -> EcgRecord:
    """Deterministic cut [s, s+l) applied identically to all leads."""
    seg = SegmentSpec(l=l, s=s, m=record.n_samples)
    return record.with_signal(record.signal[:, seg.s:seg.s + seg.l].copy())


def segment_extract(record: EcgRecord, l: int, rng: np.random.Generator) -> EcgRecord:
    """Random segment of length l; the same start index is used on every lead."""
    seg = draw_segment_start(record.n_samples, l, rng)
    return record.with_signal(record.signal[:, seg.s:seg.s + seg.l].copy())


def pad_or_truncate(record: EcgRecord, target: int) -> EcgRecord:
    """Keep the first ``target`` samples, or zero-pad the tail up to it."""
    if target < 1:
        raise SignalError(f"target length must be >= 1, got {target}")
    m = record.n_samples
    if m == target:
        return record.with_signal(record.signal.copy())
    if m > target:
        return record.with_signal(record.signal[:, :target].copy())
    out = np.zeros((N_LEADS, target), dtype=np.float64)
    out[:, :m] = record.signal
    return record.with_signal(out)


# ---------------------------------------------------------------------------
# normalization


def normalize_array(x: np.ndarray, method: NormalizationMethod) -> np.ndarray:
    """Normalize each lead of [leads, n] independently.

    Degenerate denominators (constant, all-zero, or zero-IQR leads, which
    zero-padding makes reachable) produce all-zero output instead of blowing
    up; the centered numerator is zero in those cases anyway.
    """
    x = np.asarray(x, dtype=np.float64)
    method = NormalizationMethod(method)
    if method is NormalizationMethod.MINMAX:
        lo = x.min(axis=1, keepdims=True)
        span = x.max(axis=1, keepdims=True) - lo
        return np.where(span > _EPS, (x - lo) / np.where(span > _EPS, span, 1.0), 0.0)
    if method is NormalizationMethod.ZSCORE:
        mu = x.mean(axis=1, keepdims=True)
        sd = x.std(axis=1, keepdims=True)
        return np.where(sd > _EPS, (x - mu) / np.where(sd > _EPS, sd, 1.0), 0.0)
    if method is NormalizationMethod.RSCALE:
        med = np.median(x, axis=1, keepdims=True)
        q75, q25 = np.percentile(x, [75, 25], axis=1, keepdims=True)
        iqr = q75 - q25
        return np.where(iqr > _EPS, (x - med) / np.where(iqr > _EPS, iqr, 1.0), 0.0)
    if method is NormalizationMethod.LOGSCALE:
        return np.sign(x) * np.log1p(np.abs(x))
    if method is NormalizationMethod.L2:
        norm = np.linalg.norm(x, axis=1, keepdims=True)
        return np.where(norm > _EPS, x / np.where(norm > _EPS, norm, 1.0), 0.0)
    raise SignalError(f"unknown normalization method {method!r}")


def normalize(record: EcgRecord, method: NormalizationMethod) -> EcgRecord:
    return record.with_signal(normalize_array(record.signal, method))
