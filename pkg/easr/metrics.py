""" Evaluation quantities: RRMSE, correlation, band power ratios, blink
    counts from an amplitude threshold and their percentage reduction.
"""
import collections

import numpy as np
from scipy import signal as sp_signal

from easr import constants
from easr import exceptions
from easr.base import Signal, logger


BlinkConfig = collections.namedtuple(
    "BlinkConfig", "threshold_constant,min_peak_distance_ms",
    defaults=(constants.DEFAULT_BLINK_CONSTANT, constants.DEFAULT_MIN_PEAK_DISTANCE_MS))

# rrmse_pct and cc are None without a ground truth; reduction_pct is None
# when there were no blinks to begin with
EvaluationReport = collections.namedtuple(
    "EvaluationReport",
    "rrmse_pct,cc,band_power,blinks_before,blinks_after,reduction_pct,elapsed_s,"
    "band_power_contaminated,band_power_ground_truth")


def validate_blink_config(config):
    if not config.threshold_constant > 0 or not config.min_peak_distance_ms > 0:
        raise exceptions.ConfigError("Blink threshold constant and minimum peak distance must be positive")


def rrmse(estimate, ground_truth):
    """ 100 * RMS(estimate - ground truth) / RMS(ground truth). """
    estimate, truth = _pair(estimate, ground_truth)
    reference = np.sqrt(np.mean(truth ** 2))
    if not reference > 0:
        raise exceptions.NumericError("Ground truth has zero RMS, RRMSE is undefined")
    return 100.0 * np.sqrt(np.mean((estimate - truth) ** 2)) / reference


def correlation(a, b):
    """ Pearson correlation coefficient. """
    a, b = _pair(a, b)
    if a.size < 2:
        raise exceptions.DimensionError("Correlation needs at least 2 samples")
    a = a - a.mean()
    b = b - b.mean()
    norm = np.sqrt(np.sum(a ** 2) * np.sum(b ** 2))
    if not norm > 0:
        raise exceptions.NumericError("Correlation is undefined for a zero-variance signal")
    return float(np.clip(np.sum(a * b) / norm, -1.0, 1.0))


def power_spectrum(signal):
    """ Welch estimate: 2 s Hann segments, 50% overlap. """
    nperseg = min(int(round(constants.WELCH_SEGMENT_S * signal.fs)), len(signal))
    return sp_signal.welch(signal.samples, fs=signal.fs, window='hann', nperseg=nperseg,
                           noverlap=nperseg // 2, detrend='constant', scaling='density')


def band_power_ratios(signal, fs=None):
    """ Power of each EEG band over the power of 0.5-100 Hz. Bands are
        half-open [low, high) and partition the total range, so the ratios
        sum to 1.
    """
    signal = _as_signal(signal, fs)
    if len(signal) < 2 * signal.fs:
        raise exceptions.DimensionError("Band power needs at least 2 s of data, got {:.3f} s".format(
            signal.duration))
    freqs, psd = power_spectrum(signal)
    nyquist = signal.fs / 2.0
    low_edge = constants.BANDS[0][1]
    high_edge = constants.BANDS[-1][2]
    if nyquist < high_edge:
        logger.warning("Gamma band truncated at the Nyquist frequency {} Hz".format(nyquist))
        high_edge = nyquist
    total_mask = (freqs >= low_edge) & (freqs < high_edge)
    total = np.sum(psd[total_mask])
    if not total > 0:
        raise exceptions.NumericError("Signal \"{}\" has no power in {}-{} Hz".format(
            signal.label, low_edge, high_edge))
    ratios = collections.OrderedDict()
    for name, low, high in constants.BANDS:
        mask = (freqs >= low) & (freqs < min(high, high_edge))
        ratios[name] = float(np.sum(psd[mask]) / total)
    return ratios


def blink_threshold(signal, config=None):
    """ constant * mean(|x|) """
    config = config or BlinkConfig()
    return config.threshold_constant * float(np.mean(np.abs(_samples(signal))))


def count_blinks(signal, config=None, fs=None):
    """ Peaks of |x| strictly above the threshold. Each run of samples
        above it contributes its largest sample; scanning left to right, a
        run peak closer than min_peak_distance_ms to the last accepted peak
        is dropped. Returns (count, peak indices).
    """
    config = config or BlinkConfig()
    validate_blink_config(config)
    signal = _as_signal(signal, fs)
    rectified = np.abs(signal.samples)
    threshold = blink_threshold(signal, config)
    distance = max(int(round(config.min_peak_distance_ms / 1000.0 * signal.fs)), 1)
    above = np.concatenate([[False], rectified > threshold, [False]])
    # run i spans edges[2i]:edges[2i + 1]
    edges = np.flatnonzero(np.diff(above.astype(np.int8)))
    peaks = []
    for start, stop in zip(edges[::2], edges[1::2]):
        index = int(start + np.argmax(rectified[start:stop]))
        if not peaks or index - peaks[-1] >= distance:
            peaks.append(index)
    return len(peaks), peaks


def blink_constant_sweep(signal, constants_range=range(1, 11), config=None, fs=None):
    """ Blink counts for each threshold constant, eg to pick one against
        an independent blink count.
    """
    config = config or BlinkConfig()
    return collections.OrderedDict(
        (c, count_blinks(signal, config._replace(threshold_constant=c), fs)[0]) for c in constants_range)


def percentage_reduction(before, after):
    """ (before - after) / before * 100, None when before is 0. """
    if before == 0:
        return None
    return (before - after) / float(before) * 100.0


def full_report(contaminated, cleaned, ground_truth=None, fs=None, blink_config=None, elapsed_s=None):
    """ Every metric computable from the given signals. """
    contaminated = _as_signal(contaminated, fs)
    cleaned = _as_signal(cleaned, fs)
    blinks_before, _ = count_blinks(contaminated, blink_config)
    blinks_after, _ = count_blinks(cleaned, blink_config)
    rrmse_pct = cc = power_truth = None
    if ground_truth is not None:
        ground_truth = _as_signal(ground_truth, fs)
        rrmse_pct = rrmse(cleaned, ground_truth)
        cc = correlation(cleaned, ground_truth)
        power_truth = _band_power_or_none(ground_truth)
    return EvaluationReport(
        rrmse_pct=rrmse_pct, cc=cc,
        band_power=_band_power_or_none(cleaned),
        blinks_before=blinks_before, blinks_after=blinks_after,
        reduction_pct=percentage_reduction(blinks_before, blinks_after),
        elapsed_s=elapsed_s,
        band_power_contaminated=_band_power_or_none(contaminated),
        band_power_ground_truth=power_truth)


def _band_power_or_none(signal):
    if len(signal) < 2 * signal.fs:
        logger.info("Skipping band power of {}: shorter than 2 s".format(signal.label))
        return None
    return band_power_ratios(signal)


def _samples(signal):
    if isinstance(signal, Signal):
        return signal.samples
    return np.asarray(signal, dtype=np.float64)


def _as_signal(signal, fs=None):
    if isinstance(signal, Signal):
        return signal
    if fs is None:
        raise exceptions.ConfigError("A sampling frequency is needed for raw sample arrays")
    return Signal(signal, fs)


def _pair(a, b):
    a, b = _samples(a), _samples(b)
    if a.shape != b.shape:
        raise exceptions.DimensionError("Signals have different lengths: {} and {}".format(a.size, b.size))
    return a, b
