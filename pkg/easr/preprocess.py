""" Zero-centering, band-pass and notch filtering applied before embedding.
    Both filters run forward and backward so blink peaks keep their timing.
"""
import collections

import numpy as np
from scipy import signal as sp_signal

from easr import constants
from easr import exceptions
from easr.base import logger


PreprocessConfig = collections.namedtuple(
    "PreprocessConfig", "bandpass_low,bandpass_high,notch_freq,notch_q,filter_order,normalize",
    defaults=(constants.DEFAULT_BANDPASS_LOW, constants.DEFAULT_BANDPASS_HIGH, constants.DEFAULT_NOTCH_FREQ,
              constants.DEFAULT_NOTCH_Q, constants.DEFAULT_FILTER_ORDER, True))


def validate_preprocess_config(config, fs):
    nyquist = fs / 2.0
    if not 0 < config.bandpass_low < config.bandpass_high:
        raise exceptions.ConfigError("Band-pass edges must satisfy 0 < low < high, got {}-{} Hz".format(
            config.bandpass_low, config.bandpass_high))
    if config.bandpass_high >= nyquist:
        raise exceptions.ConfigError("Band-pass high edge {} Hz is not below the Nyquist frequency {} Hz".format(
            config.bandpass_high, nyquist))
    if config.notch_freq is not None:
        if not 0 < config.notch_freq < nyquist:
            raise exceptions.ConfigError("Notch frequency {} Hz must lie between 0 and {} Hz".format(
                config.notch_freq, nyquist))
        if not config.notch_q > 0:
            raise exceptions.ConfigError("Notch quality factor must be positive, not {}".format(config.notch_q))
    if int(config.filter_order) != config.filter_order or config.filter_order < 1:
        raise exceptions.ConfigError("Filter order must be a positive integer, not {}".format(config.filter_order))


def zero_center(signal):
    """ Subtract the mean. """
    return signal.replace(samples=signal.samples - np.mean(signal.samples))


def bandpass(signal, config=None):
    """ Butterworth band-pass, applied forward-backward. """
    config = config or PreprocessConfig()
    validate_preprocess_config(config, signal.fs)
    sos = sp_signal.butter(int(config.filter_order), [config.bandpass_low, config.bandpass_high],
                           btype='bandpass', output='sos', fs=signal.fs)
    padlen = _padlen(signal, config.filter_order)
    filtered = sp_signal.sosfiltfilt(sos, signal.samples, padtype='odd' if padlen else None, padlen=padlen)
    return signal.replace(samples=filtered)


def notch(signal, config=None):
    """ Second order IIR notch at config.notch_freq, applied forward-backward.
        A config without a notch frequency returns the signal unchanged.
    """
    config = config or PreprocessConfig()
    if config.notch_freq is None:
        return signal
    validate_preprocess_config(config, signal.fs)
    b, a = sp_signal.iirnotch(config.notch_freq, config.notch_q, fs=signal.fs)
    padlen = _padlen(signal, 2)
    filtered = sp_signal.filtfilt(b, a, signal.samples, padtype='odd' if padlen else None, padlen=padlen)
    return signal.replace(samples=filtered)


def preprocess(signal, config=None):
    """ Normalize, band-pass then notch. No detrending. """
    config = config or PreprocessConfig()
    validate_preprocess_config(config, signal.fs)
    if config.normalize:
        signal = zero_center(signal)
    signal = bandpass(signal, config)
    signal = notch(signal, config)
    logger.debug("Pre-processed {}: {}-{} Hz band-pass, notch {}".format(
        signal.label, config.bandpass_low, config.bandpass_high, config.notch_freq))
    return signal


def _padlen(signal, order):
    # reflect-pad by three times the filter order, never more than the data allows
    return int(min(3 * int(order), len(signal) - 1))
