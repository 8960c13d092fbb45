""" Delay embedding of a single channel into a Hankel matrix, and the
    anti-diagonal averaging that maps a processed matrix back to a signal.
"""
import math
import collections

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from easr import constants
from easr import exceptions
from easr.base import Signal, logger


EmbeddingConfig = collections.namedtuple(
    "EmbeddingConfig", "m,lag,f_low_of_interest",
    defaults=(constants.DEFAULT_EMBEDDING_DIMENSION, constants.DEFAULT_LAG, None))

EmbeddedMatrix = collections.namedtuple("EmbeddedMatrix", "data,m,k_cols,lag,fs,label")


def validate_embedding_config(config, n_samples=None):
    if int(config.m) != config.m or config.m < 1:
        raise exceptions.ConfigError("Embedding dimension must be a positive integer, not {}".format(config.m))
    if config.lag != 1:
        raise exceptions.ConfigError("Only a lag of 1 is supported, not {}".format(config.lag))
    if n_samples is not None and config.m > n_samples:
        raise exceptions.DimensionError("Embedding dimension {} exceeds the signal length {}".format(
            config.m, n_samples))


def suggest_dimension(fs, f_low):
    """ Smallest M with M >= fs / f_low. """
    if not f_low > 0:
        raise exceptions.ConfigError("Lowest frequency of interest must be positive, not {}".format(f_low))
    if f_low > fs / 2.0:
        logger.warning("Lowest frequency of interest {} Hz is above the Nyquist frequency {} Hz".format(
            f_low, fs / 2.0))
    return max(int(math.ceil(fs / float(f_low))), 1)


def embedding_report(fs, m, f_low=None):
    """ The configured M next to what fs / f_low asks for, and the lowest
        frequency M actually covers (fs / M).
    """
    report = collections.OrderedDict()
    report['m'] = int(m)
    report['effective_f_low'] = fs / float(m)
    if f_low is not None:
        report['f_low'] = f_low
        report['suggested_m'] = suggest_dimension(fs, f_low)
    return report


def embed(signal, config=None):
    """ Rows are the signal delayed by 0..M-1 samples, each K = N - M + 1 long. """
    config = config or EmbeddingConfig()
    validate_embedding_config(config, len(signal))
    m = int(config.m)
    if config.f_low_of_interest is not None:
        suggested = suggest_dimension(signal.fs, config.f_low_of_interest)
        if suggested != m:
            logger.info("Embedding dimension {} differs from fs/f_low suggestion {}".format(m, suggested))
    k_cols = len(signal) - m + 1
    data = sliding_window_view(signal.samples, k_cols).copy()
    data.setflags(write=False)
    return EmbeddedMatrix(data=data, m=m, k_cols=k_cols, lag=1, fs=signal.fs, label=signal.label)


def diagonal_average(matrix, fs=None, label=None):
    """ Mean of every anti-diagonal (entries with equal i + j) as a Signal
        of length M + K - 1. Accepts an EmbeddedMatrix or a plain 2-D array.
    """
    if isinstance(matrix, EmbeddedMatrix):
        fs = matrix.fs if fs is None else fs
        label = matrix.label if label is None else label
        matrix = matrix.data
    data = np.asarray(matrix, dtype=np.float64)
    if data.ndim != 2 or data.size == 0:
        raise exceptions.DimensionError("Expected a non-empty 2-D matrix, got shape {}".format(data.shape))
    if fs is None:
        raise exceptions.ConfigError("A sampling frequency is needed to build a signal")
    m, k = data.shape
    n = m + k - 1
    index = np.add.outer(np.arange(m), np.arange(k))
    sums = np.bincount(index.ravel(), weights=data.ravel(), minlength=n)
    counts = np.bincount(index.ravel(), minlength=n)
    return Signal(sums / counts, fs, label or "EEG")
