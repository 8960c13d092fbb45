import logging
import zlib

import numpy as np
from joblib import Parallel, delayed

from easr import exceptions

# Every module logs under this name
NAMESPACE = "easr"

logger = logging.getLogger(NAMESPACE)


################################################################################
# SIGNAL
################################################################################


class Signal(object):
    """ A single channel of samples (microvolts) at a fixed sampling rate.
        Samples are copied into a read-only float64 array on construction,
        so a Signal can be shared freely between threads.
    """
    __slots__ = ('samples', 'fs', 'label')

    def __init__(self, samples, fs, label="EEG"):
        samples = np.array(samples, dtype=np.float64).ravel()
        fs = float(fs)
        if not fs > 0 or not np.isfinite(fs):
            raise exceptions.ConfigError("Sampling frequency must be positive, not {}".format(fs))
        if samples.size < 1:
            raise exceptions.DimensionError("A signal needs at least one sample")
        if not np.all(np.isfinite(samples)):
            bad = int(np.flatnonzero(~np.isfinite(samples))[0])
            raise exceptions.NumericError("Non-finite sample at index {} in \"{}\"".format(bad, label))
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)
        object.__setattr__(self, 'fs', fs)
        object.__setattr__(self, 'label', str(label))

    def __setattr__(self, name, value):
        raise AttributeError("Signal is immutable")

    def __len__(self):
        return self.samples.size

    def __repr__(self):
        return "Signal(label={!r}, fs={}, n={})".format(self.label, self.fs, len(self))

    @property
    def duration(self):
        return len(self) / self.fs

    @property
    def times(self):
        return np.arange(len(self)) / self.fs

    def replace(self, samples=None, label=None):
        """ A new Signal with the same rate, and optionally new samples or label. """
        return Signal(self.samples if samples is None else samples, self.fs,
                      self.label if label is None else label)


def check_same_shape(signals):
    """ Raise unless all signals share a sampling rate and a length. """
    if len(set(s.fs for s in signals)) > 1:
        raise exceptions.DimensionError("Signals have different sampling rates: {}".format(
            ", ".join("{}={}".format(s.label, s.fs) for s in signals)))
    if len(set(len(s) for s in signals)) > 1:
        raise exceptions.DimensionError("Signals have different lengths: {}".format(
            ", ".join("{}={}".format(s.label, len(s)) for s in signals)))


################################################################################
# HELPER FUNCTIONS
################################################################################


def make_rng(seed, *stream):
    """ Seeded generator for an independent stream, eg make_rng(4, 'blinks'). """
    key = [int(seed)] + [zlib.crc32(s.encode("utf-8")) if isinstance(s, str) else int(s) for s in stream]
    return np.random.default_rng(key)


def window_bounds(n_samples, window, min_tail=1):
    """ Consecutive non-overlapping (start, stop) pairs covering n_samples.
        A trailing remainder shorter than min_tail is returned flagged, so
        callers can pass it through untouched.
        Returns a list of (start, stop, usable) tuples.
    """
    window = max(int(window), 1)
    bounds = []
    for start in range(0, n_samples, window):
        stop = min(start + window, n_samples)
        bounds.append((start, stop, stop - start >= min_tail))
    return bounds


def parallel_map(fn, items, jobs=1):
    """ Apply fn to each item, optionally in threads, preserving order. """
    items = list(items)
    if jobs is None or jobs == 1 or len(items) < 2:
        return [fn(item) for item in items]
    return Parallel(n_jobs=jobs, prefer="threads")(delayed(fn)(item) for item in items)
