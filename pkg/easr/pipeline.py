""" Embedded ASR: pre-process one channel, embed it, run ASR on the
    embedded matrix and average the anti-diagonals back into a signal.
    Also the plain multichannel ASR used as the comparison baseline.
"""
import time
import collections

import numpy as np

from easr import asr
from easr import exceptions
from easr.base import Signal, logger, check_same_shape, parallel_map
from easr.embedding import EmbeddingConfig, validate_embedding_config, embed, diagonal_average
from easr.preprocess import PreprocessConfig, validate_preprocess_config, preprocess


EasrConfig = collections.namedtuple("EasrConfig", "preprocess,embedding,asr",
                                    defaults=(PreprocessConfig(), EmbeddingConfig(), asr.AsrConfig()))

# elapsed covers embedding, calibration, processing and averaging only
CleanResult = collections.namedtuple("CleanResult", "cleaned,rejection_report,elapsed,preprocessed,state")


def validate_easr_config(config, signal=None):
    if signal is not None:
        validate_preprocess_config(config.preprocess, signal.fs)
    validate_embedding_config(config.embedding, None if signal is None else len(signal))
    asr.validate_asr_config(config.asr)


def easr_clean(signal, config=None, state=None, jobs=1):
    """ Clean a single channel with E-ASR.

        Calibration uses the same embedded matrix that is being cleaned,
        unless a previously calibrated state is given.
    """
    config = config or EasrConfig()
    validate_easr_config(config, signal)
    prepared = preprocess(signal, config.preprocess)

    started = time.perf_counter()
    embedded = embed(prepared, config.embedding)
    if state is None:
        state = asr.calibrate(embedded.data, prepared.fs, config.asr)
    elif state.dimension != embedded.m:
        raise exceptions.DimensionError("ASR state has dimension {}, embedding uses {}".format(
            state.dimension, embedded.m))
    processed, report = asr.process(embedded.data, state, prepared.fs, config.asr, jobs=jobs)
    cleaned = diagonal_average(processed, prepared.fs, prepared.label)
    elapsed = time.perf_counter() - started

    logger.info("E-ASR cleaned {} ({} samples, M={}) in {:.3f} s, {} of {} windows rejected components".format(
        signal.label, len(signal), embedded.m, elapsed, sum(1 for r in report if r.rejected), len(report)))
    return CleanResult(cleaned=cleaned, rejection_report=report, elapsed=elapsed, preprocessed=prepared,
                       state=state)


def easr_clean_channels(signals, config=None, jobs=1):
    """ E-ASR on each channel independently, in order. """
    return parallel_map(lambda s: easr_clean(s, config), signals, jobs)


def asr_clean_multichannel(signals, config=None, preprocess_config=None, jobs=1):
    """ Plain ASR on channels stacked as rows, without embedding. Returns
        the cleaned channels in input order.
    """
    signals = list(signals)
    if len(signals) < 2:
        raise exceptions.DimensionError("Multichannel ASR needs at least 2 channels, got {}".format(len(signals)))
    check_same_shape(signals)
    config = config or asr.AsrConfig()
    if preprocess_config is not None:
        signals = [preprocess(s, preprocess_config) for s in signals]
    fs = signals[0].fs

    data = np.vstack([s.samples for s in signals])
    state = asr.calibrate(data, fs, config)
    processed, report = asr.process(data, state, fs, config, jobs=jobs)
    logger.info("Multichannel ASR on {} channels: {} of {} windows rejected components".format(
        len(signals), sum(1 for r in report if r.rejected), len(report)))
    return [Signal(row, fs, s.label) for row, s in zip(processed, signals)]
