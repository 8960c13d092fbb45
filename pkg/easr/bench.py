""" The semi-simulated benchmark: E-ASR on channel 1 against plain ASR on
    both channels, scored against the pre-processed ground truth.
"""
import os
import time
import collections

import numpy as np

from easr import exceptions
from easr import signal_io
from easr.base import Signal, logger, parallel_map
from easr.metrics import full_report
from easr.pipeline import easr_clean, asr_clean_multichannel
from easr.preprocess import preprocess
from easr.semisim import build_semisim
from easr.settings import override

# One result per method and setting; series holds the time courses for plot dumps
BenchRow = collections.namedtuple("BenchRow", "method,snr_db,m,cutoff_k,alpha,report,series")

Series = collections.namedtuple("Series", "contaminated,cleaned,ground_truth")


def run_bench(settings, snr_db=None, m=None, cutoff_k=None, jobs=1):
    """ One semi-simulated dataset, both methods. Returns two BenchRows. """
    settings = override(settings, snr_db=snr_db, m=m, cutoff_k=cutoff_k)
    spec = settings.semisim
    config = settings.easr
    first = build_semisim(spec, channel=0)
    second = build_semisim(spec, channel=1)
    truth = preprocess(first.ground_truth, config.preprocess)

    result = easr_clean(first.contaminated, config, jobs=jobs)
    contaminated = result.preprocessed
    easr_report = full_report(contaminated, result.cleaned, truth, blink_config=settings.blink,
                              elapsed_s=result.elapsed)

    started = time.perf_counter()
    asr_cleaned = asr_clean_multichannel([first.contaminated, second.contaminated], config.asr,
                                         config.preprocess, jobs=jobs)[0]
    elapsed = time.perf_counter() - started
    asr_report = full_report(contaminated, asr_cleaned, truth, blink_config=settings.blink, elapsed_s=elapsed)

    logger.info("Bench at {} dB: E-ASR RRMSE {:.2f}% CC {:.3f}, ASR RRMSE {:.2f}% CC {:.3f}".format(
        spec.snr_db, easr_report.rrmse_pct, easr_report.cc, asr_report.rrmse_pct, asr_report.cc))
    common = dict(snr_db=spec.snr_db, m=config.embedding.m, cutoff_k=config.asr.cutoff_k, alpha=first.alpha_used)
    return [
        BenchRow(method='E-ASR', report=easr_report, series=Series(contaminated, result.cleaned, truth), **common),
        BenchRow(method='ASR 2-ch', report=asr_report, series=Series(contaminated, asr_cleaned, truth), **common),
    ]


def sweep(settings, snr_values=(None,), m_values=(None,), k_values=(None,), jobs=1):
    """ run_bench over every combination, in order. Runs are spread over
        jobs threads; each run is itself sequential.
    """
    grid = [(snr, m, k) for snr in snr_values for m in m_values for k in k_values]
    runs = parallel_map(lambda point: run_bench(settings, *point), grid, jobs)
    return [row for rows in runs for row in rows]


def parse_sweep(text, kind=float):
    """ "-7..2" (unit steps, inclusive) or "5,10,17,30". """
    if text is None:
        return (None,)
    text = text.strip()
    try:
        if '..' in text:
            low, high = (float(v) for v in text.split('..'))
            if high < low:
                raise ValueError(text)
            return tuple(kind(v) for v in np.arange(low, high + 0.5))
        return tuple(kind(v) for v in text.split(','))
    except ValueError:
        raise exceptions.ConfigError("Cannot read sweep \"{}\", use LOW..HIGH or a comma separated list".format(text))


def dump_series(directory, rows):
    """ time,contaminated,cleaned,ground_truth CSV per bench row, for
        overlay plots. Returns the paths written.
    """
    paths = []
    for row in rows:
        name = "{}_snr{:g}_m{}_k{:g}.csv".format(row.method.replace(' ', '').lower(), row.snr_db, row.m, row.cutoff_k)
        path = os.path.join(directory, name)
        write_series(path, row.series)
        paths.append(path)
    return paths


def write_series(path, series):
    contaminated, cleaned, truth = series
    lines = ["time,contaminated,cleaned,ground_truth"]
    for t, a, b, c in zip(contaminated.times, contaminated.samples, cleaned.samples, truth.samples):
        lines.append("{!r},{!r},{!r},{!r}".format(float(t), float(a), float(b), float(c)))
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
    except (IOError, OSError) as e:
        raise exceptions.SignalFileError("Cannot write \"{}\": {}".format(path, e.strerror or e))


def semisim_from_recording(settings, source, clean_ranges, blink_ranges):
    """ Clean and blink segments cut from a real recording, for a
        SemiSimSpec built on measured rather than synthetic EEG.
    """
    if len(clean_ranges) != 2 or len(blink_ranges) != 2:
        raise exceptions.ConfigError("Give exactly two clean ranges and two blink ranges")
    clean = [signal_io.slice_signal(source, a, b) for a, b in clean_ranges]
    blinks = [_zero_mean(signal_io.slice_signal(source, a, b)) for a, b in blink_ranges]
    return settings.semisim._replace(
        clean_segments=tuple(clean), blink_segments=tuple(blinks), fs=source.fs,
        segment_s=len(clean[0]) / source.fs)


def _zero_mean(signal):
    return Signal(signal.samples - np.mean(signal.samples), signal.fs, signal.label)
