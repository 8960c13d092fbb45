# encoding: utf8
import os
import sys
import logging
import contextlib

import click
import numpy as np

import easr
from easr import exceptions
from easr import report
from easr import settings as easr_settings
from easr import signal_io
from easr.asr import AsrState
from easr.base import logger, parallel_map
from easr.bench import sweep, parse_sweep, dump_series, semisim_from_recording
from easr.constants import CONFIG_ENVVAR
from easr.metrics import full_report
from easr.pipeline import easr_clean
from easr.semisim import build_semisim

SIGNAL_FORMATS = ('bdf', 'csv', 'f32', 'f64')
LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


@contextlib.contextmanager
def handle_errors():
    """ Context manager to catch any errors and present them nicely to the user,
        exiting with the error's code.
    """
    try:
        try:
            yield
        except np.linalg.LinAlgError as e:
            raise exceptions.NumericError("Linear algebra failed: {}".format(e))
    except exceptions.EasrError as e:
        logger.debug("Command failed", exc_info=True)
        click.echo(u"{}: {}".format(e.category, e.msg), err=True)
        sys.exit(e.exit_code)


@click.group()
@click.option('--config', 'config_path', envvar=CONFIG_ENVVAR, metavar='PATH',
                          type=click.Path(dir_okay=False),
                          help='INI configuration file, flags override its values')
@click.option('-v', '--verbose', count=True, help='-v for progress, -vv for debugging output')
@click.version_option(easr.__version__, prog_name='embedded-asr')
@click.pass_context
def cli(ctx, config_path, verbose):
    """ Removes eye blink artifacts from single channel EEG with embedded
        artifact subspace reconstruction, and evaluates it on semi-simulated data.
    """
    logging.basicConfig(level=LOG_LEVELS[min(verbose, 2)])
    with handle_errors():
        ctx.obj = easr_settings.load_config(config_path)


def main(args=None):
    """ Console entry point: usage errors exit with 1 rather than click's 2. """
    try:
        rv = cli.main(args=args, prog_name='embedded-asr', standalone_mode=False)
    except click.exceptions.Abort:
        click.echo(u"Aborted!", err=True)
        sys.exit(1)
    except click.ClickException as e:
        e.show()
        sys.exit(1)
    sys.exit(rv if isinstance(rv, int) else 0)


################################################################################
# CLEAN COMMAND
################################################################################

@cli.command()
@click.option('--input', 'input_path', required=True, metavar='PATH', type=click.Path(dir_okay=False),
                                       help='recording to clean')
@click.option('--format', 'input_format', type=click.Choice(SIGNAL_FORMATS),
                                          help='input format, guessed from the extension by default')
@click.option('--fs', type=float, help='sampling frequency in Hz of CSV and raw input')
@click.option('--channel', multiple=True, metavar='LABEL', help='channel to clean, repeat for more')
@click.option('--range', 'ranges', type=(float, float), multiple=True, metavar='START END',
                                   help='clean only these seconds, joined end to end; repeatable')
@click.option('--out', 'out_path', required=True, metavar='PATH', type=click.Path(dir_okay=False),
                                   help='cleaned signal')
@click.option('--out-format', type=click.Choice(SIGNAL_FORMATS),
                              help='output format, by default from the extension or as the input')
@click.option('--m', type=int, help='embedding dimension  [default: 90]')
@click.option('--k', type=float, help='rejection cut-off  [default: 17]')
@click.option('--report', 'report_path', metavar='PATH', type=click.Path(dir_okay=False),
                                         help='write the rejection and timing report here instead of stdout')
@click.option('--report-format', type=click.Choice(report.FORMATS), default='text', show_default=True)
@click.option('--state-in', metavar='PATH', type=click.Path(dir_okay=False),
                            help='reuse a saved calibration instead of calibrating on the input')
@click.option('--state-out', metavar='PATH', type=click.Path(dir_okay=False), help='save the calibration')
@click.option('--jobs', type=click.IntRange(1, None), default=1, show_default=True,
                        help='worker threads, results do not depend on it')
@click.pass_obj
def clean(settings, input_path, input_format, fs, channel, ranges, out_path, out_format, m, k,
          report_path, report_format, state_in, state_out, jobs):
    """ Clean one or more channels of a recording with E-ASR.
    """
    with handle_errors():
        settings = easr_settings.override(settings, m=m, cutoff_k=k)
        signals, template = load_input(input_path, input_format, fs)
        signals = pick_channels(signals, channel)
        if ranges:
            signals = [signal_io.concat_signals([signal_io.slice_signal(s, start, end) for start, end in ranges])
                       for s in signals]
        if state_out and len(signals) != 1:
            raise exceptions.ConfigError("--state-out needs exactly one channel, got {}".format(len(signals)))
        state = read_state(state_in) if state_in else None

        # threads go to channels when there are several, to windows otherwise
        window_jobs = jobs if len(signals) == 1 else 1
        results = parallel_map(lambda s: easr_clean(s, settings.easr, state, window_jobs), signals,
                               jobs if len(signals) > 1 else 1)

        out_format = out_format or output_format(out_path, signal_io.guess_format(input_path, input_format))
        signal_io.save_signals(out_path, [r.cleaned for r in results], out_format, template)
        logger.info("Wrote {} cleaned channel(s) to {}".format(len(results), out_path))
        if state_out:
            report.save_document(state_out, results[0].state.to_json() + "\n")

        document = report.cleaning_document(results, [s.label for s in signals], report_format,
                                            report.provenance(settings))
        emit(document, report_path)


################################################################################
# SIMULATE COMMAND
################################################################################

@cli.command()
@click.option('--out-dir', required=True, metavar='PATH', type=click.Path(file_okay=False),
                           help='directory for the generated files')
@click.option('--seed', type=int, help='random seed  [default: 4]')
@click.option('--snr-db', type=float, help='signal to noise ratio  [default: 0]')
@click.option('--channels', type=click.IntRange(1, None), default=1, show_default=True,
                            help='channels sharing the blinks, each with its own clean EEG')
@click.option('--format', 'out_format', type=click.Choice(SIGNAL_FORMATS), default='csv', show_default=True)
@click.option('--source', metavar='PATH', type=click.Path(dir_okay=False),
                          help='recording to cut clean and blink segments from, instead of synthesising them')
@click.option('--source-format', type=click.Choice(SIGNAL_FORMATS))
@click.option('--source-fs', type=float, help='sampling frequency of a CSV or raw source')
@click.option('--source-channel', metavar='LABEL')
@click.option('--clean-range', type=(float, float), multiple=True, metavar='START END',
                               help='a clean source segment in seconds, give two')
@click.option('--blink-range', type=(float, float), multiple=True, metavar='START END',
                               help='a source segment holding one blink, give two')
@click.pass_obj
def simulate(settings, out_dir, seed, snr_db, channels, out_format, source, source_format, source_fs,
             source_channel, clean_range, blink_range):
    """ Generate a semi-simulated contaminated signal with its ground truth
        and blink onsets.
    """
    with handle_errors():
        settings = easr_settings.override(settings, rng_seed=seed, snr_db=snr_db)
        if source:
            recording = signal_io.load_signal(source, source_format, source_fs, source_channel)
            settings = settings._replace(semisim=semisim_from_recording(settings, recording, clean_range,
                                                                        blink_range))
        results = [build_semisim(settings.semisim, channel=i) for i in range(channels)]

        make_directory(out_dir)
        for kind in ('contaminated', 'ground_truth'):
            signals = [getattr(r, kind) for r in results]
            if out_format == 'bdf':
                signal_io.save_signals(os.path.join(out_dir, "{}.bdf".format(kind)), signals, 'bdf')
                continue
            for index, signal in enumerate(signals):
                suffix = "_{}".format(index + 1) if index else ""
                signal_io.save_signals(os.path.join(out_dir, "{}{}.{}".format(kind, suffix, out_format)), [signal],
                                       out_format)

        lines = ["channel,blink,onset_sample,onset_s"]
        for result in results:
            for index, onset in enumerate(result.blink_onsets):
                lines.append("{},{},{},{!r}".format(result.contaminated.label, index + 1, onset,
                                                    onset / result.contaminated.fs))
        report.save_document(os.path.join(out_dir, "onsets.csv"), "\n".join(lines) + "\n")

        info = report.provenance(settings, seed=settings.semisim.rng_seed)
        report.save_document(os.path.join(out_dir, "report.txt"), report.simulation_document(results, info))
        click.echo(u"Wrote {} channel(s) to {}".format(channels, out_dir))


################################################################################
# EVALUATE COMMAND
################################################################################

@cli.command()
@click.option('--contaminated', required=True, metavar='PATH', type=click.Path(dir_okay=False))
@click.option('--cleaned', required=True, metavar='PATH', type=click.Path(dir_okay=False))
@click.option('--ground-truth', metavar='PATH', type=click.Path(dir_okay=False),
                                help='without it only blink counts and band power are reported')
@click.option('--format', 'input_format', type=click.Choice(SIGNAL_FORMATS),
                                          help='format of all three inputs, guessed from extensions by default')
@click.option('--fs', type=float, help='sampling frequency in Hz of CSV and raw inputs')
@click.option('--channel', metavar='LABEL', help='channel label in BDF inputs')
@click.option('--subject', default="1", show_default=True, help='subject column of the CSV tables')
@click.option('--table', type=click.Choice(['accuracy', 'blinks']), default='accuracy', show_default=True,
                         help='CSV layout: RRMSE and CC, or blink counts')
@click.option('--report-format', type=click.Choice(report.FORMATS), default='text', show_default=True)
@click.option('--out', 'out_path', metavar='PATH', type=click.Path(dir_okay=False),
                                   help='write the report here instead of stdout')
@click.pass_obj
def evaluate(settings, contaminated, cleaned, ground_truth, input_format, fs, channel, subject, table,
             report_format, out_path):
    """ Compare a cleaned signal against the contaminated one and, if
        given, the ground truth.
    """
    with handle_errors():
        before = signal_io.load_signal(contaminated, input_format, fs, channel)
        after = signal_io.load_signal(cleaned, input_format, fs, channel)
        truth = signal_io.load_signal(ground_truth, input_format, fs, channel) if ground_truth else None
        evaluation = full_report(before, after, truth, blink_config=settings.blink)
        document = report.evaluation_document(evaluation, report_format, table, subject, channel or after.label,
                                              report.provenance(settings))
        emit(document, out_path)


################################################################################
# BENCH COMMAND
################################################################################

@cli.command()
@click.option('--seed', type=int, help='random seed  [default: 4]')
@click.option('--snr-db', type=float, help='signal to noise ratio  [default: 0]')
@click.option('--sweep-snr', metavar='LOW..HIGH|LIST', help='one run per SNR, eg -7..2')
@click.option('--sweep-m', metavar='LOW..HIGH|LIST', help='one run per embedding dimension, eg 30,60,90')
@click.option('--sweep-k', metavar='LOW..HIGH|LIST', help='one run per cut-off, eg 5,10,17,30')
@click.option('--dump-dir', metavar='PATH', type=click.Path(file_okay=False),
                            help='write time,contaminated,cleaned,ground_truth CSVs for plotting')
@click.option('--report-format', type=click.Choice(report.FORMATS), default='text', show_default=True)
@click.option('--out', 'out_path', metavar='PATH', type=click.Path(dir_okay=False),
                                   help='write the results here instead of stdout')
@click.option('--jobs', type=click.IntRange(1, None), default=1, show_default=True,
                        help='worker threads, results do not depend on it')
@click.pass_obj
def bench(settings, seed, snr_db, sweep_snr, sweep_m, sweep_k, dump_dir, report_format, out_path, jobs):
    """ E-ASR on a semi-simulated channel against two channel ASR, next to
        the published results.
    """
    with handle_errors():
        settings = easr_settings.override(settings, rng_seed=seed, snr_db=snr_db)
        rows = sweep(settings, parse_sweep(sweep_snr), parse_sweep(sweep_m, int), parse_sweep(sweep_k), jobs)
        if dump_dir:
            make_directory(dump_dir)
            for path in dump_series(dump_dir, rows):
                logger.info("Wrote {}".format(path))
        info = report.provenance(settings, seed=settings.semisim.rng_seed)
        emit(report.bench_document(rows, report_format, info), out_path)


################################################################################
# HELPER FUNCTIONS
################################################################################

def load_input(path, format=None, fs=None):
    """ Channels of the input file, and its BDF header if it has one. """
    format = signal_io.guess_format(path, format)
    if format == 'bdf':
        recording = signal_io.read_bdf(path)
        return list(recording.channels), recording.header
    return signal_io.load_recording(path, format, fs), None


def pick_channels(signals, labels):
    if not labels:
        if len(signals) == 1:
            return signals
        raise exceptions.ChannelError(None, [s.label for s in signals])
    return [signal_io.select_channel(signals, label) for label in labels]


def output_format(path, fallback):
    ext = os.path.splitext(path)[1].lower()
    return signal_io.EXTENSION_FORMATS.get(ext, fallback)


def read_state(path):
    try:
        with open(path, encoding='utf-8') as f:
            return AsrState.from_json(f.read())
    except (IOError, OSError) as e:
        raise exceptions.SignalFileError("Cannot read ASR state \"{}\": {}".format(path, e.strerror or e))


def make_directory(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise exceptions.SignalFileError("Cannot create directory \"{}\": {}".format(path, e.strerror or e))


def emit(document, path=None):
    if path:
        report.save_document(path, document)
    else:
        click.echo(document, nl=False)


if __name__ == '__main__':
    main()
