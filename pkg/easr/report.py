""" Text, CSV and JSON renderings of evaluation, cleaning and bench
    results. Every document starts with the tool version, the seed and the
    effective configuration.
"""
import io
import csv
import json
import collections

import easr
from easr import constants
from easr import exceptions
from easr.settings import dump_config

FORMATS = ('text', 'csv', 'json')

# layout: (column title, row key) pairs
TABLES = collections.OrderedDict([
    ('accuracy', (('Subject', 'subject'), ('Channel', 'channel'), ('RRMSE (%)', 'rrmse_pct'), ('CC', 'cc'))),
    ('blinks', (('Subject', 'subject'), ('Channel', 'channel'), ('Before', 'blinks_before'),
                ('After', 'blinks_after'), ('Reduction (%)', 'reduction_pct'), ('Time (s)', 'elapsed_s'))),
    ('bench', (('Method', 'method'), ('SNR (dB)', 'snr_db'), ('M', 'm'), ('k', 'cutoff_k'), ('Alpha', 'alpha'),
               ('RRMSE (%)', 'rrmse_pct'), ('CC', 'cc'), ('Before', 'blinks_before'), ('After', 'blinks_after'),
               ('Reduction (%)', 'reduction_pct'), ('Time (s)', 'elapsed_s'))),
    ('windows', (('Channel', 'channel'), ('Window', 'window'), ('Start', 'start'), ('Stop', 'stop'),
                 ('Rejected', 'rejected'))),
])

DIGITS = {'rrmse_pct': 2, 'cc': 3, 'reduction_pct': 1, 'elapsed_s': 3, 'alpha': 4, 'snr_db': 1, 'cutoff_k': 1}


def provenance(settings=None, seed=None):
    info = collections.OrderedDict()
    info['tool'] = 'embedded-asr'
    info['version'] = easr.__version__
    if seed is not None:
        info['seed'] = seed
    if settings is not None:
        info['config'] = dump_config(settings)
    return info


def report_fields(report, **extra):
    """ Flat name -> value mapping of an EvaluationReport, band ratios as
        band_power.<band>.
    """
    fields = collections.OrderedDict(extra)
    for name in ('rrmse_pct', 'cc', 'blinks_before', 'blinks_after', 'reduction_pct', 'elapsed_s'):
        fields[name] = getattr(report, name)
    for prefix in ('band_power', 'band_power_contaminated', 'band_power_ground_truth'):
        ratios = getattr(report, prefix)
        if ratios is not None:
            for band, value in ratios.items():
                fields["{}.{}".format(prefix, band)] = value
    return fields


def format_value(value, name=None):
    """ Missing values read "n/a". """
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return "{:.{}f}".format(value, DIGITS.get((name or "").rsplit(".", 1)[-1], 4))
    return str(value)


################################################################################
# RENDERERS
################################################################################


def render_key_values(fields, info):
    """ "name: value" per line; provenance as # comments. """
    lines = _comment_lines(info)
    lines.extend("{}: {}".format(name, format_value(value, name)) for name, value in fields.items())
    return "\n".join(lines) + "\n"


def render_table(rows, table, format='text', info=None):
    """ Rows (mappings) under one of the TABLES layouts. """
    try:
        columns = TABLES[table]
    except KeyError:
        raise exceptions.ConfigError("Unknown table \"{}\", expected one of: {}".format(table, ", ".join(TABLES)))
    if format == 'json':
        return render_json(info, rows=[collections.OrderedDict((key, row.get(key)) for _, key in columns)
                                       for row in rows])
    cells = [[format_value(row.get(key), key) for _, key in columns] for row in rows]
    titles = [title for title, _ in columns]
    lines = _comment_lines(info)
    if format == 'csv':
        out = io.StringIO()
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(titles)
        writer.writerows(cells)
        return "\n".join(lines + [out.getvalue().rstrip('\n')]) + "\n"
    if format != 'text':
        raise exceptions.ConfigError("Unknown report format \"{}\"".format(format))
    widths = [max([len(t)] + [len(r[i]) for r in cells]) for i, t in enumerate(titles)]
    lines.append("  ".join(t.ljust(w) for t, w in zip(titles, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells)
    return "\n".join(lines) + "\n"


def render_band_power(report, reference=False):
    """ Band rows with contaminated, cleaned and ground truth ratios, in
        text. With reference, the published ratios follow in brackets.
    """
    columns = (('Contaminated', report.band_power_contaminated, 'contaminated'),
               ('Cleaned', report.band_power, 'cleaned'),
               ('Ground truth', report.band_power_ground_truth, 'ground_truth'))
    columns = [c for c in columns if c[1] is not None]
    lines = ["{:<8}".format("Band") + "".join("{:>22}".format(title) for title, _, _ in columns)]
    for name, _, _ in constants.BANDS:
        cells = []
        for _, ratios, key in columns:
            cell = format_value(ratios[name])
            if reference:
                cell += " ({:.2f})".format(constants.REFERENCE_BAND_POWER[key][name])
            cells.append("{:>22}".format(cell))
        lines.append("{:<8}".format(name) + "".join(cells))
    return "\n".join(lines) + "\n"


def render_reference_rows():
    lines = ["Published results on recorded data:"]
    lines.extend("  {:<22} RRMSE {:6.2f}%  CC {:.2f}".format(name, value, cc)
                 for name, value, cc in constants.REFERENCE_RESULTS)
    return "\n".join(lines) + "\n"


def render_json(info, **content):
    doc = collections.OrderedDict()
    doc['provenance'] = info or collections.OrderedDict()
    doc.update(content)
    try:
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    except ValueError as e:
        raise exceptions.NumericError("Report holds a value JSON cannot represent: {}".format(e))


################################################################################
# DOCUMENTS
################################################################################


def evaluation_document(report, format='text', table='accuracy', subject="1", channel="", info=None):
    """ One EvaluationReport as key/value text, an accuracy or blinks CSV row, or JSON. """
    fields = report_fields(report, subject=subject, channel=channel)
    if format == 'text':
        return render_key_values(fields, info)
    if format == 'json':
        return render_json(info, report=fields)
    return render_table([fields], table, format, info)


def bench_document(rows, format='text', info=None):
    """ Side by side results of bench rows; text adds the band power table
        of each run and the published reference rows.
    """
    fields = [report_fields(row.report, method=row.method, snr_db=row.snr_db, m=row.m, cutoff_k=row.cutoff_k,
                            alpha=row.alpha) for row in rows]
    if format == 'json':
        return render_json(info, rows=fields)
    text = render_table(fields, 'bench', format, info)
    if format != 'text':
        return text
    parts = [text]
    for row in rows:
        parts.append("\nBand power, {} at {:g} dB (M={}, k={:g}):\n".format(row.method, row.snr_db, row.m,
                                                                            row.cutoff_k))
        parts.append(render_band_power(row.report, reference=True))
    parts.append("\n" + render_reference_rows())
    return "".join(parts)


def cleaning_document(results, labels, format='text', info=None):
    """ Timing and per-window rejections of easr_clean() results. """
    if format == 'json':
        channels = []
        for label, result in zip(labels, results):
            entry = collections.OrderedDict()
            entry['channel'] = label
            entry['elapsed_s'] = result.elapsed
            entry['windows'] = [collections.OrderedDict([('start', w.start), ('stop', w.stop),
                                                         ('rejected', list(w.rejected))])
                                for w in result.rejection_report]
            channels.append(entry)
        return render_json(info, channels=channels)
    if format == 'csv':
        rows = [{'channel': label, 'window': i, 'start': w.start, 'stop': w.stop, 'rejected': len(w.rejected)}
                for label, result in zip(labels, results) for i, w in enumerate(result.rejection_report)]
        return render_table(rows, 'windows', 'csv', info)
    fields = collections.OrderedDict()
    for label, result in zip(labels, results):
        report = result.rejection_report
        fields["{}.elapsed_s".format(label)] = result.elapsed
        fields["{}.windows".format(label)] = len(report)
        fields["{}.windows_rejecting".format(label)] = sum(1 for w in report if w.rejected)
        fields["{}.components_rejected".format(label)] = sum(len(w.rejected) for w in report)
        fields["{}.calibration_windows".format(label)] = result.state.n_clean_windows
    return render_key_values(fields, info)


def simulation_document(results, info=None):
    fields = collections.OrderedDict()
    for result in results:
        label = result.contaminated.label
        fields["{}.alpha".format(label)] = result.alpha_used
        fields["{}.samples".format(label)] = len(result.contaminated)
        fields["{}.blinks".format(label)] = len(result.blink_onsets)
    return render_key_values(fields, info)


def _comment_lines(info):
    lines = []
    for name, value in (info or {}).items():
        if name == 'config':
            lines.append("# config:")
            lines.extend("#   {}".format(line) if line else "#" for line in value.splitlines())
        else:
            lines.append("# {}: {}".format(name, value))
    return lines


def save_document(path, text):
    try:
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
    except (IOError, OSError) as e:
        raise exceptions.SignalFileError("Cannot write report \"{}\": {}".format(path, e.strerror or e))
