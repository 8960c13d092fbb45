# encoding: utf8
""" Reading and writing single-channel signals and BioSemi BDF recordings.

    BDF layout (after http://www.biosemi.com/faq/file_format.htm):
    a 256 byte main header starting with 0xFF "BIOSEMI", one 256 byte block
    of per-channel fields, then data records holding each channel's samples
    in turn as 3 byte little-endian two's complement integers.
"""
import io
import os
import collections

import numpy as np

from easr import constants
from easr import exceptions
from easr.base import Signal, logger


BdfHeaderBase = collections.namedtuple(
    "BdfHeaderBase",
    "patient_id,recording_id,start_date,start_time,reserved,num_records,record_duration,"
    "labels,transducers,units,physical_min,physical_max,digital_min,digital_max,"
    "prefiltering,samples_per_record,channel_reserved")


class BdfHeader(BdfHeaderBase):
    """ Parsed main and channel header fields. Per-channel fields are tuples. """
    __slots__ = ()

    @property
    def num_channels(self):
        return len(self.labels)

    @property
    def header_bytes(self):
        return constants.BDF_HEADER_BYTES + constants.BDF_CHANNEL_HEADER_BYTES * self.num_channels

    def sampling_rate(self, index):
        return self.samples_per_record[index] / self.record_duration


# (name, width) of the per-channel header fields, in file order
CHANNEL_FIELDS = (
    ('labels', 16),
    ('transducers', 80),
    ('units', 8),
    ('physical_min', 8),
    ('physical_max', 8),
    ('digital_min', 8),
    ('digital_max', 8),
    ('prefiltering', 80),
    ('samples_per_record', 8),
    ('channel_reserved', 32),
)
NUMERIC_CHANNEL_FIELDS = {
    'physical_min': float,
    'physical_max': float,
    'digital_min': int,
    'digital_max': int,
    'samples_per_record': int,
}

# Format name for each file extension
EXTENSION_FORMATS = {
    '.bdf': 'bdf',
    '.csv': 'csv',
    '.txt': 'csv',
    '.f32': 'f32',
    '.f64': 'f64',
    '.raw': 'f64',
}
RAW_DTYPES = {
    'f32': np.dtype('<f4'),
    'f64': np.dtype('<f8'),
}


################################################################################
# BDF
################################################################################


class BdfRecording(object):
    """ A BDF header with each channel's digital samples, and the matching
        physical Signals (microvolts) after digital->physical scaling.
    """
    def __init__(self, header, digital):
        self.header = header
        digital = [np.array(d, dtype=np.int32) for d in digital]
        if len(digital) != header.num_channels:
            raise exceptions.DimensionError("Header declares {} channels but {} were given".format(
                header.num_channels, len(digital)))
        channels = []
        for index, samples in enumerate(digital):
            expected = header.num_records * header.samples_per_record[index]
            if samples.size != expected:
                raise exceptions.DimensionError(
                    "Channel {} has {} samples, header implies {}".format(
                        header.labels[index], samples.size, expected))
            samples.setflags(write=False)
            physical = digital_to_physical(samples, header.physical_min[index], header.physical_max[index],
                                           header.digital_min[index], header.digital_max[index],
                                           label=header.labels[index])
            channels.append(Signal(physical, header.sampling_rate(index), header.labels[index]))
        self.digital = tuple(digital)
        self.channels = tuple(channels)

    @property
    def labels(self):
        return list(self.header.labels)

    @classmethod
    def from_signals(cls, signals, record_duration=None, physical_range=None,
                     digital_range=(-8388608, 8388607), patient_id="", recording_id="",
                     start_date="01.01.00", start_time="00.00.00"):
        """ Build a recording from physical signals, eg to save cleaned data.
            The physical range defaults to the signals' own extremes; the
            record duration defaults to the longest one (up to 1 s) that
            divides every signal into whole records.
        """
        signals = list(signals)
        if not signals:
            raise exceptions.DimensionError("A recording needs at least one channel")
        if record_duration is None:
            record_duration = pick_record_duration(signals)
        if physical_range is None:
            low = min(float(s.samples.min()) for s in signals)
            high = max(float(s.samples.max()) for s in signals)
            physical_range = (np.floor(low) - 1.0, np.ceil(high) + 1.0)
        ranges = list(physical_range) if np.ndim(physical_range[0]) else [physical_range] * len(signals)

        samples_per_record = []
        num_records = None
        for signal in signals:
            spr = signal.fs * record_duration
            if abs(spr - round(spr)) > 1e-9 or round(spr) < 1:
                raise exceptions.DimensionError(
                    "Record duration {} s does not hold a whole number of samples at {} Hz".format(
                        record_duration, signal.fs))
            spr = int(round(spr))
            if len(signal) % spr:
                raise exceptions.DimensionError(
                    "Channel {} ({} samples) does not fill whole {} s records".format(
                        signal.label, len(signal), record_duration))
            if num_records is not None and len(signal) // spr != num_records:
                raise exceptions.DimensionError("Channels cover different durations")
            num_records = len(signal) // spr
            samples_per_record.append(spr)

        n = len(signals)
        header = BdfHeader(
            patient_id=patient_id, recording_id=recording_id,
            start_date=start_date, start_time=start_time,
            reserved=constants.BDF_VERSION_FIELD, num_records=num_records,
            record_duration=float(record_duration),
            labels=tuple(s.label for s in signals),
            transducers=("",) * n, units=("uV",) * n,
            physical_min=tuple(float(r[0]) for r in ranges),
            physical_max=tuple(float(r[1]) for r in ranges),
            digital_min=(int(digital_range[0]),) * n,
            digital_max=(int(digital_range[1]),) * n,
            prefiltering=("",) * n,
            samples_per_record=tuple(samples_per_record),
            channel_reserved=("",) * n)
        validate_bdf_header(header)
        digital = [physical_to_digital(s.samples, header.physical_min[i], header.physical_max[i],
                                       header.digital_min[i], header.digital_max[i])
                   for i, s in enumerate(signals)]
        return cls(header, digital)


class _FieldReader(object):
    """ Reads consecutive fixed-width ASCII fields from the header bytes. """
    def __init__(self, data, offset):
        self.data = data
        self.offset = offset

    def text(self, width):
        raw = self.data[self.offset:self.offset + width]
        self.offset += width
        return raw.decode('latin-1').strip()

    def number(self, width, field, kind=float):
        value = self.text(width)
        try:
            if kind is int:
                number = float(value)
                if number != int(number):
                    raise ValueError(value)
                return int(number)
            return float(value)
        except (ValueError, OverflowError):
            raise exceptions.HeaderParseError(field, value)


def read_bdf(stream):
    """ Parse a BDF file (path, bytes or binary stream) into a BdfRecording.
    """
    data = _read_bytes(stream)
    if len(data) < constants.BDF_HEADER_BYTES:
        raise exceptions.TruncationError("File ends inside the main header", len(data))
    if data[:8] != constants.BDF_MAGIC:
        raise exceptions.SignalFormatError(
            "Not a BDF file: expected 0xFF 'BIOSEMI' magic bytes, found {!r}".format(data[:8]))

    main = _FieldReader(data, 8)
    patient_id = main.text(80)
    recording_id = main.text(80)
    start_date = main.text(8)
    start_time = main.text(8)
    header_bytes = main.number(8, 'header_bytes', int)
    reserved = main.text(44)
    num_records = main.number(8, 'num_records', int)
    record_duration = main.number(8, 'record_duration')
    num_channels = main.number(4, 'num_channels', int)
    if num_channels < 1:
        raise exceptions.SignalFormatError("BDF header declares {} channels".format(num_channels))
    if record_duration <= 0:
        raise exceptions.SignalFormatError("BDF record duration must be positive, not {}".format(record_duration))

    expected_header = constants.BDF_HEADER_BYTES * (num_channels + 1)
    if header_bytes != expected_header:
        raise exceptions.SignalFormatError("Header size field says {} bytes, {} channels need {}".format(
            header_bytes, num_channels, expected_header))
    if len(data) < header_bytes:
        raise exceptions.TruncationError("File ends inside the channel headers", len(data))

    fields = {}
    reader = _FieldReader(data, constants.BDF_HEADER_BYTES)
    for name, width in CHANNEL_FIELDS:
        kind = NUMERIC_CHANNEL_FIELDS.get(name)
        if kind is None:
            fields[name] = tuple(reader.text(width) for i in range(num_channels))
        else:
            fields[name] = tuple(reader.number(width, "{} (channel {})".format(name, i + 1), kind)
                                 for i in range(num_channels))

    header = BdfHeader(patient_id=patient_id, recording_id=recording_id, start_date=start_date,
                       start_time=start_time, reserved=reserved, num_records=num_records,
                       record_duration=record_duration, **fields)
    validate_bdf_header(header, allow_unknown_records=True)

    spr = np.array(header.samples_per_record)
    record_bytes = constants.BDF_SAMPLE_BYTES * int(spr.sum())
    body = np.frombuffer(data, dtype=np.uint8, offset=header_bytes)
    if num_records < 0:
        # -1 means the recorder did not know the count when writing the header
        num_records = body.size // record_bytes
        header = header._replace(num_records=num_records)
    expected = num_records * record_bytes
    if body.size < expected:
        complete = body.size // record_bytes
        raise exceptions.TruncationError(
            "Data record {} of {} is incomplete".format(complete + 1, num_records),
            header_bytes + complete * record_bytes)
    if body.size > expected:
        logger.warning("Ignoring {} bytes after the last data record".format(body.size - expected))

    records = body[:expected].reshape(num_records, record_bytes)
    offsets = np.concatenate([[0], np.cumsum(spr)]) * constants.BDF_SAMPLE_BYTES
    digital = []
    for index in range(header.num_channels):
        raw = records[:, offsets[index]:offsets[index + 1]].reshape(-1, 3).astype(np.int32)
        ints = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        ints[ints >= (1 << 23)] -= (1 << 24)
        digital.append(ints)
    logger.debug("Read BDF with {} channels, {} records of {} s".format(
        header.num_channels, num_records, record_duration))
    return BdfRecording(header, digital)


def write_bdf(recording):
    """ Serialise a BdfRecording to bytes, the inverse of read_bdf. """
    header = recording.header
    out = io.BytesIO()
    out.write(constants.BDF_MAGIC)
    out.write(_field(header.patient_id, 80))
    out.write(_field(header.recording_id, 80))
    out.write(_field(header.start_date, 8))
    out.write(_field(header.start_time, 8))
    out.write(_field(header.header_bytes, 8))
    out.write(_field(header.reserved, 44))
    out.write(_field(header.num_records, 8))
    out.write(_field(header.record_duration, 8))
    out.write(_field(header.num_channels, 4))
    for name, width in CHANNEL_FIELDS:
        for value in getattr(header, name):
            out.write(_field(value, width))

    blocks = []
    for index, samples in enumerate(recording.digital):
        ints = samples.astype(np.int32).reshape(header.num_records, header.samples_per_record[index])
        ints = np.where(ints < 0, ints + (1 << 24), ints).astype(np.uint32)
        block = np.stack([ints & 0xFF, (ints >> 8) & 0xFF, (ints >> 16) & 0xFF], axis=-1)
        blocks.append(block.reshape(header.num_records, -1).astype(np.uint8))
    out.write(np.concatenate(blocks, axis=1).tobytes())
    return out.getvalue()


def validate_bdf_header(header, allow_unknown_records=False):
    if header.num_records < 0 and not allow_unknown_records:
        raise exceptions.SignalFormatError("Number of records must be known when writing")
    for index, label in enumerate(header.labels):
        if not header.physical_max[index] > header.physical_min[index]:
            raise exceptions.SignalFormatError("Channel {}: physical maximum {} is not above minimum {}".format(
                label, header.physical_max[index], header.physical_min[index]))
        if not header.digital_max[index] > header.digital_min[index]:
            raise exceptions.SignalFormatError("Channel {}: digital maximum {} is not above minimum {}".format(
                label, header.digital_max[index], header.digital_min[index]))
        if header.samples_per_record[index] < 1:
            raise exceptions.SignalFormatError("Channel {}: no samples per record".format(label))


def digital_to_physical(digital, physical_min, physical_max, digital_min, digital_max, label=""):
    """ Affine map of digital values onto [physical_min, physical_max].
        Values outside the digital range are clamped (railed amplifiers
        produce them) and reported as a warning.
    """
    digital = np.asarray(digital, dtype=np.int64)
    clamped = np.clip(digital, digital_min, digital_max)
    n_clamped = int(np.count_nonzero(clamped != digital))
    if n_clamped:
        logger.warning("Clamped {} samples outside the digital range of channel {}".format(n_clamped, label))
    gain = (physical_max - physical_min) / float(digital_max - digital_min)
    physical = physical_min + (clamped - digital_min) * gain
    return np.where(clamped == digital_max, physical_max, physical)


def physical_to_digital(physical, physical_min, physical_max, digital_min, digital_max):
    gain = (physical_max - physical_min) / float(digital_max - digital_min)
    digital = np.round((np.asarray(physical, dtype=np.float64) - physical_min) / gain) + digital_min
    return np.clip(digital, digital_min, digital_max).astype(np.int32)


def pick_record_duration(signals):
    """ Longest record duration, at most 1 s, splitting every signal into
        whole records and written exactly in the 8 character header field.
    """
    n = len(signals[0])
    fs = signals[0].fs
    for spr in range(min(int(fs), n), 0, -1):
        if n % spr:
            continue
        duration = spr / fs
        text = _format_number(duration)
        if len(text) <= 8 and float(text) * fs == spr and \
                all((s.fs * duration) == round(s.fs * duration) and len(s) % round(s.fs * duration) == 0
                    for s in signals):
            return duration
    raise exceptions.DimensionError("No BDF record duration fits {} samples at {} Hz".format(n, fs))


def _format_number(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if float(value).is_integer():
        return str(int(value))
    for digits in range(8, 0, -1):
        text = "{:.{}g}".format(value, digits)
        if len(text) <= 8:
            return text
    return repr(value)


def _field(value, width):
    text = value if isinstance(value, str) else _format_number(value)
    raw = text.encode('latin-1')
    if len(raw) > width:
        raise exceptions.SignalFormatError("Value {!r} does not fit a {} byte header field".format(text, width))
    return raw.ljust(width, b' ')


################################################################################
# CSV AND RAW
################################################################################


def read_csv(stream, fs, label=None):
    """ One value per line, '.' decimal separator. A non-numeric first line
        is taken as a header naming the channel.
    """
    text = _read_text(stream)
    values = []
    for number, line in enumerate(text.splitlines(), 1):
        token = line.strip()
        if not token:
            continue
        try:
            value = float(token)
        except ValueError:
            if number == 1:
                label = label or token
                continue
            raise exceptions.ParseError("could not parse {!r} as a number".format(token), number)
        if not np.isfinite(value):
            raise exceptions.ParseError("non-finite value {!r}".format(token), number)
        values.append(value)
    if not values:
        raise exceptions.SignalFormatError("CSV input holds no samples")
    return Signal(values, fs, label or "EEG")


def read_raw(stream, fs, encoding='f64', label="EEG"):
    """ Little-endian IEEE-754 floats, 32 or 64 bit. """
    dtype = _raw_dtype(encoding)
    data = _read_bytes(stream)
    if len(data) % dtype.itemsize:
        raise exceptions.SignalFormatError("Raw input of {} bytes is not a whole number of {} byte samples".format(
            len(data), dtype.itemsize))
    samples = np.frombuffer(data, dtype=dtype).astype(np.float64)
    if not np.all(np.isfinite(samples)):
        bad = int(np.flatnonzero(~np.isfinite(samples))[0])
        raise exceptions.SignalFormatError("Non-finite raw sample at index {}".format(bad))
    return Signal(samples, fs, label)


def write_signal(signal, format='csv'):
    """ Serialise a signal: 'csv' gives text, 'f32'/'f64'/'bdf' give bytes. """
    if format == 'csv':
        lines = [signal.label] + [repr(float(v)) for v in signal.samples]
        return "\n".join(lines) + "\n"
    if format in RAW_DTYPES:
        return signal.samples.astype(RAW_DTYPES[format]).tobytes()
    if format == 'bdf':
        return write_bdf(BdfRecording.from_signals([signal]))
    raise exceptions.SignalFormatError("Unknown signal format \"{}\"".format(format))


################################################################################
# SELECTION
################################################################################


def select_channel(recording, label):
    """ The channel called label from a BdfRecording or a list of Signals. """
    channels = getattr(recording, "channels", recording)
    for channel in channels:
        if channel.label == label:
            return channel
    raise exceptions.ChannelError(label, [c.label for c in channels])


def slice_signal(signal, start_s, end_s):
    """ Samples from start_s (inclusive) to end_s (exclusive), in seconds. """
    if end_s <= start_s:
        raise exceptions.DimensionError("Slice end {} s is not after its start {} s".format(end_s, start_s))
    half_sample = 0.5 / signal.fs
    if start_s < 0 or end_s > signal.duration + half_sample:
        raise exceptions.DimensionError("Slice {}-{} s is outside the {:.3f} s signal \"{}\"".format(
            start_s, end_s, signal.duration, signal.label))
    start = int(round(start_s * signal.fs))
    stop = min(int(round(end_s * signal.fs)), len(signal))
    if stop <= start:
        raise exceptions.DimensionError("Slice {}-{} s holds no samples".format(start_s, end_s))
    return signal.replace(samples=signal.samples[start:stop])


def concat_signals(signals, label=None):
    """ Join signals end to end, eg clean sections into one reference. """
    signals = list(signals)
    if not signals:
        raise exceptions.DimensionError("Nothing to concatenate")
    if len(set(s.fs for s in signals)) > 1:
        raise exceptions.DimensionError("Cannot concatenate signals with different sampling rates")
    return Signal(np.concatenate([s.samples for s in signals]), signals[0].fs, label or signals[0].label)


################################################################################
# FILES
################################################################################


def guess_format(path, format=None):
    if format:
        return format
    ext = os.path.splitext(path)[1].lower()
    try:
        return EXTENSION_FORMATS[ext]
    except KeyError:
        raise exceptions.SignalFormatError("Cannot tell the format of \"{}\", give one of: {}".format(
            path, ", ".join(sorted(set(EXTENSION_FORMATS.values())))))


def load_recording(path, format=None, fs=None, label=None):
    """ Load any supported file as a list of channel Signals. """
    format = guess_format(path, format)
    if format == 'bdf':
        with _open(path, 'rb') as f:
            return list(read_bdf(f).channels)
    if fs is None:
        raise exceptions.ConfigError("A sampling frequency is needed to read {} file \"{}\"".format(format, path))
    if format == 'csv':
        with _open(path, 'r') as f:
            return [read_csv(f, fs, label)]
    with _open(path, 'rb') as f:
        return [read_raw(f, fs, format, label or "EEG")]


def load_signal(path, format=None, fs=None, channel=None):
    """ Load one channel; BDF files need a channel label. """
    format = guess_format(path, format)
    if format != 'bdf':
        return load_recording(path, format, fs, channel)[0]
    channels = load_recording(path, format)
    if channel is None and len(channels) == 1:
        return channels[0]
    for signal in channels:
        if signal.label == channel:
            return signal
    raise exceptions.ChannelError(channel, [c.label for c in channels])


def save_signals(path, signals, format=None, template=None):
    """ Write signals to path. CSV and raw files hold a single channel;
        BDF files hold all of them, reusing the physical range of the
        template header's channels of the same label where possible.
    """
    format = guess_format(path, format)
    signals = list(signals)
    if format == 'bdf':
        physical_range = None
        if template is not None:
            ranges = []
            for signal in signals:
                if signal.label not in template.labels:
                    ranges = None
                    break
                index = template.labels.index(signal.label)
                low, high = template.physical_min[index], template.physical_max[index]
                ranges.append((min(low, np.floor(signal.samples.min())), max(high, np.ceil(signal.samples.max()))))
            physical_range = ranges
        duration = None
        if template is not None:
            sizes = [int(round(s.fs * template.record_duration)) for s in signals]
            if all(size >= 1 and len(s) % size == 0 for s, size in zip(signals, sizes)):
                duration = template.record_duration
        payload = write_bdf(BdfRecording.from_signals(signals, record_duration=duration,
                                                      physical_range=physical_range))
    else:
        if len(signals) != 1:
            raise exceptions.SignalFormatError("{} files hold one channel, got {}".format(format, len(signals)))
        payload = write_signal(signals[0], format)
    mode = 'w' if isinstance(payload, str) else 'wb'
    with _open(path, mode) as f:
        f.write(payload)


def _open(path, mode):
    try:
        if 'b' in mode:
            return open(path, mode)
        return open(path, mode, encoding='utf-8', newline='' if 'r' in mode else '\n')
    except (IOError, OSError) as e:
        raise exceptions.SignalFileError("Cannot open \"{}\": {}".format(path, e.strerror or e))


def _read_bytes(stream):
    if isinstance(stream, (bytes, bytearray, memoryview)):
        return bytes(stream)
    if isinstance(stream, str):
        with _open(stream, 'rb') as f:
            return f.read()
    return stream.read()


def _read_text(stream):
    if isinstance(stream, str):
        return stream
    data = stream.read()
    if isinstance(data, bytes):
        data = data.decode('utf-8')
    return data


def _raw_dtype(encoding):
    try:
        return RAW_DTYPES[encoding]
    except KeyError:
        raise exceptions.SignalFormatError("Raw encoding must be one of {}, not \"{}\"".format(
            ", ".join(sorted(RAW_DTYPES)), encoding))
