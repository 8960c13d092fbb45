""" The configuration file: one INI section per module config.

        [preprocess]
        bandpass_low = 0.5
        notch_freq = none

        [asr]
        cutoff_k = 17

    Sections and keys mirror the named tuples; anything else is an error.
"""
import os
import collections
import configparser

from easr import constants
from easr import exceptions
from easr.asr import AsrConfig, validate_asr_config
from easr.base import logger
from easr.embedding import EmbeddingConfig, validate_embedding_config
from easr.metrics import BlinkConfig, validate_blink_config
from easr.pipeline import EasrConfig
from easr.preprocess import PreprocessConfig
from easr.semisim import SemiSimSpec

Settings = collections.namedtuple("Settings", "easr,blink,semisim",
                                  defaults=(EasrConfig(), BlinkConfig(), SemiSimSpec()))


def _optional_float(text):
    if text.strip().lower() in ('none', 'off', ''):
        return None
    return float(text)


def _boolean(text):
    try:
        return configparser.ConfigParser.BOOLEAN_STATES[text.strip().lower()]
    except KeyError:
        raise ValueError(text)


def _arrangement(text):
    """ "0:0 1:1 0:-" -> ((0, 0), (1, 1), (0, None)) """
    slots = []
    for token in text.replace(',', ' ').split():
        clean, blink = token.split(':')
        slots.append((int(clean), None if blink == '-' else int(blink)))
    return tuple(slots)


def _format_arrangement(arrangement):
    return " ".join("{}:{}".format(c, '-' if b is None else b) for c, b in arrangement)


def _format(value):
    if value is None:
        return 'none'
    if isinstance(value, bool):
        return 'yes' if value else 'no'
    return str(value)


# section -> (settings path, field -> parser); unlisted fields cannot be set from a file
SECTIONS = collections.OrderedDict([
    ('preprocess', (('easr', 'preprocess'), collections.OrderedDict([
        ('bandpass_low', float), ('bandpass_high', float), ('notch_freq', _optional_float),
        ('notch_q', float), ('filter_order', int), ('normalize', _boolean)]))),
    ('embedding', (('easr', 'embedding'), collections.OrderedDict([
        ('m', int), ('lag', int), ('f_low_of_interest', _optional_float)]))),
    ('asr', (('easr', 'asr'), collections.OrderedDict([
        ('cutoff_k', float), ('calib_window_s', float), ('process_window_s', float),
        ('z_min', float), ('z_max', float)]))),
    ('blink', (('blink',), collections.OrderedDict([
        ('threshold_constant', float), ('min_peak_distance_ms', float)]))),
    ('semisim', (('semisim',), collections.OrderedDict([
        ('snr_db', float), ('fs', float), ('arrangement', _arrangement), ('rng_seed', int),
        ('segment_s', float), ('blink_segment_s', float), ('jitter_s', float),
        ('blink_amplitude_uV', float), ('clean_rms_uV', float)]))),
])


def get_section(settings, section):
    value = settings
    for name in SECTIONS[section][0]:
        value = getattr(value, name)
    return value


def set_section(settings, section, value):
    path = SECTIONS[section][0]
    if len(path) == 1:
        return settings._replace(**{path[0]: value})
    parent = getattr(settings, path[0])
    return settings._replace(**{path[0]: parent._replace(**{path[1]: value})})


def parse_config(text, source="<config>"):
    """ Settings from INI text, starting from the defaults. """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise exceptions.ConfigError("Cannot parse {}: {}".format(source, e))

    settings = Settings()
    for section in parser.sections():
        if section not in SECTIONS:
            raise exceptions.ConfigError("Unknown section [{}] in {}, expected one of: {}".format(
                section, source, ", ".join(SECTIONS)))
        fields = SECTIONS[section][1]
        values = {}
        for key, raw in parser.items(section):
            if key not in fields:
                raise exceptions.ConfigError("Unknown key \"{}\" in [{}] of {}".format(key, section, source))
            try:
                values[key] = fields[key](raw)
            except ValueError:
                raise exceptions.ConfigError("Bad value {} for {}.{} in {}".format(repr(raw), section, key, source))
        settings = set_section(settings, section, get_section(settings, section)._replace(**values))
    validate_settings(settings)
    return settings


def load_config(path=None):
    """ Settings from path, or from $EASR_CONFIG, or the defaults. """
    path = path or os.environ.get(constants.CONFIG_ENVVAR)
    if not path:
        return Settings()
    try:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    except (IOError, OSError) as e:
        raise exceptions.ConfigError("Cannot read config file \"{}\": {}".format(path, e.strerror or e))
    logger.info("Loaded configuration from {}".format(path))
    return parse_config(text, source=path)


def validate_settings(settings):
    validate_embedding_config(settings.easr.embedding)
    validate_asr_config(settings.easr.asr)
    validate_blink_config(settings.blink)


def override(settings, **values):
    """ Replace individual fields by name, eg override(s, m=60, cutoff_k=5).
        None values are ignored, so unset command line flags can be passed
        straight through.
    """
    for key, value in values.items():
        if value is None:
            continue
        for section, (_, fields) in SECTIONS.items():
            if key in fields:
                settings = set_section(settings, section, get_section(settings, section)._replace(**{key: value}))
                break
        else:
            raise exceptions.ConfigError("Unknown setting \"{}\"".format(key))
    validate_settings(settings)
    return settings


def dump_config(settings):
    """ The effective settings as INI text that parse_config() reads back. """
    lines = []
    for section, (_, fields) in SECTIONS.items():
        config = get_section(settings, section)
        lines.append("[{}]".format(section))
        for key in fields:
            value = getattr(config, key)
            lines.append("{} = {}".format(key, _format_arrangement(value) if key == 'arrangement' else _format(value)))
        lines.append("")
    return "\n".join(lines)
