class EasrError(Exception):
    category = 'error'
    exit_code = 3

    def __init__(self, msg):
        self.msg = msg

    def __str__(self):
        return "{}({})".format(self.__class__.__name__, repr(self.msg))


class SignalFileError(EasrError):
    category = 'file'
    exit_code = 2


class SignalFormatError(EasrError):
    category = 'format'
    exit_code = 2


class HeaderParseError(SignalFormatError):
    def __init__(self, field, value):
        self.field = field
        self.value = value
        self.msg = "Could not parse BDF header field \"{}\" from {}".format(field, repr(value))


class TruncationError(SignalFormatError):
    def __init__(self, msg, offset):
        self.offset = offset
        self.msg = "{} (at byte offset {})".format(msg, offset)


class ParseError(SignalFormatError):
    def __init__(self, msg, line):
        self.line = line
        self.msg = "line {}: {}".format(line, msg)


class ChannelError(SignalFormatError):
    def __init__(self, label, available):
        self.label = label
        self.available = list(available)
        if label is None:
            self.msg = "No channel given, available channels: {}".format(", ".join(self.available))
        else:
            self.msg = "Unknown channel \"{}\", available channels: {}".format(label, ", ".join(self.available))


class ConfigError(EasrError):
    category = 'config'
    exit_code = 1


class DimensionError(EasrError):
    category = 'dimension'
    exit_code = 3


class NumericError(EasrError):
    category = 'numeric'
    exit_code = 3


class CalibrationError(NumericError):
    pass
