# encoding: utf8
""" Semi-simulated contaminated EEG with known ground truth.

    Clean 10 s segments are tiled to one minute; 2 s blink segments are
    zero-padded to 10 s, placed in each slot and scaled by a mixing
    coefficient chosen for a target SNR: z = s + alpha * m.
"""
import collections

import numpy as np

from easr import constants
from easr import exceptions
from easr.base import Signal, logger, make_rng


SemiSimSpec = collections.namedtuple(
    "SemiSimSpec",
    "clean_segments,blink_segments,snr_db,fs,arrangement,rng_seed,"
    "segment_s,blink_segment_s,jitter_s,blink_amplitude_uV,clean_rms_uV",
    defaults=(None, None, constants.DEFAULT_SNR_DB, constants.DEFAULT_FS, constants.DEFAULT_ARRANGEMENT,
              constants.DEFAULT_SEED, constants.DEFAULT_SEGMENT_S, constants.DEFAULT_BLINK_SEGMENT_S,
              constants.DEFAULT_JITTER_S, constants.DEFAULT_BLINK_AMPLITUDE_UV, constants.DEFAULT_CLEAN_RMS_UV))

SemiSimResult = collections.namedtuple("SemiSimResult", "contaminated,ground_truth,alpha_used,blink_onsets,artifact")


################################################################################
# EQUATIONS
################################################################################


def rms(signal):
    samples = _samples(signal)
    if samples.size == 0:
        raise exceptions.DimensionError("RMS of an empty signal")
    return float(np.sqrt(np.mean(samples ** 2)))


def snr_db(clean, noise):
    """ 10 log10(RMS(s) / RMS(noise)): a ratio of RMS values, not powers. """
    return 10.0 * np.log10(rms(clean) / rms(noise))


def conventional_snr_db(clean, noise):
    """ The usual power-ratio SNR, exactly twice snr_db(). """
    return 20.0 * np.log10(rms(clean) / rms(noise))


def alpha_for_snr(clean, blink, target_db):
    """ Mixing coefficient giving snr_db(s, alpha * m) == target_db. """
    blink_rms = rms(blink)
    if not blink_rms > 0:
        raise exceptions.NumericError("Blink segment has zero RMS, no mixing coefficient reaches an SNR")
    return rms(clean) / (blink_rms * 10.0 ** (target_db / 10.0))


def pad_blink(blink, target_s, position=None):
    """ Zero-pad a blink segment to target_s seconds, the blink starting at
        sample offset position (centered when None).
    """
    target = int(round(target_s * blink.fs))
    n = len(blink)
    if n > target:
        raise exceptions.DimensionError("Blink segment ({} samples) is longer than the {} sample target".format(
            n, target))
    if position is None:
        position = (target - n) // 2
    position = int(position)
    if position < 0 or position + n > target:
        raise exceptions.DimensionError("Blink at offset {} does not fit in {} samples".format(position, target))
    padded = np.zeros(target)
    padded[position:position + n] = blink.samples
    return blink.replace(samples=padded)


################################################################################
# SYNTHETIC SEGMENTS
################################################################################


def synth_clean_eeg(duration_s, fs, seed, rms_uV=constants.DEFAULT_CLEAN_RMS_UV, label="EEG"):
    """ Gaussian noise shaped to a resting spectrum: 1/(f + knee) background
        plus an alpha peak at 10 Hz, limited to 0.5-100 Hz (below Nyquist).
        Each EEG band is then scaled so its share of the power matches the
        published ground-truth band profile. Zero mean, scaled to rms_uV.
    """
    n = int(round(duration_s * fs))
    rng = make_rng(seed, 'clean-eeg')
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    high = min(constants.DEFAULT_BANDPASS_HIGH, 0.9 * fs / 2.0)
    knee = constants.CLEAN_EEG_KNEE_HZ
    shape = 1.0 / (freqs + knee) + 0.3 * np.exp(-0.5 * ((freqs - 10.0) / 1.5) ** 2) / (10.0 + knee)
    shares = constants.REFERENCE_BAND_POWER['ground_truth']
    power = np.zeros_like(freqs)
    for name, low, band_high in constants.BANDS:
        band = (freqs >= max(low, constants.DEFAULT_BANDPASS_LOW)) & (freqs < band_high) & (freqs <= high)
        if np.any(band):
            power[band] = shares[name] * shape[band] / np.sum(shape[band])
    amplitude = np.sqrt(power)
    samples = np.fft.irfft(spectrum * amplitude, n=n)
    samples -= samples.mean()
    samples *= rms_uV / np.sqrt(np.mean(samples ** 2))
    return Signal(samples, fs, label)


def synth_blink(duration_s, fs, amplitude_uV=constants.DEFAULT_BLINK_AMPLITUDE_UV, seed=0, label="blink"):
    """ A smooth unimodal blink in the middle of a zero segment: a raised
        cosine rise and a slower raised cosine fall, 300-400 ms overall,
        peaking at exactly amplitude_uV.
    """
    rng = make_rng(seed, 'blink')
    width = rng.uniform(0.30, 0.40)
    rise = rng.uniform(0.35, 0.45) * width
    n = int(round(duration_s * fs))
    n_rise = max(int(round(rise * fs)), 1)
    n_fall = max(int(round((width - rise) * fs)), 1)
    peak = n // 2
    if peak - n_rise < 0 or peak + n_fall + 1 > n:
        raise exceptions.DimensionError("A {} ms blink does not fit in {} s".format(int(width * 1000), duration_s))
    offsets = np.arange(-n_rise, n_fall + 1)
    pulse = np.where(offsets <= 0,
                     0.5 * (1.0 - np.cos(np.pi * (offsets + n_rise) / n_rise)),
                     0.5 * (1.0 + np.cos(np.pi * offsets / n_fall)))
    samples = np.zeros(n)
    samples[peak - n_rise:peak + n_fall + 1] = pulse * amplitude_uV
    samples[peak] = amplitude_uV
    return Signal(samples, fs, label)


################################################################################
# CONSTRUCTION
################################################################################


def validate_semisim_spec(spec):
    if not spec.fs > 0:
        raise exceptions.ConfigError("Sampling frequency must be positive, not {}".format(spec.fs))
    if not spec.arrangement:
        raise exceptions.ConfigError("Arrangement needs at least one slot")
    for slot in spec.arrangement:
        if len(slot) != 2 or slot[0] not in (0, 1) or slot[1] not in (0, 1, None):
            raise exceptions.ConfigError("Arrangement slots are (clean 0|1, blink 0|1|None) pairs, not {}".format(
                slot))
    if spec.jitter_s < 0:
        raise exceptions.ConfigError("Blink jitter must not be negative")
    for segments, name in ((spec.clean_segments, 'clean'), (spec.blink_segments, 'blink')):
        if segments is None:
            continue
        if len(segments) != 2:
            raise exceptions.ConfigError("Two {} segments are needed, got {}".format(name, len(segments)))
        for segment in segments:
            if segment.fs != spec.fs:
                raise exceptions.ConfigError("{} segment \"{}\" is sampled at {} Hz, the simulation at {} Hz".format(
                    name, segment.label, segment.fs, spec.fs))
    low, high = constants.SNR_RANGE_DB
    if not low <= spec.snr_db <= high:
        logger.warning("SNR {} dB is outside the usual {} to {} dB range".format(spec.snr_db, low, high))


def build_semisim(spec=None, channel=0):
    """ Assemble the contaminated signal and its ground truth.

        Each arrangement slot pairs clean segment A or B with blink 1 or 2
        (or none). Blinks sit at the slot centre, jittered by up to
        jitter_s seconds. Additional channels (channel > 0) draw their own
        synthetic clean EEG but share blink shapes and timing, as
        neighbouring prefrontal electrodes would; user-supplied clean
        segments only feed channel 0.
    """
    spec = spec or SemiSimSpec()
    validate_semisim_spec(spec)
    fs = spec.fs
    label = "semisim{}".format(channel + 1)

    if spec.clean_segments is None or channel > 0:
        clean = [synth_clean_eeg(spec.segment_s, fs, _seed(spec.rng_seed, 'clean', channel, i), spec.clean_rms_uV)
                 for i in range(2)]
    else:
        clean = list(spec.clean_segments)
    if spec.blink_segments is None:
        blinks = [synth_blink(spec.blink_segment_s, fs, spec.blink_amplitude_uV, _seed(spec.rng_seed, 'blink', i))
                  for i in range(2)]
    else:
        blinks = list(spec.blink_segments)

    jitter = make_rng(spec.rng_seed, 'jitter')
    truth_parts, artifact_parts, onsets = [], [], []
    offset = 0
    for clean_index, blink_index in spec.arrangement:
        segment = clean[clean_index]
        n = len(segment)
        slot = np.zeros(n)
        if blink_index is not None:
            blink = blinks[blink_index]
            centre = (n - len(blink)) // 2
            shift = int(round(jitter.uniform(-spec.jitter_s, spec.jitter_s) * fs))
            position = int(np.clip(centre + shift, 0, n - len(blink)))
            slot = pad_blink(blink, n / fs, position).samples
            onsets.append(offset + position)
        truth_parts.append(segment.samples)
        artifact_parts.append(slot)
        offset += n

    truth = Signal(np.concatenate(truth_parts), fs, label)
    train = Signal(np.concatenate(artifact_parts), fs, "blinks")
    alpha = alpha_for_snr(truth, train, spec.snr_db)
    artifact = train.replace(samples=alpha * train.samples)
    contaminated = Signal(truth.samples + artifact.samples, fs, label)
    logger.info("Semi-simulated {}: {:.1f} s, {} blinks, SNR {} dB, alpha {:.4g}".format(
        label, contaminated.duration, len(onsets), spec.snr_db, alpha))
    return SemiSimResult(contaminated=contaminated, ground_truth=truth, alpha_used=alpha,
                         blink_onsets=tuple(onsets), artifact=artifact)


def _seed(seed, kind, *index):
    # independent integer seed per generated segment
    return int(make_rng(seed, kind, *index).integers(0, 2 ** 31 - 1))


def _samples(signal):
    if isinstance(signal, Signal):
        return signal.samples
    return np.asarray(signal, dtype=np.float64)
