""" Artifact subspace reconstruction on a channels x samples matrix.

    Calibration keeps the 1 s windows that look clean, learns a mixing
    matrix (square root of their covariance) and fits the distribution of
    clean per-component RMS values to set the rejection thresholds.
    Processing walks non-overlapping windows; any window principal
    component whose variance exceeds the threshold projected onto it is
    dropped and the window is rebuilt from the rest.
"""
import json
import base64
import collections

import numpy as np
from scipy import linalg
from scipy import special
from scipy import stats

from easr import constants
from easr import exceptions
from easr.base import logger, window_bounds, parallel_map


AsrConfig = collections.namedtuple(
    "AsrConfig", "cutoff_k,calib_window_s,process_window_s,z_min,z_max",
    defaults=(constants.DEFAULT_CUTOFF_K, constants.DEFAULT_CALIB_WINDOW_S, constants.DEFAULT_PROCESS_WINDOW_S,
              constants.DEFAULT_Z_MIN, constants.DEFAULT_Z_MAX))

# One entry per processed window, components indexed in ascending eigenvalue order
WindowRejection = collections.namedtuple("WindowRejection", "start,stop,rejected")


def validate_asr_config(config):
    if not config.cutoff_k > 0:
        raise exceptions.ConfigError("Cut-off k must be positive, not {}".format(config.cutoff_k))
    if not config.calib_window_s > 0 or not config.process_window_s > 0:
        raise exceptions.ConfigError("ASR window lengths must be positive")
    if not config.z_min < config.z_max:
        raise exceptions.ConfigError("z range must satisfy z_min < z_max, got {} and {}".format(
            config.z_min, config.z_max))


class AsrState(object):
    """ Calibration output: everything process() needs.

        mixing      M x M symmetric square root of the calibration covariance
        threshold   M x M, diag(T_i) . V_C^T
        eigvecs     V_C, columns sorted by ascending eigenvalue
        eigvals     D_C
        mu, sigma   mean and standard deviation of the clean-EEG distribution
                    fitted to each component's calibration window RMS
        thresholds  T_i = mu_i + k * sigma_i

    reconstruction_mixing is derived, not stored: the mixing matrix with
    eigenvalues lifted to RECONSTRUCTION_FLOOR of the largest so that the
    reconstruction inverse stays bounded.
    """
    MATRICES = ('mixing', 'threshold', 'eigvecs', 'eigvals', 'mu', 'sigma', 'thresholds')

    def __init__(self, mixing, threshold, eigvecs, eigvals, mu, sigma, thresholds, cutoff_k, n_clean_windows=0):
        for name, value in zip(self.MATRICES, (mixing, threshold, eigvecs, eigvals, mu, sigma, thresholds)):
            value = np.array(value, dtype=np.float64)
            value.setflags(write=False)
            setattr(self, name, value)
        self.cutoff_k = float(cutoff_k)
        self.n_clean_windows = int(n_clean_windows)
        peak = max(float(np.max(self.eigvals)), 0.0) if self.eigvals.size else 0.0
        roots = np.sqrt(np.maximum(self.eigvals, constants.RECONSTRUCTION_FLOOR * peak))
        self.reconstruction_mixing = (self.eigvecs * roots) @ self.eigvecs.T

    @property
    def dimension(self):
        return self.mixing.shape[0]

    def with_cutoff(self, cutoff_k):
        """ Same calibration statistics, thresholds recomputed for another k. """
        thresholds = self.mu + cutoff_k * self.sigma
        return AsrState(self.mixing, np.diag(thresholds) @ self.eigvecs.T, self.eigvecs, self.eigvals,
                        self.mu, self.sigma, thresholds, cutoff_k, self.n_clean_windows)

    def to_json(self):
        """ Versioned document; matrices are base64 of row-major little-endian float64. """
        doc = collections.OrderedDict()
        doc['format'] = constants.STATE_FORMAT
        doc['version'] = constants.STATE_VERSION
        doc['dimension'] = self.dimension
        doc['cutoff_k'] = self.cutoff_k
        doc['n_clean_windows'] = self.n_clean_windows
        doc['matrices'] = collections.OrderedDict(
            (name, {'shape': list(getattr(self, name).shape),
                    'data': base64.b64encode(np.ascontiguousarray(getattr(self, name), dtype='<f8').tobytes())
                    .decode('ascii')})
            for name in self.MATRICES)
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except ValueError as e:
            raise exceptions.SignalFormatError("ASR state is not valid JSON: {}".format(e))
        if doc.get('format') != constants.STATE_FORMAT:
            raise exceptions.SignalFormatError("Not an ASR state document")
        if doc.get('version') != constants.STATE_VERSION:
            raise exceptions.SignalFormatError("Unsupported ASR state version {}".format(doc.get('version')))
        values = {}
        try:
            for name in cls.MATRICES:
                entry = doc['matrices'][name]
                raw = base64.b64decode(entry['data'])
                values[name] = np.frombuffer(raw, dtype='<f8').reshape(entry['shape'])
        except (KeyError, ValueError, TypeError) as e:
            raise exceptions.SignalFormatError("Damaged ASR state document: {}".format(e))
        return cls(cutoff_k=doc.get('cutoff_k', constants.DEFAULT_CUTOFF_K),
                   n_clean_windows=doc.get('n_clean_windows', 0), **values)


################################################################################
# LINEAR ALGEBRA
################################################################################


def sorted_eigh(matrix):
    """ Eigenvalues ascending, each eigenvector's largest-magnitude entry
        made positive so repeated runs give identical bases.
    """
    eigvals, eigvecs = linalg.eigh(matrix)
    order = np.argsort(eigvals, kind='stable')
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    pivots = eigvecs[np.argmax(np.abs(eigvecs), axis=0), np.arange(eigvecs.shape[1])]
    eigvecs = eigvecs * np.where(pivots < 0, -1.0, 1.0)
    return eigvals, eigvecs


def matrix_sqrt_psd(matrix):
    """ Symmetric S with S . S = C for a symmetric positive semi-definite C.
        Eigenvalues below 1e-12 of the largest are treated as zero.
    """
    c = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise exceptions.DimensionError("Matrix square root needs a square matrix, got {}".format(c.shape))
    scale = max(np.max(np.abs(c)), 1.0)
    if np.max(np.abs(c - c.T)) > constants.SYMMETRY_TOLERANCE * scale:
        raise exceptions.NumericError("Matrix square root input is not symmetric")
    eigvals, eigvecs = sorted_eigh((c + c.T) / 2.0)
    floor = constants.EIGENVALUE_FLOOR * max(eigvals.max(), 0.0)
    roots = np.sqrt(np.where(eigvals > floor, eigvals, 0.0))
    root = (eigvecs * roots) @ eigvecs.T
    return (root + root.T) / 2.0


def pinv(matrix):
    """ Moore-Penrose pseudoinverse by SVD, singular values below 1e-12 of
        the largest treated as zero.
    """
    a = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    return linalg.pinv(a, atol=0.0, rtol=constants.PINV_RCOND)


def covariance(data):
    """ Rows as variables, per-row mean removed, 1/(n-1) normalisation. """
    return np.atleast_2d(np.cov(data, rowvar=True, ddof=1))


def robust_zscore(values):
    """ z-scores against the median and normal-scaled MAD, falling back to
        mean and standard deviation when the MAD is zero. A constant (or
        single) set of values scores 0 throughout.
    """
    values = np.asarray(values, dtype=np.float64)
    center = np.median(values)
    scale = stats.median_abs_deviation(values, scale='normal')
    if not scale > 0:
        center = np.mean(values)
        scale = np.std(values)
    if not scale > 0:
        return np.zeros_like(values)
    return (values - center) / scale


def fit_clean_distribution(values):
    """ Mean and standard deviation of the clean part of a sample of window
        RMS values that may hold artifacts.

        A truncated generalized Gaussian is fitted to the lower quantiles of
        the sorted values by a grid search over the lower cut (stepping over
        dropouts), the width of the clean interval and the shape, keeping the
        histogram with the smallest Kullback-Leibler divergence. Larger
        artifacts sit above the fitted interval and do not move the result.
        Too few windows, or no spread, fall back to mean and standard
        deviation. Returns (mu, sigma).
    """
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = x.size
    if n < constants.FIT_MIN_WINDOWS or not x[-1] > x[0]:
        return float(np.mean(x)), float(np.std(x))

    quantiles = np.array(constants.FIT_QUANTILES)
    lower_step, width_step = constants.FIT_STEP_SIZES
    shapes = np.linspace(*constants.FIT_SHAPES)
    # quantile bounds of the standard generalized Gaussian, one row per shape
    signs = np.sign(quantiles - 0.5)
    zbounds = np.array([signs * special.gammaincinv(1.0 / b, signs * (2.0 * quantiles - 1.0)) ** (1.0 / b)
                        for b in shapes])

    max_width = quantiles[1] - quantiles[0]
    min_width = constants.FIT_MIN_CLEAN_FRACTION * max_width
    lowers = np.round(n * np.arange(quantiles[0], quantiles[0] + constants.FIT_MAX_DROPOUT_FRACTION
                                    + lower_step * 1e-9, lower_step)).astype(int)
    n_rows = int(np.round(n * max_width))
    offsets = x[np.minimum(np.arange(n_rows)[:, None] + lowers[None, :], n - 1)] - x[lowers][None, :]

    best_kl, best = np.inf, None
    for m in np.round(n * np.arange(max_width, min_width, -width_step)).astype(int):
        if not 2 <= m <= n_rows:
            continue
        n_bins = int(np.round(3 * np.log2(1 + m / 2.0)))
        spans = offsets[m - 1]
        valid = spans > 0
        scaled = offsets[:m] * np.where(valid, n_bins / np.where(valid, spans, 1.0), 0.0)
        bins = np.clip(np.floor(scaled).astype(int), 0, n_bins - 1)
        log_counts = np.log(np.stack([np.bincount(column, minlength=n_bins) for column in bins.T]) + 0.01)
        centers = (np.arange(n_bins) + 0.5) / n_bins
        for shape, (low, high) in zip(shapes, zbounds):
            p = np.exp(-np.abs(low + centers * (high - low)) ** shape)
            p /= p.sum()
            kl = np.sum(p * (np.log(p) - log_counts), axis=1) + np.log(m)
            kl[~valid] = np.inf
            i = int(np.argmin(kl))
            if kl[i] < best_kl:
                best_kl, best = kl[i], (shape, low, high, x[lowers[i]], spans[i])

    if best is None:
        return float(np.mean(x)), float(np.std(x))
    shape, low, high, lower, span = best
    alpha = span / (high - low)
    mu = lower - low * alpha
    sigma = np.sqrt(alpha ** 2 * special.gamma(3.0 / shape) / special.gamma(1.0 / shape))
    return float(mu), float(sigma)


def window_rms(components, window, n_windows):
    """ RMS about the window mean of each row over consecutive windows:
        (rows, n_windows).
    """
    blocks = components[:, :n_windows * window].reshape(components.shape[0], n_windows, window)
    return np.std(blocks, axis=2)


################################################################################
# CALIBRATION
################################################################################


def clean_windows(data, fs, config=None):
    """ Flag the non-overlapping calibration windows of data (channels x
        samples) whose every component RMS z-score lies strictly inside
        (z_min, z_max). Components come from the covariance of all of data.
        Returns (mask over windows, window length in samples).
    """
    config = config or AsrConfig()
    x = np.atleast_2d(np.asarray(data, dtype=np.float64))
    window = int(round(fs * config.calib_window_s))
    n_windows = x.shape[1] // window if window else 0
    if n_windows < 1:
        raise exceptions.CalibrationError(
            "Calibration needs at least one full {} s window ({} samples), got {} samples".format(
                config.calib_window_s, window, x.shape[1]))
    _, eigvecs = sorted_eigh(covariance(x))
    rms = window_rms(eigvecs.T @ x, window, n_windows)
    z = np.vstack([robust_zscore(row) for row in rms])
    return np.all((z > config.z_min) & (z < config.z_max), axis=0), window


def calibrate(data, fs, config=None):
    """ Learn the mixing matrix and rejection thresholds from data
        (channels x samples). Only the windows clean_windows() keeps feed
        the covariance and the per-component RMS statistics.
    """
    config = config or AsrConfig()
    validate_asr_config(config)
    x = np.atleast_2d(np.asarray(data, dtype=np.float64))
    n_channels = x.shape[0]
    clean, window = clean_windows(x, fs, config)
    n_windows = clean.size
    n_clean = int(np.count_nonzero(clean))
    if not n_clean:
        raise exceptions.CalibrationError(
            "No clean calibration windows among {}; use a longer recording".format(n_windows))
    logger.debug("Calibration kept {} of {} windows of {} samples".format(n_clean, n_windows, window))

    blocks = x[:, :n_windows * window].reshape(n_channels, n_windows, window)
    calibration = blocks[:, clean, :].reshape(n_channels, n_clean * window)
    cov = covariance(calibration)
    mixing = matrix_sqrt_psd(cov)
    eigvals, eigvecs = sorted_eigh(cov)

    rms = window_rms(eigvecs.T @ calibration, window, n_clean)
    mu, sigma = (np.array(column) for column in zip(*[fit_clean_distribution(row) for row in rms]))
    thresholds = mu + config.cutoff_k * sigma
    threshold = np.diag(thresholds) @ eigvecs.T
    return AsrState(mixing, threshold, eigvecs, eigvals, mu, sigma, thresholds, config.cutoff_k, n_clean)


################################################################################
# PROCESSING
################################################################################


def rejected_components(window_data, state):
    """ Eigen-decompose one window; return (eigvals, eigvecs, rejected mask). """
    cov = covariance(window_data)
    eigvals, eigvecs = sorted_eigh(cov)
    limits = np.sum((state.threshold @ eigvecs) ** 2, axis=0)
    return eigvals, eigvecs, eigvals > limits


def reconstruction_matrix(state, eigvecs, rejected):
    """ M . pinv(trunc(V^T . M)) . V^T, rows of rejected components zeroed,
        with M the state's reconstruction_mixing. The result is a projector
        that sends the rejected window directions to zero.
    """
    mixing = state.reconstruction_mixing
    projected = eigvecs.T @ mixing
    projected[rejected, :] = 0.0
    return mixing @ pinv(projected) @ eigvecs.T


def process_window(window_data, state):
    """ Clean one window. Returns (clean window, indices of rejected components). """
    if not np.any(np.var(window_data, axis=1) > 0):
        return window_data, ()
    eigvals, eigvecs, rejected = rejected_components(window_data, state)
    if not np.any(rejected):
        return window_data, ()
    cleaned = reconstruction_matrix(state, eigvecs, rejected) @ window_data
    before, after = np.linalg.norm(window_data), np.linalg.norm(cleaned)
    if after > before + 1e-6:
        logger.debug("Reconstructed window grew from norm {:.6g} to {:.6g}".format(before, after))
    return cleaned, tuple(int(i) for i in np.flatnonzero(rejected))


def process(data, state, fs, config=None, jobs=1):
    """ Clean data window by window with a calibrated state.
        Returns (cleaned matrix, list of WindowRejection). A trailing window
        shorter than 2 samples is passed through.
    """
    config = config or AsrConfig()
    validate_asr_config(config)
    x = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if x.shape[0] != state.dimension:
        raise exceptions.DimensionError("Data has {} channels but the ASR state was calibrated on {}".format(
            x.shape[0], state.dimension))
    window = max(int(round(fs * config.process_window_s)), 1)
    bounds = window_bounds(x.shape[1], window, min_tail=2)

    def run(bound):
        start, stop, usable = bound
        if not usable:
            return x[:, start:stop], ()
        return process_window(x[:, start:stop], state)

    results = parallel_map(run, bounds, jobs)
    cleaned = np.concatenate([r[0] for r in results], axis=1)
    report = [WindowRejection(start, stop, rejected) for (start, stop, usable), (_, rejected) in zip(bounds, results)]
    n_rejecting = sum(1 for r in report if r.rejected)
    logger.debug("ASR rejected components in {} of {} windows".format(n_rejecting, len(report)))
    return cleaned, report


def rejection_counts(report):
    """ Number of rejected components per window. """
    return [len(r.rejected) for r in report]
