
# Pre-processing chain
DEFAULT_BANDPASS_LOW = 0.5
DEFAULT_BANDPASS_HIGH = 100.0
DEFAULT_NOTCH_FREQ = 50.0
DEFAULT_NOTCH_Q = 30.0
DEFAULT_FILTER_ORDER = 4

# Embedding: M=90 is used at both 500 Hz and 250 Hz, lag is always 1
DEFAULT_EMBEDDING_DIMENSION = 90
DEFAULT_LAG = 1

# ASR calibration and processing
DEFAULT_CUTOFF_K = 17.0
DEFAULT_CALIB_WINDOW_S = 1.0
DEFAULT_PROCESS_WINDOW_S = 0.5
DEFAULT_Z_MIN = -3.5
DEFAULT_Z_MAX = 5.5

# Eigenvalues below this fraction of the largest are treated as zero
EIGENVALUE_FLOOR = 1e-12
PINV_RCOND = 1e-12
SYMMETRY_TOLERANCE = 1e-10
# Reconstruction lifts calibration eigenvalues to this fraction of the largest
RECONSTRUCTION_FLOOR = 1e-6

# Clean-EEG fit of the calibration window RMS: truncated generalized Gaussian
FIT_QUANTILES = (0.022, 0.6)
FIT_STEP_SIZES = (0.022, 0.6)
FIT_SHAPES = (1.7, 3.5, 13)
FIT_MIN_CLEAN_FRACTION = 0.25
FIT_MAX_DROPOUT_FRACTION = 0.1
# Fewer windows than this fall back to plain mean and standard deviation
FIT_MIN_WINDOWS = 20

# Blink counting
DEFAULT_BLINK_CONSTANT = 6.0
DEFAULT_MIN_PEAK_DISTANCE_MS = 250.0

# EEG bands in Hz, [low, high)
BANDS = (
    ('delta', 0.5, 4.0),
    ('theta', 4.0, 8.0),
    ('alpha', 8.0, 13.0),
    ('beta', 13.0, 30.0),
    ('gamma', 30.0, 100.0),
)
WELCH_SEGMENT_S = 2.0

# Semi-simulated data
DEFAULT_FS = 500.0
DEFAULT_SNR_DB = 0.0
SNR_RANGE_DB = (-7.0, 2.0)
DEFAULT_SEGMENT_S = 10.0
DEFAULT_BLINK_SEGMENT_S = 2.0
DEFAULT_BLINK_AMPLITUDE_UV = 500.0
DEFAULT_CLEAN_RMS_UV = 10.0
# 1/(f + knee) background of the synthetic clean EEG
CLEAN_EEG_KNEE_HZ = 5.0
DEFAULT_JITTER_S = 1.0
DEFAULT_SEED = 4
# (clean segment, blink segment) per 10 s slot: A B A B A B with both blinks in turn
DEFAULT_ARRANGEMENT = ((0, 0), (1, 1), (0, 1), (1, 0), (0, 0), (1, 1))

# Published values, printed next to bench results
REFERENCE_RESULTS = (
    ('E-ASR (reference)', 43.87, 0.91),
    ('ASR 2-ch (reference)', 56.82, 0.85),
)
REFERENCE_BAND_POWER = {
    'contaminated': {'delta': 0.63, 'theta': 0.14, 'alpha': 0.04, 'beta': 0.15, 'gamma': 0.04},
    'cleaned': {'delta': 0.21, 'theta': 0.14, 'alpha': 0.10, 'beta': 0.44, 'gamma': 0.12},
    'ground_truth': {'delta': 0.23, 'theta': 0.15, 'alpha': 0.10, 'beta': 0.41, 'gamma': 0.10},
}

# BDF layout
BDF_MAGIC = b'\xffBIOSEMI'
BDF_HEADER_BYTES = 256
BDF_CHANNEL_HEADER_BYTES = 256
BDF_SAMPLE_BYTES = 3
BDF_VERSION_FIELD = '24BIT'

CONFIG_ENVVAR = 'EASR_CONFIG'
STATE_FORMAT = 'easr-state'
STATE_VERSION = 1
