import os

version_file = os.path.join(os.path.dirname(__file__), "VERSION")
with open(version_file, 'rb') as f:
    __version__ = f.read().decode('utf-8').strip()

from easr.base import Signal
from easr.signal_io import read_bdf, write_bdf, read_csv, read_raw, load_signal, save_signals
from easr.preprocess import preprocess
from easr.embedding import embed, diagonal_average, suggest_dimension
from easr.asr import calibrate, process
from easr.pipeline import EasrConfig, easr_clean, easr_clean_channels, asr_clean_multichannel
from easr.semisim import SemiSimSpec, build_semisim, alpha_for_snr
from easr.metrics import rrmse, correlation, band_power_ratios, count_blinks, percentage_reduction, full_report
