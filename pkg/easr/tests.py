#!/usr/bin/env python

import os
import json
import math
import unittest
from unittest import mock

import numpy as np
from click.testing import CliRunner

from easr import asr
from easr import bench
from easr import constants
from easr import exceptions
from easr import metrics
from easr import report
from easr import semisim
from easr import settings
from easr import signal_io
from easr import ui
from easr.base import Signal, window_bounds, parallel_map
from easr.embedding import EmbeddingConfig, EmbeddedMatrix, embed, diagonal_average, suggest_dimension, \
    embedding_report, validate_embedding_config
from easr.pipeline import EasrConfig, easr_clean, easr_clean_channels, asr_clean_multichannel
from easr.preprocess import PreprocessConfig, zero_center, bandpass, notch, preprocess

FS = 500.0


def white_noise(n, seed=0, rows=None):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n if rows is None else (rows, n))


def sine(freq, duration_s, fs=FS, amplitude=1.0):
    t = np.arange(int(round(duration_s * fs))) / fs
    return amplitude * np.sin(2 * np.pi * freq * t)


class SignalTests(unittest.TestCase):
    def test_invariants(self):
        with self.assertRaises(exceptions.ConfigError):
            Signal([1.0], 0)
        with self.assertRaises(exceptions.DimensionError):
            Signal([], FS)
        with self.assertRaises(exceptions.NumericError):
            Signal([1.0, float('nan')], FS)

    def test_immutable(self):
        signal = Signal([1.0, 2.0], FS, "Fp1")
        with self.assertRaises(AttributeError):
            signal.fs = 250
        with self.assertRaises(ValueError):
            signal.samples[0] = 5.0
        self.assertEqual(signal.replace(label="Fp2").label, "Fp2")
        self.assertEqual(signal.duration, 2 / FS)

    def test_window_bounds(self):
        self.assertEqual(window_bounds(10, 4, min_tail=2), [(0, 4, True), (4, 8, True), (8, 10, True)])
        self.assertEqual(window_bounds(9, 4, min_tail=2)[-1], (8, 9, False))

    def test_parallel_map_keeps_order(self):
        self.assertEqual(parallel_map(lambda x: x * x, range(20), jobs=4), [x * x for x in range(20)])


class BdfTests(unittest.TestCase):
    def header(self, **fields):
        values = dict(
            patient_id="", recording_id="", start_date="01.01.00", start_time="00.00.00",
            reserved="24BIT", num_records=1, record_duration=1.0, labels=("Fp1",), transducers=("",),
            units=("uV",), physical_min=(-262144.0,), physical_max=(262143.0,), digital_min=(-8388608,),
            digital_max=(8388607,), prefiltering=("",), samples_per_record=(3,), channel_reserved=("",))
        values.update(fields)
        return signal_io.BdfHeader(**values)

    def test_crafted_file(self):
        """ Three 24 bit samples decode and scale by the header's affine map. """
        data = signal_io.write_bdf(signal_io.BdfRecording(self.header(), [[0, 1, -1]]))
        self.assertEqual(data[:8], b'\xffBIOSEMI')
        self.assertEqual(len(data), 512 + 9)
        self.assertEqual(data[512:], b'\x00\x00\x00\x01\x00\x00\xff\xff\xff')

        recording = signal_io.read_bdf(data)
        self.assertEqual(list(recording.digital[0]), [0, 1, -1])
        channel = recording.channels[0]
        self.assertEqual(channel.fs, 3.0)
        gain = (262143.0 + 262144.0) / (8388607.0 + 8388608.0)
        expected = [-262144.0 + (d + 8388608) * gain for d in (0, 1, -1)]
        np.testing.assert_allclose(channel.samples, expected, rtol=0, atol=1e-9)
        # one digital step is 1/32 uV
        self.assertAlmostEqual(channel.samples[1] - channel.samples[0], 0.03125, places=6)
        self.assertAlmostEqual(channel.samples[0] - channel.samples[2], 0.03125, places=6)

    def test_range_ends_map_exactly(self):
        physical = signal_io.digital_to_physical(np.array([-8388608, 8388607]), -100.0, 100.0, -8388608, 8388607)
        self.assertEqual(list(physical), [-100.0, 100.0])

    def test_clamping_warns(self):
        with self.assertLogs('easr', level='WARNING') as logs:
            physical = signal_io.digital_to_physical(np.array([-20, 0, 20]), -1.0, 1.0, -10, 10, label="Fp1")
        self.assertEqual(list(physical), [-1.0, 0.0, 1.0])
        self.assertIn("Clamped 2 samples", logs.output[0])

    def test_round_trip(self):
        signals = [Signal(white_noise(2000, seed) * 50, FS, label) for seed, label in ((1, "Fp1"), (2, "Fp2"))]
        recording = signal_io.BdfRecording.from_signals(signals)
        data = signal_io.write_bdf(recording)
        again = signal_io.read_bdf(data)
        self.assertEqual(signal_io.write_bdf(again), data)
        for before, after in zip(recording.digital, again.digital):
            np.testing.assert_array_equal(before, after)
        for source, before, after in zip(signals, recording.channels, again.channels):
            np.testing.assert_allclose(after.samples, before.samples, rtol=1e-9)
            # 24 bit quantisation of the physical range
            self.assertLess(np.max(np.abs(after.samples - source.samples)), 1e-3)
        self.assertEqual(again.labels, ["Fp1", "Fp2"])

    def test_truncated(self):
        recording = signal_io.BdfRecording(self.header(num_records=2), [[1, 2, 3, 4, 5, 6]])
        data = signal_io.write_bdf(recording)
        with self.assertRaises(exceptions.TruncationError) as cm:
            signal_io.read_bdf(data[:-9])
        self.assertEqual(cm.exception.offset, 512 + 9)
        self.assertIn("byte offset 521", cm.exception.msg)
        with self.assertRaises(exceptions.TruncationError):
            signal_io.read_bdf(data[:100])

    def test_bad_magic(self):
        data = signal_io.write_bdf(signal_io.BdfRecording(self.header(), [[0, 1, -1]]))
        with self.assertRaises(exceptions.SignalFormatError) as cm:
            signal_io.read_bdf(b'\x00' + data[1:])
        self.assertNotIsInstance(cm.exception, exceptions.TruncationError)

    def test_bad_header_field(self):
        data = signal_io.write_bdf(signal_io.BdfRecording(self.header(), [[0, 1, -1]]))
        data = data[:236] + b'abc     ' + data[244:]
        with self.assertRaises(exceptions.HeaderParseError) as cm:
            signal_io.read_bdf(data)
        self.assertEqual(cm.exception.field, 'num_records')

    def test_unknown_record_count(self):
        data = signal_io.write_bdf(signal_io.BdfRecording(self.header(num_records=2), [[1, 2, 3, 4, 5, 6]]))
        data = data[:236] + b'-1      ' + data[244:]
        recording = signal_io.read_bdf(data)
        self.assertEqual(recording.header.num_records, 2)


class TextAndRawTests(unittest.TestCase):
    def test_read_csv(self):
        signal = signal_io.read_csv("1.0\n2.0\n3.0", 500)
        self.assertEqual(list(signal.samples), [1.0, 2.0, 3.0])
        self.assertEqual(signal.fs, 500.0)
        signal = signal_io.read_csv("Fp1\r\n1\r\n\r\n2\r\n", 500)
        self.assertEqual(signal.label, "Fp1")
        self.assertEqual(list(signal.samples), [1.0, 2.0])

    def test_read_csv_errors(self):
        with self.assertRaises(exceptions.ParseError) as cm:
            signal_io.read_csv("1.0\nabc\n", 500)
        self.assertEqual(cm.exception.line, 2)
        with self.assertRaises(exceptions.ParseError):
            signal_io.read_csv("1.0\ninf\n", 500)

    def test_read_raw(self):
        data = np.array([0.0, -1.0, 2.5], dtype='<f8').tobytes()
        self.assertEqual(len(data), 24)
        self.assertEqual(list(signal_io.read_raw(data, 500, 'f64').samples), [0.0, -1.0, 2.5])
        with self.assertRaises(exceptions.SignalFormatError):
            signal_io.read_raw(data[:-1], 500, 'f64')

    def test_write_read(self):
        signal = Signal(white_noise(100, 3), 250, "Cz")
        again = signal_io.read_csv(signal_io.write_signal(signal, 'csv'), 250)
        np.testing.assert_array_equal(again.samples, signal.samples)
        self.assertEqual(again.label, "Cz")
        again = signal_io.read_raw(signal_io.write_signal(signal, 'f64'), 250, 'f64')
        np.testing.assert_array_equal(again.samples, signal.samples)
        again = signal_io.read_raw(signal_io.write_signal(signal, 'f32'), 250, 'f32')
        np.testing.assert_array_equal(again.samples, signal.samples.astype(np.float32))

    def test_slice(self):
        signal = Signal(np.arange(60 * 100, dtype=float), 100)
        np.testing.assert_array_equal(signal_io.slice_signal(signal, 0, 60).samples, signal.samples)
        self.assertEqual(len(signal_io.slice_signal(signal, 10, 20)), 1000)
        with self.assertRaises(exceptions.DimensionError):
            signal_io.slice_signal(signal, 10, 5)
        with self.assertRaises(exceptions.DimensionError):
            signal_io.slice_signal(signal, 50, 70)

    def test_concat(self):
        a, b = Signal([1.0, 2.0], 100, "Fp1"), Signal([3.0], 100, "Fp1")
        self.assertEqual(list(signal_io.concat_signals([a, b]).samples), [1.0, 2.0, 3.0])
        with self.assertRaises(exceptions.DimensionError):
            signal_io.concat_signals([a, Signal([3.0], 200)])

    def test_select_channel(self):
        recording = signal_io.BdfRecording.from_signals(
            [Signal(white_noise(100, 1), 100, "Fp1"), Signal(white_noise(100, 2), 100, "Fp2")])
        self.assertEqual(signal_io.select_channel(recording, "Fp2").label, "Fp2")
        with self.assertRaises(exceptions.ChannelError) as cm:
            signal_io.select_channel(recording, "Cz")
        self.assertEqual(cm.exception.available, ["Fp1", "Fp2"])
        self.assertIn("Fp1, Fp2", cm.exception.msg)

    def test_files(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            signals = [Signal(white_noise(1000, 1) * 20, 250, "O1"), Signal(white_noise(1000, 2) * 20, 250, "O2")]
            signal_io.save_signals("rec.bdf", signals)
            self.assertEqual(signal_io.load_signal("rec.bdf", channel="O2").label, "O2")
            with self.assertRaises(exceptions.ChannelError):
                signal_io.load_signal("rec.bdf")
            signal_io.save_signals("one.csv", signals[:1])
            np.testing.assert_array_equal(signal_io.load_signal("one.csv", fs=250).samples, signals[0].samples)
            with self.assertRaises(exceptions.SignalFormatError):
                signal_io.save_signals("two.csv", signals)
            with self.assertRaises(exceptions.SignalFileError):
                signal_io.load_signal("missing.csv", fs=250)
            with self.assertRaises(exceptions.ConfigError):
                signal_io.load_signal("one.csv")
            with self.assertRaises(exceptions.SignalFormatError):
                signal_io.load_signal("one.xyz", fs=250)


class PreprocessTests(unittest.TestCase):
    def test_zero_center(self):
        self.assertEqual(list(zero_center(Signal([1.0, 2.0, 3.0], FS)).samples), [-1.0, 0.0, 1.0])
        x = Signal(white_noise(1000, 5) + 3.0, FS)
        centred = zero_center(x)
        self.assertLessEqual(abs(np.mean(centred.samples)), 1e-12 * np.max(np.abs(x.samples)))
        np.testing.assert_allclose(zero_center(centred).samples, centred.samples, rtol=0,
                                   atol=1e-12 * np.max(np.abs(x.samples)))

    def test_passband(self):
        out = bandpass(Signal(sine(10, 10), FS))
        steady = out.samples[1000:4000]
        self.assertAlmostEqual(np.max(np.abs(steady)), 1.0, delta=0.05)

    def test_notch(self):
        out = notch(Signal(sine(50, 10), FS))
        steady = out.samples[1000:4000]
        self.assertLess(20 * np.log10(np.max(np.abs(steady))), -20)

    def test_dc_removed(self):
        out = bandpass(Signal(np.full(5000, 7.0), FS))
        self.assertLessEqual(np.max(np.abs(out.samples[1000:4000])), 0.07)

    def test_zero_phase(self):
        n = np.arange(2000)
        pulse = Signal(np.exp(-0.5 * ((n - 1000) / 20.0) ** 2), FS)
        out = preprocess(pulse)
        self.assertLessEqual(abs(int(np.argmax(np.abs(out.samples))) - 1000), 1)

    def test_linear(self):
        x, y = Signal(white_noise(3000, 1), FS), Signal(white_noise(3000, 2), FS)
        combined = preprocess(Signal(2.0 * x.samples - 3.0 * y.samples, FS)).samples
        separate = 2.0 * preprocess(x).samples - 3.0 * preprocess(y).samples
        np.testing.assert_allclose(combined, separate, rtol=1e-9, atol=1e-9 * np.max(np.abs(separate)))

    def test_config_errors(self):
        signal = Signal(white_noise(1000), 200)
        with self.assertRaises(exceptions.ConfigError):
            bandpass(signal, PreprocessConfig())
        with self.assertRaises(exceptions.ConfigError):
            preprocess(Signal(white_noise(1000), FS), PreprocessConfig(bandpass_low=10, bandpass_high=5))
        unchanged = notch(signal, PreprocessConfig(notch_freq=None))
        np.testing.assert_array_equal(unchanged.samples, signal.samples)


class EmbeddingTests(unittest.TestCase):
    def test_embed(self):
        signal = Signal([1.0, 2.0, 3.0, 4.0, 5.0], FS)
        matrix = embed(signal, EmbeddingConfig(m=3))
        np.testing.assert_array_equal(matrix.data, [[1, 2, 3], [2, 3, 4], [3, 4, 5]])
        self.assertEqual((matrix.m, matrix.k_cols), (3, 3))
        np.testing.assert_array_equal(embed(signal, EmbeddingConfig(m=1)).data, [signal.samples])
        np.testing.assert_array_equal(embed(signal, EmbeddingConfig(m=5)).data, signal.samples[:, None])
        with self.assertRaises(exceptions.DimensionError):
            embed(signal, EmbeddingConfig(m=6))
        with self.assertRaises(exceptions.ConfigError):
            embed(signal, EmbeddingConfig(m=2, lag=2))

    def test_suggest_dimension(self):
        self.assertEqual(suggest_dimension(500, 10), 50)
        self.assertEqual(suggest_dimension(250, 2.78), 90)
        with self.assertLogs('easr', level='WARNING'):
            self.assertEqual(suggest_dimension(500, 500), 1)
        with self.assertRaises(exceptions.ConfigError):
            suggest_dimension(500, 0)
        report = embedding_report(500, 90, 0.5)
        self.assertEqual(report['suggested_m'], 1000)
        self.assertAlmostEqual(report['effective_f_low'], 500 / 90.0)

    def test_diagonal_average(self):
        self.assertEqual(list(diagonal_average([[1.0, 2.0], [3.0, 4.0]], FS).samples), [1.0, 2.5, 4.0])
        data = np.random.default_rng(7).standard_normal((5, 4))
        sums, counts = np.zeros(8), np.zeros(8)
        for i in range(5):
            for j in range(4):
                sums[i + j] += data[i, j]
                counts[i + j] += 1
        np.testing.assert_allclose(diagonal_average(data, FS).samples, sums / counts, rtol=0, atol=1e-12)
        self.assertLessEqual(np.max(np.abs(diagonal_average(data, FS).samples)), np.max(np.abs(data)))

    def test_round_trip(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            n = int(rng.integers(100, 5001))
            m = int(rng.integers(1, n + 1))
            signal = Signal(rng.standard_normal(n), FS)
            matrix = embed(signal, EmbeddingConfig(m=m))
            again = diagonal_average(matrix)
            self.assertEqual(len(again), n)
            self.assertLessEqual(np.max(np.abs(again.samples - signal.samples)),
                                 1e-12 * np.max(np.abs(signal.samples)))

    def test_linear(self):
        x, y = white_noise(200, 1), white_noise(200, 2)
        config = EmbeddingConfig(m=20)
        combined = embed(Signal(2 * x + y, FS), config).data
        np.testing.assert_allclose(combined, 2 * embed(Signal(x, FS), config).data + embed(Signal(y, FS), config).data)

    def test_validate(self):
        validate_embedding_config(EmbeddingConfig())
        with self.assertRaises(exceptions.ConfigError):
            validate_embedding_config(EmbeddingConfig(m=0))
        self.assertIsInstance(embed(Signal(white_noise(200), FS)), EmbeddedMatrix)


class LinearAlgebraTests(unittest.TestCase):
    def test_matrix_sqrt(self):
        np.testing.assert_allclose(asr.matrix_sqrt_psd(np.eye(3)), np.eye(3), atol=1e-12)
        np.testing.assert_allclose(asr.matrix_sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-12)
        a = np.random.default_rng(3).standard_normal((5, 5))
        c = a.T @ a
        root = asr.matrix_sqrt_psd(c)
        np.testing.assert_allclose(root, root.T)
        self.assertLessEqual(np.linalg.norm(root @ root - c), 1e-8 * np.linalg.norm(c))
        with self.assertRaises(exceptions.NumericError):
            asr.matrix_sqrt_psd(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_pinv(self):
        np.testing.assert_allclose(asr.pinv(np.eye(4)), np.eye(4))
        np.testing.assert_allclose(asr.pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))

    def test_penrose_conditions(self):
        rng = np.random.default_rng(5)

        def close(a, b):
            return np.linalg.norm(a - b) <= 1e-8 * max(1.0, np.linalg.norm(b))

        for index in range(100):
            rows, cols = rng.integers(1, 91, size=2)
            if index % 3 == 0:
                rank = int(rng.integers(1, min(rows, cols) + 1))
                a = rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))
            else:
                a = rng.standard_normal((rows, cols))
            p = asr.pinv(a)
            self.assertTrue(close(a @ p @ a, a))
            self.assertTrue(close(p @ a @ p, p))
            self.assertTrue(close((a @ p).T, a @ p))
            self.assertTrue(close((p @ a).T, p @ a))

    def test_sorted_eigh_is_stable(self):
        c = np.cov(white_noise(500, 2, rows=6))
        eigvals, eigvecs = asr.sorted_eigh(c)
        self.assertTrue(np.all(np.diff(eigvals) >= 0))
        pivots = eigvecs[np.argmax(np.abs(eigvecs), axis=0), np.arange(6)]
        self.assertTrue(np.all(pivots > 0))
        again = asr.sorted_eigh(c.copy())
        np.testing.assert_array_equal(eigvecs, again[1])

    def test_robust_zscore(self):
        self.assertEqual(list(asr.robust_zscore([3.0])), [0.0])
        self.assertEqual(list(asr.robust_zscore([2.0, 2.0, 2.0])), [0.0, 0.0, 0.0])
        z = asr.robust_zscore([1.0, 1.1, 0.9, 1.0, 1.05, 0.95, 50.0])
        self.assertGreater(z[-1], constants.DEFAULT_Z_MAX)

    def test_zscore_flags_repeated_outliers(self):
        # six blink windows in a minute: mean and std score them at sqrt(54 / 6) = 3 at most
        rng = np.random.default_rng(7)
        values = np.concatenate([1.0 + 0.05 * rng.standard_normal(54), np.full(6, 10.0)])
        plain = (values - values.mean()) / values.std()
        self.assertLess(plain.max(), constants.DEFAULT_Z_MAX)
        self.assertTrue(np.all(asr.robust_zscore(values)[-6:] > constants.DEFAULT_Z_MAX))
        self.assertTrue(np.all(np.abs(asr.robust_zscore(values)[:54]) < -constants.DEFAULT_Z_MIN))

    def test_fit_clean_distribution(self):
        self.assertEqual(asr.fit_clean_distribution([1.0, 2.0, 3.0]), (2.0, float(np.std([1.0, 2.0, 3.0]))))
        self.assertEqual(asr.fit_clean_distribution(np.full(50, 4.0)), (4.0, 0.0))
        rng = np.random.default_rng(11)
        values = np.concatenate([1.0 + 0.1 * rng.standard_normal(200), 5.0 + rng.random(30)])
        mu, sigma = asr.fit_clean_distribution(rng.permutation(values))
        self.assertAlmostEqual(mu, 1.0, delta=0.05)
        self.assertAlmostEqual(sigma, 0.1, delta=0.05)
        self.assertLess(sigma, 0.2 * np.std(values))


class AsrTests(unittest.TestCase):
    FS = 100.0

    def clean_data(self, seconds=60, seed=1):
        return white_noise(int(seconds * self.FS), seed, rows=4)

    def test_calibrate_white_noise(self):
        x = self.clean_data()
        state = asr.calibrate(x, self.FS)
        np.testing.assert_allclose(state.thresholds, state.mu + 17 * state.sigma)
        for mu in state.mu:
            self.assertAlmostEqual(mu, 1.0, delta=0.1)
        np.testing.assert_allclose(state.threshold, np.diag(state.thresholds) @ state.eigvecs.T)
        clean, window = asr.clean_windows(x, self.FS)
        self.assertEqual(state.n_clean_windows, np.count_nonzero(clean))
        cov = np.cov(np.hstack([x[:, i * window:(i + 1) * window] for i in np.flatnonzero(clean)]))
        self.assertLessEqual(np.linalg.norm(state.mixing @ state.mixing.T - cov), 1e-8 * np.linalg.norm(cov))

    def test_calibration_skips_bursts(self):
        x = self.clean_data(seed=3)
        x[:, 1000:1100] *= 20
        clean, window = asr.clean_windows(x, self.FS)
        self.assertEqual((window, clean.size), (100, 60))
        self.assertFalse(clean[10])
        state = asr.calibrate(x, self.FS)
        self.assertLess(np.max(state.eigvals), 2.0)
        for mu in state.mu:
            self.assertAlmostEqual(mu, 1.0, delta=0.1)

    def test_reconstruction_mixing_is_conditioned(self):
        state = asr.calibrate(self.clean_data(), self.FS)
        np.testing.assert_allclose(state.reconstruction_mixing, state.mixing, atol=1e-9)
        lifted = asr.AsrState(np.diag([0.0, 1.0]), np.eye(2), np.eye(2), [0.0, 1.0], [0.0, 0.0], [0.0, 0.0],
                              [1.0, 1.0], 1.0)
        np.testing.assert_allclose(lifted.reconstruction_mixing, np.diag([1e-3, 1.0]))

    def test_single_window(self):
        state = asr.calibrate(self.clean_data(seconds=1), self.FS)
        self.assertEqual(state.n_clean_windows, 1)
        np.testing.assert_array_equal(state.sigma, np.zeros(4))
        with self.assertRaises(exceptions.CalibrationError):
            asr.calibrate(self.clean_data(seconds=0.5), self.FS)

    def test_threshold_formula(self):
        state = asr.AsrState(np.eye(1), np.eye(1), np.eye(1), [1.0], [0.0], [1.0], [0.0], 1.0)
        self.assertEqual(list(state.with_cutoff(17).thresholds), [17.0])

    def test_identity_without_rejection(self):
        x = self.clean_data()
        config = asr.AsrConfig(cutoff_k=1e12)
        state = asr.calibrate(x, self.FS, config)
        cleaned, report = asr.process(x, state, self.FS, config)
        self.assertEqual(asr.rejection_counts(report), [0] * len(report))
        np.testing.assert_allclose(cleaned, x, rtol=1e-9, atol=0)

    def test_burst_is_rejected(self):
        state = asr.calibrate(self.clean_data(seed=1), self.FS)
        x = self.clean_data(seed=2)
        x[:, 500:550] *= 10
        cleaned, report = asr.process(x, state, self.FS)
        for window in report:
            if window.start == 500:
                self.assertGreaterEqual(len(window.rejected), 1)
                singular = np.linalg.svd(cleaned[:, 500:550], compute_uv=False)
                rank = int(np.count_nonzero(singular > 1e-10 * singular[0]))
                self.assertLessEqual(rank, 4 - len(window.rejected))
            else:
                self.assertEqual(window.rejected, ())
        self.assertLess(np.linalg.norm(cleaned[:, 500:550]), np.linalg.norm(x[:, 500:550]))

    def test_reconstruction_is_idempotent(self):
        state = asr.calibrate(self.clean_data(), self.FS)
        window = self.clean_data(seconds=0.5, seed=3) * 10
        _, eigvecs, rejected = asr.rejected_components(window, state)
        self.assertTrue(np.any(rejected))
        operator = asr.reconstruction_matrix(state, eigvecs, rejected)
        once = operator @ window
        np.testing.assert_allclose(operator @ once, once, atol=1e-8 * np.max(np.abs(once)))

    def test_short_tail_and_zero_variance(self):
        state = asr.calibrate(self.clean_data(), self.FS)
        x = np.hstack([self.clean_data(seconds=2, seed=4), np.zeros((4, 50)), self.clean_data(seconds=0.01, seed=5)])
        cleaned, report = asr.process(x, state, self.FS)
        self.assertEqual(cleaned.shape, x.shape)
        np.testing.assert_array_equal(cleaned[:, -51:], x[:, -51:])
        self.assertEqual(report[-1].stop - report[-1].start, 1)

    def test_dimension_mismatch(self):
        state = asr.calibrate(self.clean_data(), self.FS)
        with self.assertRaises(exceptions.DimensionError):
            asr.process(white_noise(100, rows=3), state, self.FS)

    def test_jobs_do_not_change_results(self):
        state = asr.calibrate(self.clean_data(), self.FS)
        x = self.clean_data(seed=6)
        x[:, 1000:1200] *= 8
        one, report_one = asr.process(x, state, self.FS, jobs=1)
        many, report_many = asr.process(x, state, self.FS, jobs=3)
        np.testing.assert_array_equal(one, many)
        self.assertEqual(report_one, report_many)

    def test_state_document(self):
        state = asr.calibrate(self.clean_data(), self.FS)
        again = asr.AsrState.from_json(state.to_json())
        for name in asr.AsrState.MATRICES:
            np.testing.assert_array_equal(getattr(again, name), getattr(state, name))
        self.assertEqual((again.cutoff_k, again.n_clean_windows), (state.cutoff_k, state.n_clean_windows))
        with self.assertRaises(exceptions.SignalFormatError):
            asr.AsrState.from_json("{}")
        with self.assertRaises(exceptions.SignalFormatError):
            asr.AsrState.from_json("not json")

    def test_config_errors(self):
        for config in (asr.AsrConfig(cutoff_k=0), asr.AsrConfig(process_window_s=0),
                       asr.AsrConfig(z_min=1, z_max=1)):
            with self.assertRaises(exceptions.ConfigError):
                asr.validate_asr_config(config)


class CutoffTests(unittest.TestCase):
    """ Rejections on an embedded semi-simulated signal with strong blinks. """
    @classmethod
    def setUpClass(cls):
        cls.sim = semisim.build_semisim(semisim.SemiSimSpec(snr_db=-5))
        prepared = preprocess(cls.sim.contaminated)
        cls.data = embed(prepared).data
        cls.state = asr.calibrate(cls.data, FS, asr.AsrConfig(cutoff_k=5))

    def totals(self, k):
        _, report = asr.process(self.data, self.state.with_cutoff(k), FS)
        return sum(asr.rejection_counts(report)), report

    def test_monotone_in_k(self):
        totals = [self.totals(k)[0] for k in (5, 10, 17, 30)]
        self.assertTrue(all(a >= b for a, b in zip(totals, totals[1:])), totals)

    def test_every_blink_window_rejects(self):
        _, report = self.totals(17)
        peak_offset = int(constants.DEFAULT_BLINK_SEGMENT_S * FS) // 2
        for onset in self.sim.blink_onsets:
            column = onset + peak_offset - constants.DEFAULT_EMBEDDING_DIMENSION // 2
            window = [w for w in report if w.start <= column < w.stop][0]
            self.assertGreaterEqual(len(window.rejected), 1, window)

    def test_blink_windows_shrink(self):
        cleaned, report = asr.process(self.data, self.state.with_cutoff(17), FS)
        peak_offset = int(constants.DEFAULT_BLINK_SEGMENT_S * FS) // 2
        for onset in self.sim.blink_onsets:
            column = onset + peak_offset - constants.DEFAULT_EMBEDDING_DIMENSION // 2
            window = [w for w in report if w.start <= column < w.stop][0]
            before = np.max(np.abs(self.data[:, window.start:window.stop]))
            after = np.max(np.abs(cleaned[:, window.start:window.stop]))
            self.assertLess(after, 0.5 * before, window)


class PipelineTests(unittest.TestCase):
    def test_identity_without_rejection(self):
        signal = semisim.synth_clean_eeg(60, FS, seed=1)
        config = EasrConfig(asr=asr.AsrConfig(cutoff_k=1e12))
        result = easr_clean(signal, config)
        self.assertEqual(len(result.cleaned), len(signal))
        self.assertEqual(result.cleaned.fs, FS)
        np.testing.assert_allclose(result.cleaned.samples, result.preprocessed.samples, rtol=1e-9,
                                   atol=1e-9 * np.max(np.abs(result.preprocessed.samples)))
        self.assertGreaterEqual(result.elapsed, 0)

    def test_clean_eeg_is_kept(self):
        signal = semisim.synth_clean_eeg(60, FS, seed=2)
        result = easr_clean(signal)
        self.assertGreaterEqual(metrics.correlation(result.preprocessed, result.cleaned), 0.99)

    def test_reuse_state(self):
        signal = semisim.build_semisim().contaminated
        first = easr_clean(signal)
        second = easr_clean(signal, state=first.state)
        np.testing.assert_array_equal(first.cleaned.samples, second.cleaned.samples)
        with self.assertRaises(exceptions.DimensionError):
            easr_clean(signal, EasrConfig(embedding=EmbeddingConfig(m=60)), state=first.state)

    def test_too_short(self):
        with self.assertRaises(exceptions.DimensionError):
            easr_clean(Signal(white_noise(50), FS))

    def test_channels(self):
        signals = [semisim.synth_clean_eeg(10, FS, seed=s, label="ch{}".format(s)) for s in (1, 2)]
        results = easr_clean_channels(signals, jobs=2)
        self.assertEqual([r.cleaned.label for r in results], ["ch1", "ch2"])
        np.testing.assert_array_equal(results[0].cleaned.samples, easr_clean(signals[0]).cleaned.samples)

    def test_multichannel(self):
        noise = Signal(white_noise(3000, 8), 100, "a")
        cleaned = asr_clean_multichannel([noise, noise.replace(label="b")])
        self.assertEqual([s.label for s in cleaned], ["a", "b"])
        for signal in cleaned:
            np.testing.assert_allclose(signal.samples, noise.samples, rtol=1e-6, atol=1e-6)
        with self.assertRaises(exceptions.DimensionError):
            asr_clean_multichannel([noise])
        with self.assertRaises(exceptions.DimensionError):
            asr_clean_multichannel([noise, Signal(white_noise(2000), 100)])


class SemiSimTests(unittest.TestCase):
    def test_rms(self):
        self.assertAlmostEqual(semisim.rms([3.0, 4.0]), math.sqrt(12.5))
        self.assertAlmostEqual(semisim.rms([-2.0] * 5), 2.0)
        x = white_noise(1000, 4)
        self.assertAlmostEqual(semisim.rms(x), math.sqrt(sum(v * v for v in x) / len(x)), places=12)

    def test_alpha(self):
        s, m = Signal([2.0, -2.0], FS), Signal([4.0, -4.0], FS)
        self.assertAlmostEqual(semisim.alpha_for_snr(s, m, 0), 0.5)
        one = Signal([1.0, -1.0], FS)
        self.assertAlmostEqual(semisim.alpha_for_snr(one, one, 10), 0.1)
        with self.assertRaises(exceptions.NumericError):
            semisim.alpha_for_snr(one, Signal([0.0, 0.0], FS), 0)

    def test_snr_round_trip(self):
        s, m = Signal(white_noise(1000, 1), FS), Signal(white_noise(1000, 2) * 7, FS)
        for target in (-7, -3, 0, 2):
            alpha = semisim.alpha_for_snr(s, m, target)
            self.assertAlmostEqual(semisim.snr_db(s, alpha * m.samples), target, delta=1e-9)
            self.assertAlmostEqual(semisim.conventional_snr_db(s, alpha * m.samples), 2 * target, delta=1e-9)

    def test_pad_blink(self):
        blink = Signal(np.ones(500), FS)
        padded = semisim.pad_blink(blink, 10)
        self.assertEqual(len(padded), 5000)
        support = np.flatnonzero(padded.samples)
        self.assertEqual((support[0], support[-1] + 1), (2250, 2750))
        self.assertEqual(np.flatnonzero(semisim.pad_blink(blink, 10, 0).samples)[0], 0)
        with self.assertRaises(exceptions.DimensionError):
            semisim.pad_blink(Signal(np.ones(6000), FS), 10)

    def test_synthetic_segments(self):
        blink = semisim.synth_blink(2, FS, 500, seed=1)
        self.assertAlmostEqual(np.max(blink.samples), 500, delta=1e-9)
        np.testing.assert_array_equal(blink.samples, semisim.synth_blink(2, FS, 500, seed=1).samples)
        eeg = semisim.synth_clean_eeg(10, FS, seed=3)
        np.testing.assert_array_equal(eeg.samples, semisim.synth_clean_eeg(10, FS, seed=3).samples)
        self.assertAlmostEqual(np.mean(eeg.samples), 0.0, places=9)
        freqs, psd = metrics.power_spectrum(eeg)
        low = np.sum(psd[(freqs >= 0.5) & (freqs < 20)])
        high = np.sum(psd[(freqs >= 40) & (freqs < 100)])
        self.assertGreater(low, high)

    def test_default_dataset(self):
        result = semisim.build_semisim()
        self.assertEqual(len(result.contaminated), 30000)
        self.assertEqual(len(result.ground_truth), 30000)
        self.assertEqual(len(result.blink_onsets), 6)
        difference = result.contaminated.samples - result.ground_truth.samples
        np.testing.assert_array_equal(result.contaminated.samples, result.ground_truth.samples + result.artifact.samples)
        nonzero = (difference != 0).astype(int)
        runs = int(np.count_nonzero(np.diff(nonzero) == 1)) + int(nonzero[0])
        self.assertEqual(runs, 6)
        train = result.artifact.samples / result.alpha_used
        self.assertAlmostEqual(semisim.alpha_for_snr(result.ground_truth, train, 0.0) / result.alpha_used, 1.0,
                               places=12)
        self.assertEqual(metrics.count_blinks(result.ground_truth)[0], 0)

    def test_deterministic(self):
        a, b = semisim.build_semisim(), semisim.build_semisim()
        np.testing.assert_array_equal(a.contaminated.samples, b.contaminated.samples)
        other = semisim.build_semisim(semisim.SemiSimSpec(rng_seed=5))
        self.assertFalse(np.array_equal(a.contaminated.samples, other.contaminated.samples))

    def test_second_channel(self):
        first, second = semisim.build_semisim(channel=0), semisim.build_semisim(channel=1)
        self.assertEqual(first.blink_onsets, second.blink_onsets)
        self.assertEqual(second.contaminated.label, "semisim2")
        self.assertFalse(np.array_equal(first.ground_truth.samples, second.ground_truth.samples))

    def test_high_snr(self):
        result = semisim.build_semisim(semisim.SemiSimSpec(snr_db=60))
        self.assertGreaterEqual(metrics.correlation(result.contaminated, result.ground_truth), 0.9999)

    def test_spec_checks(self):
        with self.assertRaises(exceptions.ConfigError):
            semisim.build_semisim(semisim.SemiSimSpec(arrangement=((0, 2),)))
        with self.assertLogs('easr', level='WARNING'):
            semisim.validate_semisim_spec(semisim.SemiSimSpec(snr_db=10))


class MetricsTests(unittest.TestCase):
    def test_rrmse(self):
        x = white_noise(1000, 1)
        self.assertEqual(metrics.rrmse(x, x), 0.0)
        self.assertAlmostEqual(metrics.rrmse(2 * x, x), 100.0)
        e = white_noise(1000, 2) * 0.3
        self.assertAlmostEqual(metrics.rrmse(x + e, x), 100 * semisim.rms(e) / semisim.rms(x), places=10)
        y = white_noise(1000, 3)
        oracle = 100 * math.sqrt(sum((a - b) ** 2 for a, b in zip(y, x)) / 1000) / math.sqrt(sum(v * v for v in x) / 1000)
        self.assertAlmostEqual(metrics.rrmse(y, x), oracle, delta=1e-10)
        with self.assertRaises(exceptions.NumericError):
            metrics.rrmse(x, np.zeros(1000))
        with self.assertRaises(exceptions.DimensionError):
            metrics.rrmse(x, x[:10])

    def test_correlation(self):
        x, y = white_noise(500, 1), white_noise(500, 2)
        self.assertAlmostEqual(metrics.correlation(x, x), 1.0)
        self.assertAlmostEqual(metrics.correlation(x, -x), -1.0)
        self.assertAlmostEqual(metrics.correlation(x, 3 * x + 2), 1.0)
        self.assertAlmostEqual(metrics.correlation(x, y), metrics.correlation(y, x))
        with self.assertRaises(exceptions.NumericError):
            metrics.correlation(x, np.ones(500))

    def test_band_power_sine(self):
        ratios = metrics.band_power_ratios(sine(10, 10), FS)
        self.assertEqual(list(ratios), ['delta', 'theta', 'alpha', 'beta', 'gamma'])
        self.assertGreaterEqual(ratios['alpha'], 0.95)

    def test_band_power_white_noise(self):
        ratios = metrics.band_power_ratios(white_noise(int(60 * FS), 9), FS)
        self.assertAlmostEqual(sum(ratios.values()), 1.0, delta=0.02)
        for name, low, high in constants.BANDS:
            self.assertAlmostEqual(ratios[name], (high - low) / 99.5, delta=0.03)

    def test_band_power_nyquist(self):
        with self.assertLogs('easr', level='WARNING'):
            ratios = metrics.band_power_ratios(white_noise(1500, 1), 150)
        self.assertAlmostEqual(sum(ratios.values()), 1.0, delta=0.02)
        with self.assertRaises(exceptions.DimensionError):
            metrics.band_power_ratios(white_noise(100), FS)

    def test_count_blinks(self):
        self.assertEqual(metrics.count_blinks(np.zeros(1000), fs=FS), (0, []))
        x = np.zeros(int(60 * FS))
        x[np.arange(6) * 5000 + 2500] = 1.0
        count, peaks = metrics.count_blinks(x, fs=FS)
        self.assertEqual(count, 6)
        self.assertEqual(peaks, list(np.arange(6) * 5000 + 2500))
        self.assertEqual(metrics.count_blinks(x * 37.5, fs=FS)[0], 6)
        y = np.zeros(int(10 * FS))
        y[[2000, 2050]] = [1.0, -0.8]
        self.assertEqual(metrics.count_blinks(y, fs=FS), (1, [2000]))

    def test_count_blinks_scans_left_to_right(self):
        x = np.zeros(int(10 * FS))
        x[[2000, 2100, 2200]] = [0.6, 1.0, 0.7]
        self.assertEqual(metrics.count_blinks(x, fs=FS), (2, [2000, 2200]))
        # one run above threshold counts once, at its largest sample
        x = np.zeros(int(10 * FS))
        x[3000:3010] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.9, 0.4, 0.3, 0.2, 0.1]
        self.assertEqual(metrics.count_blinks(x, fs=FS), (1, [3005]))

    def test_blink_sweep(self):
        x = np.zeros(int(60 * FS))
        x[np.arange(6) * 5000 + 2500] = 1.0
        sweep = metrics.blink_constant_sweep(x, fs=FS)
        self.assertEqual(list(sweep), list(range(1, 11)))
        self.assertEqual(sweep[6], 6)

    def test_percentage_reduction(self):
        self.assertEqual(metrics.percentage_reduction(9, 0), 100.0)
        self.assertEqual(metrics.percentage_reduction(4, 4), 0.0)
        self.assertIsNone(metrics.percentage_reduction(0, 0))

    def test_full_report(self):
        sim = semisim.build_semisim()
        report = metrics.full_report(sim.contaminated, sim.ground_truth, sim.ground_truth)
        self.assertEqual(report.rrmse_pct, 0.0)
        self.assertAlmostEqual(report.cc, 1.0)
        self.assertEqual(report.blinks_after, 0)
        self.assertEqual(report.reduction_pct, 100.0 if report.blinks_before else None)
        partial = metrics.full_report(sim.contaminated, sim.ground_truth)
        self.assertIsNone(partial.rrmse_pct)
        self.assertIsNone(partial.cc)
        self.assertIsNotNone(partial.band_power)


class BenchTests(unittest.TestCase):
    """ The default semi-simulated benchmark. """
    @classmethod
    def setUpClass(cls):
        cls.rows = bench.run_bench(settings.Settings())

    def test_easr(self):
        row = self.rows[0]
        self.assertEqual(row.method, 'E-ASR')
        self.assertEqual(row.report.blinks_before, 6)
        self.assertEqual(row.report.blinks_after, 0)
        self.assertEqual(row.report.reduction_pct, 100.0)
        self.assertGreaterEqual(row.report.cc, 0.85)
        self.assertLessEqual(row.report.rrmse_pct, 60.0)

    def test_band_power_restored(self):
        report = self.rows[0].report
        truth = report.band_power_ground_truth['delta']
        self.assertLessEqual(abs(report.band_power['delta'] - truth), 0.10)
        self.assertGreater(report.band_power_contaminated['delta'], truth)

    def test_two_channel_baseline(self):
        row = self.rows[1]
        self.assertEqual(row.method, 'ASR 2-ch')
        self.assertTrue(np.isfinite(row.report.rrmse_pct))
        self.assertTrue(np.isfinite(row.report.cc))

    def test_document(self):
        text = report.bench_document(self.rows, 'text', report.provenance(settings.Settings(), seed=4))
        self.assertIn("# seed: 4", text)
        self.assertIn("E-ASR (reference)", text)
        self.assertIn("43.87", text)
        doc = json.loads(report.bench_document(self.rows, 'json', report.provenance()))
        self.assertEqual([r['method'] for r in doc['rows']], ['E-ASR', 'ASR 2-ch'])

    def test_parse_sweep(self):
        self.assertEqual(bench.parse_sweep("-7..2"), tuple(float(v) for v in range(-7, 3)))
        self.assertEqual(bench.parse_sweep("5,10,17,30"), (5.0, 10.0, 17.0, 30.0))
        self.assertEqual(bench.parse_sweep("30,60", int), (30, 60))
        self.assertEqual(bench.parse_sweep(None), (None,))
        with self.assertRaises(exceptions.ConfigError):
            bench.parse_sweep("2..-7")


class SettingsTests(unittest.TestCase):
    def test_parse(self):
        loaded = settings.parse_config("[embedding]\nm = 60\n\n[preprocess]\nnotch_freq = none\n"
                                       "[semisim]\narrangement = 0:0 1:-\nblink_amplitude_uV = 400\n")
        self.assertEqual(loaded.easr.embedding.m, 60)
        self.assertIsNone(loaded.easr.preprocess.notch_freq)
        self.assertEqual(loaded.semisim.arrangement, ((0, 0), (1, None)))
        self.assertEqual(loaded.semisim.blink_amplitude_uV, 400.0)
        self.assertEqual(loaded.easr.asr, asr.AsrConfig())

    def test_errors(self):
        for text in ("[nonsense]\na = 1\n", "[asr]\ncutoff = 3\n", "[asr]\ncutoff_k = abc\n",
                     "[asr]\ncutoff_k = -1\n", "no section\n"):
            with self.assertRaises(exceptions.ConfigError):
                settings.parse_config(text)

    def test_dump_round_trip(self):
        custom = settings.override(settings.Settings(), m=45, cutoff_k=10.0, notch_freq=60.0, rng_seed=9)
        self.assertEqual(settings.parse_config(settings.dump_config(custom)), custom)

    def test_override(self):
        custom = settings.override(settings.Settings(), m=None, cutoff_k=5.0)
        self.assertEqual(custom.easr.embedding.m, 90)
        self.assertEqual(custom.easr.asr.cutoff_k, 5.0)
        with self.assertRaises(exceptions.ConfigError):
            settings.override(settings.Settings(), colour="red")

    def test_environment(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            with open("easr.ini", "w") as f:
                f.write("[asr]\ncutoff_k = 12\n")
            with mock.patch.dict(os.environ, {constants.CONFIG_ENVVAR: "easr.ini"}):
                self.assertEqual(settings.load_config().easr.asr.cutoff_k, 12.0)
            self.assertEqual(settings.load_config("easr.ini").easr.asr.cutoff_k, 12.0)
            with self.assertRaises(exceptions.ConfigError):
                settings.load_config("missing.ini")


class ReportTests(unittest.TestCase):
    def report(self, **fields):
        values = dict(rrmse_pct=12.3456, cc=0.98765, band_power=None, blinks_before=9, blinks_after=0,
                      reduction_pct=100.0, elapsed_s=None, band_power_contaminated=None,
                      band_power_ground_truth=None)
        values.update(fields)
        return metrics.EvaluationReport(**values)

    def test_accuracy_csv(self):
        text = report.evaluation_document(self.report(), 'csv', 'accuracy', "1", "Fp1", report.provenance())
        rows = [line for line in text.splitlines() if not line.startswith("#")]
        self.assertEqual(rows, ["Subject,Channel,RRMSE (%),CC", "1,Fp1,12.35,0.988"])
        self.assertTrue(text.startswith("# tool: embedded-asr"))

    def test_blinks_csv(self):
        text = report.evaluation_document(self.report(blinks_before=0, reduction_pct=None), 'csv', 'blinks',
                                          "2", "Fp2")
        self.assertEqual(text.splitlines()[1], "2,Fp2,0,0,n/a,n/a")

    def test_key_values(self):
        info = report.provenance(settings.Settings(), seed=4)
        text = report.evaluation_document(self.report(rrmse_pct=None, cc=None), 'text', info=info)
        self.assertIn("rrmse_pct: n/a", text)
        self.assertIn("blinks_before: 9", text)
        self.assertIn("#   cutoff_k = 17.0", text)
        doc = json.loads(report.evaluation_document(self.report(), 'json', info=info))
        self.assertEqual(doc['provenance']['seed'], 4)
        self.assertEqual(doc['report']['blinks_before'], 9)

    def test_json_rejects_nan(self):
        with self.assertRaises(exceptions.NumericError):
            report.evaluation_document(self.report(cc=float('nan')), 'json', info=report.provenance())


class CommandLineTests(unittest.TestCase):
    def setUp(self):
        self.runner = CliRunner()

    def invoke(self, *args):
        return self.runner.invoke(ui.cli, list(args), catch_exceptions=False)

    def test_simulate(self):
        with self.runner.isolated_filesystem():
            result = self.invoke('simulate', '--out-dir', 'a', '--seed', '4')
            self.assertEqual(result.exit_code, 0, result.output)
            for name in ('contaminated.csv', 'ground_truth.csv'):
                self.assertEqual(len(signal_io.load_signal(os.path.join('a', name), fs=FS)), 30000)
            with open(os.path.join('a', 'onsets.csv')) as f:
                self.assertEqual(len(f.read().splitlines()), 7)

            self.invoke('simulate', '--out-dir', 'b', '--seed', '4')
            for name in ('contaminated.csv', 'ground_truth.csv', 'onsets.csv', 'report.txt'):
                with open(os.path.join('a', name), 'rb') as f, open(os.path.join('b', name), 'rb') as g:
                    self.assertEqual(f.read(), g.read())

    def test_simulate_snr(self):
        def alpha(directory):
            with open(os.path.join(directory, 'report.txt')) as f:
                line = [l for l in f.read().splitlines() if l.startswith("semisim1.alpha")][0]
            return float(line.split(":")[1])

        with self.runner.isolated_filesystem():
            self.invoke('simulate', '--out-dir', 'high', '--snr-db', '2')
            self.invoke('simulate', '--out-dir', 'low', '--snr-db', '-7')
            self.assertGreater(alpha('low'), alpha('high'))

    def test_clean_csv(self):
        with self.runner.isolated_filesystem():
            self.invoke('simulate', '--out-dir', 'sim')
            result = self.invoke('clean', '--input', 'sim/contaminated.csv', '--fs', '500', '--out', 'clean.csv',
                                 '--state-out', 'state.json')
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn("m = 90", result.output)
            self.assertIn("cutoff_k = 17.0", result.output)
            self.assertEqual(len(signal_io.load_signal('clean.csv', fs=FS)), 30000)

            result = self.invoke('clean', '--input', 'sim/contaminated.csv', '--fs', '500', '--out', 'again.csv',
                                 '--state-in', 'state.json', '--report', 'report.json', '--report-format', 'json')
            self.assertEqual(result.exit_code, 0, result.output)
            with open('clean.csv') as f, open('again.csv') as g:
                self.assertEqual(f.read(), g.read())
            with open('report.json') as f:
                self.assertEqual(json.load(f)['channels'][0]['channel'], 'semisim1')

    def test_clean_bdf(self):
        with self.runner.isolated_filesystem():
            signals = [semisim.synth_clean_eeg(10, FS, seed, label=label) for seed, label in ((1, "Fp1"), (2, "Fp2"))]
            signal_io.save_signals('rec.bdf', signals)
            result = self.invoke('clean', '--input', 'rec.bdf', '--channel', 'Cz', '--out', 'out.bdf')
            self.assertEqual(result.exit_code, 2)
            self.assertIn("Fp1, Fp2", result.output)

            result = self.invoke('clean', '--input', 'rec.bdf', '--channel', 'Fp1', '--channel', 'Fp2',
                                 '--out', 'out.bdf', '--range', '0', '4', '--range', '6', '10', '--jobs', '2')
            self.assertEqual(result.exit_code, 0, result.output)
            recording = signal_io.read_bdf('out.bdf')
            self.assertEqual(recording.labels, ["Fp1", "Fp2"])
            self.assertEqual(len(recording.channels[0]), 4000)

    def test_clean_errors(self):
        with self.runner.isolated_filesystem():
            result = self.invoke('clean', '--input', 'missing.csv', '--fs', '500', '--out', 'x.csv')
            self.assertEqual(result.exit_code, 2)
            self.assertIn("file: ", result.output)
            with open('short.csv', 'w') as f:
                f.write("\n".join(["1.0", "2.0"] * 20))
            result = self.invoke('clean', '--input', 'short.csv', '--fs', '500', '--out', 'x.csv')
            self.assertEqual(result.exit_code, 3)
            self.assertIn("dimension: ", result.output)

    def test_linear_algebra_failure(self):
        with self.runner.isolated_filesystem():
            self.invoke('simulate', '--out-dir', 'sim')
            with mock.patch('easr.ui.easr_clean', side_effect=np.linalg.LinAlgError("SVD did not converge")):
                result = self.invoke('clean', '--input', 'sim/contaminated.csv', '--fs', '500', '--out', 'x.csv')
            self.assertEqual(result.exit_code, 3)
            self.assertIn("numeric: Linear algebra failed: SVD did not converge", result.output)

    def test_evaluate(self):
        with self.runner.isolated_filesystem():
            self.invoke('simulate', '--out-dir', 'sim')
            result = self.invoke('evaluate', '--contaminated', 'sim/contaminated.csv', '--cleaned',
                                 'sim/ground_truth.csv', '--ground-truth', 'sim/ground_truth.csv', '--fs', '500')
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn("rrmse_pct: 0.00", result.output)
            self.assertIn("cc: 1.000", result.output)

            result = self.invoke('evaluate', '--contaminated', 'sim/contaminated.csv', '--cleaned',
                                 'sim/ground_truth.csv', '--fs', '500')
            self.assertIn("rrmse_pct: n/a", result.output)
            self.assertIn("blinks_after: 0", result.output)

            result = self.invoke('evaluate', '--contaminated', 'sim/contaminated.csv', '--cleaned',
                                 'sim/ground_truth.csv', '--ground-truth', 'sim/ground_truth.csv', '--fs', '500',
                                 '--report-format', 'csv', '--subject', '3', '--out', 'table.csv')
            with open('table.csv') as f:
                rows = [l for l in f.read().splitlines() if not l.startswith("#")]
            self.assertEqual(rows, ["Subject,Channel,RRMSE (%),CC", "3,semisim1,0.00,1.000"])

    def test_bench(self):
        result = self.invoke('bench', '--report-format', 'csv')
        self.assertEqual(result.exit_code, 0, result.output)
        rows = [l for l in result.output.splitlines() if not l.startswith("#")]
        self.assertTrue(rows[0].startswith("Method,SNR (dB),M,k,Alpha,RRMSE (%),CC"))
        self.assertEqual([r.split(",")[0] for r in rows[1:]], ["E-ASR", "ASR 2-ch"])

    def test_config(self):
        with self.runner.isolated_filesystem():
            with open('bad.ini', 'w') as f:
                f.write("[asr]\nunknown = 1\n")
            result = self.invoke('--config', 'bad.ini', 'bench')
            self.assertEqual(result.exit_code, 1)
            self.assertIn("config: ", result.output)

            with open('good.ini', 'w') as f:
                f.write("[embedding]\nm = 60\n")
            self.invoke('simulate', '--out-dir', 'sim')
            result = self.invoke('--config', 'good.ini', 'clean', '--input', 'sim/contaminated.csv', '--fs', '500',
                                 '--out', 'clean.csv', '--m', '30')
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn("m = 30", result.output)

    def test_usage_error_exit_code(self):
        with self.assertRaises(SystemExit) as cm:
            ui.main(['clean', '--no-such-flag'])
        self.assertEqual(cm.exception.code, 1)
        with self.assertRaises(SystemExit) as cm:
            ui.main(['--version'])
        self.assertEqual(cm.exception.code, 0)


if __name__ == "__main__":
    unittest.main()
