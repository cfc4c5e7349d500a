"""
Tests for the grid sweeps and the dataset writers.
"""

import unittest
import json
import tempfile
from unittest import mock
import numpy as np
import pandas as pd
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from fermi_thermometry import sweeps
from fermi_thermometry.config import resolve_config
from fermi_thermometry.errors import NonConvergence
from fermi_thermometry.report import build_flags, metadata_path, write_dataset, write_metadata
from fermi_thermometry.sweeps import COLUMNS, grid_points, run_sweep


class TestSweeps(unittest.TestCase):
    """Test cases for per-command sweeps."""

    def test_equilibrium_columns_and_order(self):
        """Test one row per cell in grid order with the documented columns."""
        config = resolve_config("equilibrium-sweep", {"T_grid": "0.2,1", "gamma_grid": "0.5,1"})
        df = run_sweep(config)
        self.assertEqual(list(df.columns), COLUMNS["equilibrium-sweep"])
        self.assertEqual(list(zip(df["T"], df["gamma"])),
                         [(0.2, 0.5), (0.2, 1.0), (1.0, 0.5), (1.0, 1.0)])
        self.assertTrue((df["status"] == "ok").all())
        self.assertTrue(df["p1_steady"].between(0, 1).all())
        self.assertTrue((df["noise_to_signal"] > 0).all())

    def test_transient_values_are_physical(self):
        """Test probabilities in [0, 1] and nonnegative QFI."""
        config = resolve_config("transient-fi", {"t_grid": "0.5:4:3", "gamma_grid": "1",
                                                 "T_grid": "0.2"})
        df = run_sweep(config)
        self.assertEqual(len(df), 3)
        for column in ("p1_exact", "p1_markovian"):
            self.assertTrue(df[column].between(0, 1).all())
        self.assertTrue((df[["qfi_exact", "qfi_markovian"]] >= 0).all().all())
        np.testing.assert_allclose(df["gamma_t"], df["t"] * df["gamma"])

    def test_fi_rate_closed_form_column(self):
        """Test that the closed form matches the composed Markovian rate."""
        config = resolve_config("fi-rate", {"t_grid": "0.1:10:4:log"})
        df = run_sweep(config)
        np.testing.assert_allclose(df["fi_rate_closed_form"], df["fi_rate_markovian"], rtol=1e-10)

    def test_multi_steady_grid(self):
        """Test the steady two-probe sweep over gamma x T."""
        config = resolve_config("multi-additivity", {"steady": True, "gamma_grid": "0.5",
                                                     "T_grid": "0.5,1"})
        self.assertEqual(len(grid_points(config)), 2)
        df = run_sweep(config)
        self.assertTrue(np.isinf(df["t"]).all())
        self.assertTrue((df["qfi_common"] >= 0).all())

    def test_failed_cell_keeps_row(self):
        """Test that a numerical failure is recorded in the status column."""
        config = resolve_config("equilibrium-sweep", {"T_grid": "0.5,1", "gamma_grid": "1"})
        real = sweeps.p1_steady

        def flaky(params, cfg=None):
            if params.temperature == 1.0:
                raise NonConvergence("budget exhausted")
            return real(params, cfg)

        with mock.patch.object(sweeps, "p1_steady", side_effect=flaky):
            with self.assertLogs("fermi_thermometry.sweeps", level="WARNING"):
                df = run_sweep(config)
        self.assertEqual(list(df["status"]), ["ok", "nonconvergence"])
        self.assertTrue(np.isnan(df.loc[1, "p1_steady"]))


class TestReport(unittest.TestCase):
    """Test cases for dataset and metadata files."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.df = pd.DataFrame({"T": [0.1, 1.0], "gamma": [1.0, 1.0],
                                "p1_steady": [1.0 / 3.0, 0.3], "status": ["ok", "nonconvergence"]})

    def tearDown(self):
        self.tmp.cleanup()

    def test_csv_has_header_block(self):
        """Test the '#' header block followed by the column row."""
        out = Path(self.tmp.name) / "nested" / "eq.csv"
        config = resolve_config("equilibrium-sweep", {"out": str(out)})
        path = write_dataset(self.df, config)
        lines = path.read_text().splitlines()
        header = [line for line in lines if line.startswith("#")]
        self.assertIn("# command: equilibrium-sweep", header)
        self.assertEqual(lines[len(header)], "T,gamma,p1_steady,status")
        read_back = pd.read_csv(path, comment="#")
        pd.testing.assert_frame_equal(read_back, self.df)

    def test_csv_keeps_float_columns_exact(self):
        """Test that whole-valued floats stay float and values survive the round trip bit for bit."""
        out = Path(self.tmp.name) / "eq.csv"
        config = resolve_config("equilibrium-sweep", {"out": str(out)})
        read_back = pd.read_csv(write_dataset(self.df, config), comment="#",
                                float_precision="round_trip")
        self.assertEqual(read_back["gamma"].dtype, np.float64)
        self.assertEqual(read_back.loc[0, "p1_steady"], 1.0 / 3.0)

    def test_json_records(self):
        """Test that JSON output is an array of records."""
        out = Path(self.tmp.name) / "eq.json"
        config = resolve_config("equilibrium-sweep", {"out": str(out), "format": "json"})
        records = json.loads(write_dataset(self.df, config).read_text())
        self.assertEqual(len(records), 2)
        self.assertEqual(records[1]["status"], "nonconvergence")

    def test_metadata_sidecar(self):
        """Test config echo, tolerances, flags and sorted keys in the sidecar."""
        out = Path(self.tmp.name) / "eq.csv"
        config = resolve_config("equilibrium-sweep", {"out": str(out), "rel_tol": 1e-8})
        path = write_metadata(config, self.df, 1.25, {"note": np.float64(0.5)})
        self.assertEqual(path, metadata_path(out))
        text = path.read_text()
        meta = json.loads(text)
        self.assertEqual(list(meta), sorted(meta))
        self.assertEqual(meta["tolerances"]["rel_tol"], 1e-8)
        self.assertEqual(meta["config"]["command"], "equilibrium-sweep")
        self.assertFalse(meta["flags"]["all_ok"])
        self.assertEqual(meta["extra"]["note"], 0.5)

    def test_flags(self):
        """Test boundary and check counters."""
        df = pd.DataFrame({"boundary_flag": ["", "lower", "upper"], "status": ["ok"] * 3})
        flags = build_flags(df)
        self.assertEqual(flags["boundary_optima"], 2)
        self.assertTrue(flags["all_ok"])


if __name__ == '__main__':
    unittest.main()
