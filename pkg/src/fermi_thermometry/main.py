"""
Main script to run fermionic-probe thermometry sweeps.
"""

import sys
import argparse
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from pathlib import Path

# Add src to path (main.py is in src/fermi_thermometry/, so parent.parent is src/)
sys.path.insert(0, str(Path(__file__).parent.parent))

from fermi_thermometry.config import COMMANDS, FORMATS, resolve_config
from fermi_thermometry.errors import ConfigError, InvalidParameters
from fermi_thermometry.report import print_summary, write_dataset, write_metadata
from fermi_thermometry.sweeps import (
    additivity_sensitivity,
    optimum_per_temperature,
    run_sweep,
)
from fermi_thermometry.verification import run_checks

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

FLAG_KEYS = ("epsilon", "mu", "gamma", "temperature", "p0", "t_grid", "gamma_grid",
             "T_grid", "epsilons", "out", "format", "rel_tol", "abs_tol", "jobs",
             "steady", "verbose")

DESCRIPTIONS = {
    "equilibrium-sweep": "Steady-state noise-to-signal ratio versus temperature",
    "transient-fi": "Exact and Markovian QFI versus interrogation time",
    "fi-rate": "Fisher-information rate versus interrogation time",
    "tstar-contour": "Optimal interrogation time over a coupling x temperature grid",
    "gamma-opt": "Steady-state QFI and maximal FI rate versus coupling",
    "multi-additivity": "Two probes in a common bath against independent baths",
    "verify": "Run the numerical self-checks",
}

LONG_DESCRIPTIONS = {
    "multi-additivity": (
        "Two probes in a common bath against independent baths. With the default "
        "energies (mu, mu+epsilon) the transient ratio starts slightly above 1 "
        "(about 1.14 at Gamma t = 0.2 for Gamma = 0.5, T = 1), drops below 1 near "
        "Gamma t = 1 and rises above 1 again at later times."),
}


def build_parser() -> argparse.ArgumentParser:
    """Flags default to None so unset values fall through to the config file."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--epsilon', type=float, default=None,
                        help='Probe energy (default: 1)')
    common.add_argument('--mu', type=float, default=None,
                        help='Bath chemical potential (default: 0)')
    common.add_argument('--gamma', type=float, default=None,
                        help='Coupling rate (default: 1)')
    common.add_argument('--temperature', type=float, default=None,
                        help='Bath temperature (default: 1)')
    common.add_argument('--p0', type=float, default=None,
                        help='Initial occupation of each probe (default: 0)')
    common.add_argument('--t-grid', dest='t_grid', default=None,
                        help='Time grid, min:max:n[:lin|log] or a comma list')
    common.add_argument('--gamma-grid', dest='gamma_grid', default=None,
                        help='Coupling grid, min:max:n[:lin|log] or a comma list')
    common.add_argument('--T-grid', dest='T_grid', default=None,
                        help='Temperature grid, min:max:n[:lin|log] or a comma list')
    common.add_argument('--epsilons', default=None,
                        help='Two-probe energies e1,e2 (default: mu, mu+epsilon)')
    common.add_argument('--out', default=None,
                        help='Output file (default: output/<command>.<format>)')
    common.add_argument('--format', choices=FORMATS, default=None,
                        help='Output format (default: csv)')
    common.add_argument('--rel-tol', dest='rel_tol', type=float, default=None,
                        help='Relative quadrature tolerance (default: 1e-9)')
    common.add_argument('--abs-tol', dest='abs_tol', type=float, default=None,
                        help='Absolute quadrature tolerance (default: 1e-12)')
    common.add_argument('--jobs', type=int, default=None,
                        help='Worker processes (default: CPU count)')
    common.add_argument('--config', default=None,
                        help='key=value file; flags take precedence over it')
    common.add_argument('--steady', action='store_true', default=None,
                        help='multi-additivity: compare steady states over the gamma x T grid')
    common.add_argument('--verbose', action='store_true', default=None,
                        help='Debug logging')

    parser = argparse.ArgumentParser(
        prog='fermi-thermometry',
        description='Temperature estimation with fermionic probes in a fermionic bath')
    commands = parser.add_subparsers(dest='command', required=True)
    for name in COMMANDS:
        commands.add_parser(name, parents=[common], help=DESCRIPTIONS[name],
                            description=LONG_DESCRIPTIONS.get(name, DESCRIPTIONS[name]))
    return parser


def _extra_metadata(config, df) -> dict:
    if config.command == "gamma-opt":
        return {
            "gamma_star_qfi_steady": optimum_per_temperature(df, "qfi_steady"),
            "gamma_star_max_fi_rate": optimum_per_temperature(df, "max_fi_rate"),
        }
    if config.command == "multi-additivity":
        try:
            return {"epsilon1_sensitivity": additivity_sensitivity(config)}
        except ArithmeticError as e:
            return {"epsilon1_sensitivity": f"failed: {e}"}
    return {}


def main(argv=None) -> int:
    """Main function to run a thermometry command."""
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )

    print("="*60)
    print("FERMIONIC PROBE THERMOMETRY")
    print("="*60)

    # Step 1: Resolve configuration
    print(f"\nStep 1: Resolving configuration for '{args.command}'...")
    try:
        flags = {key: getattr(args, key) for key in FLAG_KEYS}
        config = resolve_config(args.command, flags, args.config)
    except ConfigError as e:
        print(f"✗ Configuration error: {e}")
        return EXIT_CONFIG
    print(f"✓ Configuration resolved")
    print(f"  Output: {config.out} ({config.format})")
    print(f"  Tolerances: rel={config.rel_tol:g}, abs={config.abs_tol:g}")
    print(f"  Workers: {config.jobs}")
    print()

    # Step 2: Evaluate the grid
    started = time.perf_counter()
    if config.command == "verify":
        print("Step 2: Running self-checks...")
    else:
        print("Step 2: Evaluating grid cells...")
    try:
        if config.command == "verify":
            df = run_checks(config.probe(), config.quad)
        else:
            pool = ProcessPoolExecutor(max_workers=config.jobs) if config.jobs > 1 else nullcontext()
            with pool as executor:
                df = run_sweep(config, executor)
        extra = _extra_metadata(config, df)
    except (ConfigError, InvalidParameters) as e:
        print(f"✗ Invalid parameters: {e}")
        return EXIT_CONFIG
    except ArithmeticError as e:
        print(f"✗ Numerical failure: {e}")
        return EXIT_NUMERICAL
    wall_time = time.perf_counter() - started
    print(f"✓ Evaluated {len(df)} rows")

    # Step 3: Write results
    print("\nStep 3: Writing results...")
    try:
        data_path = write_dataset(df, config)
        write_metadata(config, df, wall_time, extra, data_path)
        print(f"✓ Saved data to {data_path}")
    except OSError as e:
        print(f"✗ Error writing results: {e}")
        return EXIT_CONFIG

    print_summary(config, df, data_path, wall_time)

    if "passed" in df.columns and not df["passed"].all():
        print("✗ Some checks failed")
        return EXIT_NUMERICAL
    if "status" in df.columns and not (df["status"] == "ok").all():
        print("✗ Some grid cells failed")
        return EXIT_NUMERICAL

    print("="*60)
    print("Run complete!")
    print("="*60)
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
