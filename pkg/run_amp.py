"""
This script runs the optimal-AMP experiments (state evolution, single runs, alpha sweeps, curve
construction and the self-test) and writes their CSV/JSON results to an output directory.
"""

import sys

from optimal_amp.harness.cli import main

sys.exit(main())

# Usage example:
# python3 run_amp.py sweep --config config/alpha_sweep.yaml --out ./results/fig2 --threads 4
