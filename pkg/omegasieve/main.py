"""
omegasieve - Main Entry Point
Usage: python -m omegasieve.main <constants|verify|ekac|density|lemmas|selftest> [options]
Requires: numpy, scipy, cryptography
"""

import sys

from omegasieve.cli import main


if __name__ == "__main__":
    sys.exit(main())
