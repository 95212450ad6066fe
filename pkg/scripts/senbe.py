#!/usr/bin/env python3
"""
Run the senbe command line from a source checkout.

Usage:
    python scripts/senbe.py [-v] <command> [options]

Example:
    python scripts/senbe.py bound --dist two-point:b=1 --n 100 --triple t4iid
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.python.cli import main  # noqa: E402

if __name__ == "__main__":
    main()
