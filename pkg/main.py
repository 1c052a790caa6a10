#!/usr/bin/env python3
"""
PyQuadMat - Exact block-recursive linear algebra
Main entry point for the command line tool
"""

import sys

from cli.commands import main


if __name__ == '__main__':
    sys.exit(main())
