#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Cubic mean-field Ising laboratory, MCP entry point
Exposes phase diagrams, exact magnetization laws and Stein certificates as MCP tools
Implemented using the official MCP library

This is a backward-compatible entry point that imports from the package.
"""

import sys

from src.cubic_lab.main import main

if __name__ == "__main__":
    sys.exit(main(["serve"]))
