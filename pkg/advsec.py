#!/usr/bin/env python3
"""
Точка входа advsec

    python advsec.py seceval --config experiments/blobs_seceval.json
"""

from cli.main import main

if __name__ == "__main__":
    main()

# python advsec.py attack --config experiments/plate_patch_attack.json --workers 4
