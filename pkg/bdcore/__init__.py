# -*- coding: utf-8 -*-
"""bdcore"""
from pathlib import Path

from bdcore.version import __version__

__author__ = "bdcore developers"

PACKAGE_DIR = Path(__file__).parent
CONFIGS_DIR = PACKAGE_DIR.joinpath("configs")
DEFAULT_CONFIG = CONFIGS_DIR.joinpath("default.json")
DESK_SCALE_CONFIG = CONFIGS_DIR.joinpath("desk_scale.json")
