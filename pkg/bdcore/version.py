# -*- coding: utf-8 -*-
"""bdcore version number"""

__version__ = "0.1.0"
