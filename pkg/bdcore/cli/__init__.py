# -*- coding: utf-8 -*-
"""bdcore command line interface"""
