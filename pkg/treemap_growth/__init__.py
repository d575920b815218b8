#!/usr/bin/env python

"""Growth processes on spanning-tree-weighted random planar maps."""

from .planar_map import *

__version__ = "0.1.0.dev0"
