#!/usr/bin/env python

"""Helper modules."""
