#!/usr/bin/env python

"""Experiment trials and verification suites."""
