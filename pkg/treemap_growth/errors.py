#!/usr/bin/env python

"""Exception hierarchy."""


class TreemapGrowthError(RuntimeError):
    """Base class for all domain errors."""


class ConfigError(TreemapGrowthError, ValueError):
    """Invalid experiment configuration."""


# planar_map


class InvalidMap(TreemapGrowthError):
    """Rotation system does not describe a valid map."""


class BadInvolution(InvalidMap):
    """Twin is not a fixed-point-free involution."""


class NonPlanar(InvalidMap):
    """Euler characteristic differs from 2."""


class Disconnected(InvalidMap):
    """Dart action is not transitive."""


class EmptyMap(TreemapGrowthError, ValueError):
    """Operation undefined on the zero-edge map."""


class Unreachable(TreemapGrowthError):
    """Target set cannot be reached from the source set."""


class NotATree(TreemapGrowthError):
    """Edge set is not a tree (or not a spanning tree where one is required)."""


# mullin_codec


class InvalidWalk(TreemapGrowthError):
    """Walk violates the invariant of its kind."""


class WindowUnresolved(TreemapGrowthError):
    """Window structure depends on steps outside the provided walk."""


class TooLarge(TreemapGrowthError):
    """Exhaustive or exact computation refused above its size cap."""


class HorizonTooShort(TreemapGrowthError):
    """Fewer running minima than requested before the horizon."""


# walk_engines / dla_engine


class Singular(TreemapGrowthError):
    """Dirichlet system is degenerate."""


class MarginTooSmall(TreemapGrowthError):
    """Far target is too close to the cluster for the configured policy."""


class TargetAbsorbed(TreemapGrowthError):
    """DLA target became a cluster vertex."""


# map_surgery


class EmptyCut(TreemapGrowthError, ValueError):
    """Cut along an empty edge set."""


class NotInS(TreemapGrowthError):
    """Tuple violates the invariants of S."""


class NotInSPrime(TreemapGrowthError):
    """Tuple violates the invariants of S'."""


# mated_crt


class BadLength(TreemapGrowthError):
    """Walk length is not a positive multiple of the cell size."""


class RejectionBudgetExceeded(TreemapGrowthError):
    """Rejection sampler ran out of attempts."""


# estimation_harness


class DegenerateInput(TreemapGrowthError):
    """Regression input is degenerate."""


class InsufficientCounts(TreemapGrowthError):
    """Too few categories with adequate expected counts."""


class TooManyFailures(TreemapGrowthError):
    """Share of failed trials at some size exceeds the configured limit."""
