"""Scalar test functions on phase spaces.

Fields are plain descriptions; engines evaluate them.  Edge coordinates are
the flat coordinates of one edge decoration and have closed-form frame
derivatives.  Holonomy coordinates and class functions are built over a path
and read through whichever holonomy functor the engine carries, so the same
description works on the product space and on the coupled space.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ribbon_graph import Path

INVARIANTS = ("re_trace", "abs_trace_sq")


@dataclass(frozen=True)
class EdgeCoordinate:
    edge: str
    index: int


@dataclass(frozen=True)
class HolonomyCoordinate:
    path: Path
    index: int


@dataclass(frozen=True)
class ClassFunction:
    """Conjugation-invariant function of a loop holonomy."""

    path: Path
    invariant: str = "re_trace"


@dataclass(frozen=True)
class FlatnessDefect:
    """Squared coordinate distance of a vertex/face holonomy from 1.

    Smooth, vanishes exactly on the flat subspace of its label.
    """

    label: str


@dataclass(frozen=True)
class GroupCoordinate:
    """Coordinate of the group factor of a product-engine point."""

    index: int


ScalarField = object  # any of the dataclasses above
