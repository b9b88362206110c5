#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

Finite measures on the half-line, the bounded-Lipschitz distance between them and the
shift and modulus functionals used by the regularity checks.
"""
from dataclasses import dataclass
import functools
import itertools
import logging
from typing import List, Tuple

import numpy as np

from thinningpy.const import ORACLE_MAX_ATOMS
from thinningpy.exceptions import CapExceededError, InvalidStateError

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

_LOGGER = logging.getLogger(__name__)

_FEASIBILITY_TOL = 1e-12


def _jit(func):
    """Compile ``func`` in nopython mode when numba is importable."""
    if not HAVE_NUMBA:  # pragma: no cover
        return func
    return numba.njit(nogil=True)(func)


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite measure sum_i w_i delta_{x_i} with sorted distinct atoms and w_i > 0."""

    atoms: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_atoms(cls, atoms, weights=None) -> "DiscreteMeasure":
        """Build a measure, merging coincident atoms and dropping zero weights.

        Args:
            atoms: Positions >= 0, in any order.
            weights: Nonnegative weights; unit weights when omitted.

        Raises
            InvalidStateError

        """
        atoms = np.asarray(atoms, dtype=float).ravel()
        weights = (
            np.ones_like(atoms) if weights is None else np.asarray(weights, dtype=float).ravel()
        )
        if atoms.shape != weights.shape:
            raise InvalidStateError("SHAPE_MISMATCH", f"{atoms.shape} != {weights.shape}")
        if np.any(atoms < 0) or not np.all(np.isfinite(atoms)):
            raise InvalidStateError("NEGATIVE_ATOM", "atoms must be finite and >= 0")
        if np.any(weights < 0):
            raise InvalidStateError("NEGATIVE_WEIGHT", "weights must be >= 0")
        positions, inverse = np.unique(atoms, return_inverse=True)
        merged = np.bincount(inverse, weights=weights, minlength=positions.size)
        keep = merged > 0
        return cls(positions[keep], merged[keep])

    @classmethod
    def empty(cls) -> "DiscreteMeasure":
        """Return the zero measure."""
        return cls(np.empty(0), np.empty(0))

    def __len__(self) -> int:
        """Return the number of atoms."""
        return int(self.atoms.size)

    @property
    def mass(self) -> float:
        """Return the total mass."""
        return float(self.weights.sum())

    def cdf(self, x):
        """Return mu([0, x])."""
        cumulative = np.concatenate([[0.0], np.cumsum(self.weights)])
        index = np.searchsorted(self.atoms, x, side="right")
        return cumulative[index] if np.ndim(x) else float(cumulative[index])

    def scaled(self, factor: float) -> "DiscreteMeasure":
        """Return factor * mu."""
        if factor < 0:
            raise InvalidStateError("NEGATIVE_WEIGHT", f"factor={factor}")
        if factor == 0:
            return DiscreteMeasure.empty()
        return DiscreteMeasure(self.atoms, self.weights * factor)

    def pair(self, values) -> float:
        """Return sum_i w_i values_i for values evaluated at the atoms."""
        return float(np.dot(self.weights, values))


def signed_difference(
    mu: DiscreteMeasure, nu: DiscreteMeasure
) -> Tuple[np.ndarray, np.ndarray]:
    """Return the merged support of mu and nu and the weights of mu - nu on it.

    Points where the difference vanishes are dropped; the chain constraints between
    their neighbours are implied by the triangle inequality.
    """
    atoms = np.concatenate([mu.atoms, nu.atoms])
    weights = np.concatenate([mu.weights, -nu.weights])
    support, inverse = np.unique(atoms, return_inverse=True)
    signed = np.bincount(inverse, weights=weights, minlength=support.size)
    keep = signed != 0
    return support[keep], signed[keep]


@_jit
def _compact(positions: np.ndarray, weights: np.ndarray, bottom: int, top: int) -> int:
    """Move the live kinks of a stack to its front and return the new top."""
    count = top - bottom
    positions[:count] = positions[bottom:top].copy()
    weights[:count] = weights[bottom:top].copy()
    return count


@_jit
def _chain_lp_kernel(gaps: np.ndarray, signed: np.ndarray) -> float:
    """Return max sum c_i y_i s.t. |y_i| <= 1 and |y_{i+1} - y_i| <= gap_i.

    Minimizes U = -V, a convex piecewise-linear function of the last coordinate.
    Kinks left of the minimizing plateau sit in one stack and kinks right of it in
    another, each ordered from the wall inwards, so every move happens at a stack top.
    Widening shifts the two lazy offsets apart and the kinks pushed past a wall are
    dropped from the stack bottom. The walls at -1 and 1 have infinite weight.
    """
    size = signed.shape[0]
    # at most one kink is split per coordinate
    capacity = 2 * size + 4
    left_pos = np.empty(capacity)
    left_weight = np.empty(capacity)
    right_pos = np.empty(capacity)
    right_weight = np.empty(capacity)
    left_bottom = 0
    left_top = 0
    right_bottom = 0
    right_top = 0
    left_offset = 0.0
    right_offset = 0.0
    minimum = 0.0
    for index in range(size):
        if index > 0:
            gap = gaps[index - 1]
            left_offset -= gap
            right_offset += gap
            while left_bottom < left_top and left_pos[left_bottom] + left_offset <= -1.0:
                left_bottom += 1
            while right_bottom < right_top and right_pos[right_bottom] + right_offset >= 1.0:
                right_bottom += 1
        slope = -signed[index]
        if slope > 0.0:
            if left_top > left_bottom:
                point = left_pos[left_top - 1] + left_offset
            else:
                point = -1.0
            value = minimum + slope * point
            remaining = slope
            while True:
                if right_top == capacity:
                    right_top = _compact(right_pos, right_weight, right_bottom, right_top)
                    right_bottom = 0
                if left_top == left_bottom:
                    moved = remaining
                elif remaining <= left_weight[left_top - 1]:
                    moved = remaining
                    left_weight[left_top - 1] -= remaining
                    if left_weight[left_top - 1] == 0.0:
                        left_top -= 1
                else:
                    moved = left_weight[left_top - 1]
                    left_top -= 1
                right_pos[right_top] = point - right_offset
                right_weight[right_top] = moved
                right_top += 1
                if moved == remaining:
                    break
                remaining -= moved
                if left_top > left_bottom:
                    following = left_pos[left_top - 1] + left_offset
                else:
                    following = -1.0
                value -= remaining * (point - following)
                point = following
            minimum = value
        elif slope < 0.0:
            if right_top > right_bottom:
                point = right_pos[right_top - 1] + right_offset
            else:
                point = 1.0
            value = minimum + slope * point
            remaining = -slope
            while True:
                if left_top == capacity:
                    left_top = _compact(left_pos, left_weight, left_bottom, left_top)
                    left_bottom = 0
                if right_top == right_bottom:
                    moved = remaining
                elif remaining <= right_weight[right_top - 1]:
                    moved = remaining
                    right_weight[right_top - 1] -= remaining
                    if right_weight[right_top - 1] == 0.0:
                        right_top -= 1
                else:
                    moved = right_weight[right_top - 1]
                    right_top -= 1
                left_pos[left_top] = point - left_offset
                left_weight[left_top] = moved
                left_top += 1
                if moved == remaining:
                    break
                remaining -= moved
                if right_top > right_bottom:
                    following = right_pos[right_top - 1] + right_offset
                else:
                    following = 1.0
                value -= remaining * (following - point)
                point = following
            minimum = value
    return -minimum


def _chain_lp(gaps: np.ndarray, signed: np.ndarray) -> float:
    """Return max sum c_i y_i s.t. |y_i| <= 1 and |y_{i+1} - y_i| <= gap_i."""
    return float(
        _chain_lp_kernel(
            np.ascontiguousarray(gaps, dtype=np.float64),
            np.ascontiguousarray(signed, dtype=np.float64),
        )
    )


def bl_distance(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Return the bounded-Lipschitz distance sup_{|phi|_BL <= 1} <mu - nu, phi>.

    On the merged support x_1 < ... < x_k the sup is the chain linear program with box
    constraints |phi_i| <= 1 and |phi_{i+1} - phi_i| <= x_{i+1} - x_i, since any
    feasible assignment extends to a 1-BL function by interpolation and clamping. It
    is solved exactly by a dynamic program over the concave value function of the last
    coordinate, whose kinks are kept in two stacks with lazy offsets.
    """
    support, signed = signed_difference(mu, nu)
    if support.size == 0:
        return 0.0
    value = _chain_lp(np.diff(support), signed)
    return max(value, 0.0)


@functools.lru_cache(maxsize=None)
def _vertex_patterns(size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Return (signs, coefficients) of every candidate vertex of a chain LP.

    A vertex fixes each edge as free or tight in either direction. Each block of
    tight edges then has exactly one atom on the box boundary, so
    phi = signs + coefficients @ gaps.
    """
    signs: List[List[int]] = []
    coefficients: List[np.ndarray] = []
    for edges in itertools.product((0, 1, -1), repeat=size - 1):
        blocks = []
        start = 0
        for index, edge in enumerate(edges):
            if edge == 0:
                blocks.append(range(start, index + 1))
                start = index + 1
        blocks.append(range(start, size))
        choices = [
            [(anchor, sign) for anchor in block for sign in (1, -1)] for block in blocks
        ]
        for anchors in itertools.product(*choices):
            row_signs = [0] * size
            matrix = np.zeros((size, size - 1), dtype=np.int8)
            for block, (anchor, sign) in zip(blocks, anchors):
                for atom in block:
                    row_signs[atom] = sign
                    for edge_index in range(anchor, atom):
                        matrix[atom, edge_index] = edges[edge_index]
                    for edge_index in range(atom, anchor):
                        matrix[atom, edge_index] = -edges[edge_index]
            signs.append(row_signs)
            coefficients.append(matrix)
    return np.asarray(signs, dtype=float), np.asarray(coefficients)


def bl_distance_oracle(
    mu: DiscreteMeasure, nu: DiscreteMeasure, max_atoms: int = ORACLE_MAX_ATOMS
) -> float:
    """Return the bounded-Lipschitz distance by brute force over LP vertices.

    Raises
        CapExceededError: the merged support has more than ``max_atoms`` points.

    """
    support, signed = signed_difference(mu, nu)
    size = support.size
    if size > max_atoms:
        raise CapExceededError("ORACLE_TOO_LARGE", f"{size} atoms > {max_atoms}")
    if size == 0:
        return 0.0
    if size == 1:
        return float(abs(signed[0]))
    gaps = np.diff(support)
    signs, coefficients = _vertex_patterns(size)
    phi = signs + coefficients @ gaps
    feasible = np.all(np.abs(phi) <= 1.0 + _FEASIBILITY_TOL, axis=1)
    steps = np.abs(np.diff(phi, axis=1))
    feasible &= np.all(steps <= gaps + _FEASIBILITY_TOL * (1.0 + gaps), axis=1)
    return float(np.max(phi[feasible] @ signed))


def shift_pushforward(mu: DiscreteMeasure, h: float) -> DiscreteMeasure:
    """Return S_h* mu: atoms above h move down by h, the rest leave the system."""
    if h < 0:
        raise InvalidStateError("NEGATIVE_SHIFT", f"h={h}")
    if h == 0:
        return mu
    keep = mu.atoms > h
    return DiscreteMeasure(mu.atoms[keep] - h, mu.weights[keep])


def modulus(mu: DiscreteMeasure, h: float) -> float:
    """Return omega(h; mu), the largest mass in a window (x, x + h].

    The sup is attained with the right edge of the window at an atom.
    """
    if h <= 0:
        raise InvalidStateError("NON_POSITIVE_WIDTH", f"h={h}")
    if len(mu) == 0:
        return 0.0
    cumulative = np.concatenate([[0.0], np.cumsum(mu.weights)])
    below = np.searchsorted(mu.atoms, mu.atoms - h, side="right")
    return float(np.max(cumulative[1:] - cumulative[below]))


def discretize(solution, t: float, m: int) -> Tuple[DiscreteMeasure, float]:
    """Return an m-atom approximation of the limit measure at time t and its error.

    Atoms sit at the conditional quantile midpoints of rho(t) S_t* F0, each carrying
    mass rho(t)^2 / m. A 1-BL test function moves by at most min(width, 2) inside a
    quantile cell, so the returned error bounds the change of any BL distance to the
    limit.

    Args:
        solution (KineticSolution): Limit to approximate.
        t (float): Time.
        m (int): Number of atoms.

    Raises
        InvalidStateError

    Returns
        Tuple[DiscreteMeasure, float]: measure and error certificate.

    """
    if m < 1:
        raise InvalidStateError("NON_POSITIVE_COUNT", f"m={m}")
    rho = float(solution.rho(t))
    if rho <= 0:
        return DiscreteMeasure.empty(), 0.0
    density = solution.density
    base = float(density.cdf(t))

    def inverse(levels: np.ndarray) -> np.ndarray:
        cdf_levels = np.clip(base + levels * rho, 0.0, 1.0)
        return np.maximum(np.asarray(density.quantile(cdf_levels)) - t, 0.0)

    edges = inverse(np.arange(m + 1) / m)
    midpoints = inverse((2.0 * np.arange(1, m + 1) - 1.0) / (2.0 * m))
    mass = rho * rho / m
    error = float(mass * np.sum(np.minimum(np.diff(edges), 2.0)))
    measure = DiscreteMeasure.from_atoms(midpoints, np.full(m, mass))
    _LOGGER.debug("Discretized %s at t=%s with %s atoms, error %s", solution.name, t, m, error)
    return measure, error
