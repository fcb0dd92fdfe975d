"""Self-organizing map lattice with winner-take-all competition.

The grid supports two learning-rate regimes.  In the error-driven regime the
rate is the winner's quantization error normalized by the largest error seen
so far, so the map keeps adapting whenever novel inputs arrive.  In the
classic regime the rate decays geometrically with the update count.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class SomMode(enum.Enum):
    """Weight-update regime of the grid."""

    PARAMETERLESS = "parameterless"
    CLASSIC = "classic"


@dataclass
class SomParams:
    """Tuning constants for the lattice update.

    ``theta_max`` defaults to the grid area (width * height) when left as
    None; ``theta_min`` floors the neighborhood radius.  A cell's weight only
    moves when rate * neighborhood exceeds ``cell_update_threshold``.
    """

    mode: SomMode = SomMode.PARAMETERLESS
    theta_min: float = 1.0
    theta_max: float | None = None
    cell_update_threshold: float = 0.005
    classic_rate_scale: float = 0.1
    classic_rate_decay: float = 0.999999

    def __post_init__(self) -> None:
        if self.theta_max is not None and self.theta_min > self.theta_max:
            raise ValueError("theta_min must not exceed theta_max")
        if self.cell_update_threshold <= 0:
            raise ValueError("cell_update_threshold must be positive")


class SomGrid:
    """2D lattice of weight vectors competing for inputs.

    Cells are indexed row-major: ``index = row * width + col``.  Lattice
    distance is the Chebyshev metric (max of per-axis index differences).
    """

    def __init__(
        self,
        width: int,
        height: int,
        dim: int = 2,
        params: SomParams | None = None,
        rng: np.random.Generator | None = None,
        weights: np.ndarray | None = None,
    ) -> None:
        if width < 1 or height < 1:
            raise ValueError("grid dimensions must be positive")
        self.width = width
        self.height = height
        self.dim = dim
        self.params = params if params is not None else SomParams()
        if self.params.theta_max is None:
            self.params.theta_max = float(width * height)

        if weights is not None:
            weights = np.array(weights, dtype=float)
            if weights.shape != (width * height, dim):
                raise ValueError(
                    f"weights must have shape {(width * height, dim)}, got {weights.shape}"
                )
            self.weights = weights
        else:
            if rng is None:
                rng = np.random.default_rng()
            self.weights = rng.random((width * height, dim))

        self.iteration = 0
        self.max_error = 0.0
        self.last_epsilon = 0.0

        # Squared Chebyshev distance between every pair of cells, precomputed
        # once; rows are reused on every update.
        n = width * height
        rows = np.arange(n) // width
        cols = np.arange(n) % width
        cheb = np.maximum(
            np.abs(rows[:, None] - rows[None, :]),
            np.abs(cols[:, None] - cols[None, :]),
        )
        self.cheb = cheb.astype(np.int32)
        self._cheb2 = cheb.astype(float) ** 2
        self._classic_h: np.ndarray | None = None

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def cell_coords(self, index: int) -> tuple[int, int]:
        """(row, col) of a row-major cell index."""
        return index // self.width, index % self.width

    def chebyshev(self, i: int, j: int) -> int:
        """Lattice Chebyshev distance between two cell indices."""
        return int(self.cheb[i, j])

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"input must have shape ({self.dim},), got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("input components must be finite")
        return x

    def find_winner(self, x: np.ndarray) -> int:
        """Index of the cell whose weight is closest to ``x`` in Euclidean
        distance; ties go to the lowest row-major index."""
        x = self._check_input(x)
        diff = self.weights - x
        d2 = np.einsum("ij,ij->i", diff, diff)
        return int(np.argmin(d2))

    def plsom_learning_rate(self, x: np.ndarray, winner: int) -> tuple[float, float]:
        """Error-driven rate for one update, without committing it.

        Returns ``(epsilon, new_max_error)`` where the running maximum error
        is raised to the current winner error if that is larger, and epsilon
        is the current error divided by the new maximum (0 when the maximum
        is still 0).
        """
        x = self._check_input(x)
        err = float(np.linalg.norm(x - self.weights[winner]))
        new_max = max(err, self.max_error)
        eps = err / new_max if new_max > 0.0 else 0.0
        return eps, new_max

    def _learning_terms(self, x: np.ndarray, winner: int) -> tuple[float, np.ndarray]:
        """Rate and per-cell neighborhood factors for this update.

        Commits the running maximum error in the error-driven mode.
        """
        if self.params.mode is SomMode.PARAMETERLESS:
            eps, new_max = self.plsom_learning_rate(x, winner)
            self.max_error = new_max
            # The neighborhood denominator scales with the grid area because
            # the squared lattice distance itself spans [0, ~area]; at the
            # theta_min floor this reduces to the plain exp(-dist^2) kernel.
            theta = max(eps * self.params.theta_max, self.params.theta_min)
            h = np.exp(-self._cheb2[winner] / theta)
        else:
            eps = self.params.classic_rate_scale * (
                self.params.classic_rate_decay ** self.iteration
            )
            if self._classic_h is None:
                self._classic_h = np.exp(-self._cheb2)
            h = self._classic_h[winner]
        return eps, h

    def update(self, x: np.ndarray) -> int:
        """Apply one competitive update for input ``x``; returns the winner.

        Every cell whose rate * neighborhood factor exceeds the update
        threshold moves toward the input by that fraction; the rest stay
        bit-identical.  The iteration counter always advances by one.
        """
        x = self._check_input(x)
        diff = self.weights - x
        d2 = np.einsum("ij,ij->i", diff, diff)
        winner = int(np.argmin(d2))

        eps, h = self._learning_terms(x, winner)
        self.last_epsilon = eps
        gate = eps * h
        gate = np.where(gate > self.params.cell_update_threshold, gate, 0.0)
        self.weights -= gate[:, None] * diff
        self.iteration += 1
        return winner
