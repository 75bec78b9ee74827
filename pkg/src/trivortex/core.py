"""Planar point-vortex dynamics in the laboratory frame.

A vortex of strength ``g`` at the point ``p`` induces at ``r`` the velocity
``g * K(r - p)`` with kernel ``K(d) = (-d_y, d_x) / |d|^2``; the circulation
around it is ``2*pi*g``.  The induced motion conserves the interaction energy

    H = -(1/2) * sum_{i<j} g_i g_j log |r_i - r_j|^2,

the linear impulse ``M = sum_i g_i r_i`` and the angular impulse
``Theta = sum_i g_i |r_i|^2``.  When the total strength is nonzero the
centroid ``M / sum_i g_i`` is stationary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import CoincidentVortices

FloatArray = NDArray[np.float64]

# Below this pair separation the induced velocities are meaningless noise.
COINCIDENCE_FLOOR = 1e-12


def as_positions(positions: FloatArray | Sequence[Sequence[float]]) -> FloatArray:
    """Coerce to an (N, 2) float array, rejecting non-finite entries."""
    x = np.asarray(positions, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError(f"positions must have shape (N, 2), got {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("positions contain non-finite values")
    return x


def as_circulations(
    circulations: FloatArray | Sequence[float], n: int | None = None
) -> FloatArray:
    g = np.asarray(circulations, dtype=np.float64)
    if g.ndim != 1:
        raise ValueError(f"circulations must be one-dimensional, got shape {g.shape}")
    if n is not None and g.shape[0] != n:
        raise ValueError(f"expected {n} circulations, got {g.shape[0]}")
    if not np.isfinite(g).all():
        raise ValueError("circulations contain non-finite values")
    return g


def _separations(x: FloatArray, floor: float) -> tuple[FloatArray, FloatArray]:
    """Pairwise offsets and squared distances, guarding against collisions."""
    d = x[:, None, :] - x[None, :, :]
    rho2 = d[..., 0] ** 2 + d[..., 1] ** 2
    n = x.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    k = int(np.argmin(rho2[iu, ju]))
    if rho2[iu[k], ju[k]] < floor * floor:
        i, j = int(iu[k]), int(ju[k])
        raise CoincidentVortices(i, j, float(np.sqrt(rho2[i, j])))
    return d, rho2


def rhs(
    positions: FloatArray | Sequence[Sequence[float]],
    circulations: FloatArray | Sequence[float],
    *,
    floor: float = COINCIDENCE_FLOOR,
) -> FloatArray:
    """Velocities of every vortex under the mutual interaction.

    Parameters
    ----------
    positions : (N, 2) array
    circulations : (N,) array of vortex strengths
    floor : minimum admissible pair separation

    Returns the (N, 2) array of velocities.  Raises CoincidentVortices when
    any pair sits closer than ``floor``.
    """
    x = as_positions(positions)
    g = as_circulations(circulations, x.shape[0])
    d, rho2 = _separations(x, floor)
    np.fill_diagonal(rho2, np.inf)
    w = g[None, :] / rho2
    vx = -(w * d[..., 1]).sum(axis=1)
    vy = (w * d[..., 0]).sum(axis=1)
    return np.stack([vx, vy], axis=1)


def hamiltonian(
    positions: FloatArray | Sequence[Sequence[float]],
    circulations: FloatArray | Sequence[float],
    *,
    floor: float = COINCIDENCE_FLOOR,
) -> float:
    """Interaction energy of the configuration."""
    x = as_positions(positions)
    g = as_circulations(circulations, x.shape[0])
    _, rho2 = _separations(x, floor)
    iu, ju = np.triu_indices(x.shape[0], k=1)
    return float(-0.5 * np.sum(g[iu] * g[ju] * np.log(rho2[iu, ju])))


@dataclass(frozen=True, slots=True)
class ConservedSet:
    """Snapshot of the conserved quantities.

    ``r0`` is the stationary centroid, present only when the total strength
    is nonzero.
    """

    H: float
    M: tuple[float, float]
    Theta: float
    r0: tuple[float, float] | None


def conserved(
    positions: FloatArray | Sequence[Sequence[float]],
    circulations: FloatArray | Sequence[float],
) -> ConservedSet:
    """Evaluate energy, linear impulse, angular impulse and the centroid.

    Never raises: a coincident pair sends the energy to +/-inf rather than
    aborting, so the impulses stay reportable at singular snapshots.
    """
    x = as_positions(positions)
    g = as_circulations(circulations, x.shape[0])
    d = x[:, None, :] - x[None, :, :]
    rho2 = d[..., 0] ** 2 + d[..., 1] ** 2
    iu, ju = np.triu_indices(x.shape[0], k=1)
    with np.errstate(divide="ignore"):
        h = float(-0.5 * np.sum(g[iu] * g[ju] * np.log(rho2[iu, ju])))
    mx = float(np.dot(g, x[:, 0]))
    my = float(np.dot(g, x[:, 1]))
    theta = float(np.dot(g, x[:, 0] ** 2 + x[:, 1] ** 2))
    total = float(g.sum())
    if abs(total) > 1e-12 * float(np.abs(g).sum()):
        r0 = (mx / total, my / total)
    else:
        r0 = None
    return ConservedSet(H=h, M=(mx, my), Theta=theta, r0=r0)


def velocity_gradient(offset: tuple[float, float]) -> tuple[float, float, float, float]:
    """Jacobian entries of the pair kernel K at a given offset.

    Returns (dKx/ddx, dKx/ddy, dKy/ddx, dKy/ddy).  Used to propagate
    accelerations without finite differencing.
    """
    dx, dy = offset
    rho2 = dx * dx + dy * dy
    rho4 = rho2 * rho2
    return (
        2.0 * dx * dy / rho4,
        (dy * dy - dx * dx) / rho4,
        (dy * dy - dx * dx) / rho4,
        -2.0 * dx * dy / rho4,
    )


def flat_rhs(
    circulations: FloatArray | Sequence[float],
    *,
    floor: float = COINCIDENCE_FLOOR,
):
    """Adapter producing a flat-vector callable for the integrator.

    The state is ``[x1, y1, ..., xN, yN]``; the returned function maps
    ``(t, y) -> dy/dt``.
    """
    g = as_circulations(circulations)
    n = g.shape[0]

    def f(t: float, y: FloatArray) -> FloatArray:
        v = rhs(np.asarray(y, dtype=np.float64).reshape(n, 2), g, floor=floor)
        return v.reshape(2 * n)

    return f
