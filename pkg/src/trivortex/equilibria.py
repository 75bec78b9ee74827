"""Critical points of the reduced flows.

Catalogs of equilibria and singular points for the identical-strengths
sphere and for the dipole-plus-vortex hyperboloid families, together with
linearizations, separatrix energy levels, critical impact offsets, and the
branch sweeps behind bifurcation diagrams.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import GammaOne, NotAnEquilibrium
from .reduction import (
    HYPERBOLOID,
    SPHERE,
    NambuState,
    ReducedSystemSpec,
    nambu_rhs,
    reduced_gradients,
    reduced_hamiltonian,
)

EQUILIBRIUM = "equilibrium"
SINGULARITY = "singularity"

# saddle-node threshold for the asymmetric family
GAMMA_SADDLE_NODE = math.sqrt(3.0) / 2.0

_DISC_TOL = 1e-12
_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True, slots=True)
class CriticalPoint:
    """One isolated critical point of a reduced flow.

    ``existence`` states the parameter window the point lives in as a
    human-readable predicate on (Gamma, Theta).  ``pair`` names the two
    vortices whose collision a singularity represents.  ``degenerate``
    marks branches evaluated exactly at their fold.
    """

    coords: tuple[float, float, float]
    theta: float
    geometry: str
    kind: str
    label: str
    existence: str
    eigenvalues: tuple[complex, complex, complex] | None = None
    pair: tuple[int, int] | None = None
    degenerate: bool = False

    def as_state(self) -> NambuState:
        X, Y, Z = self.coords
        return NambuState(X, Y, Z, self.theta, self.geometry)


def jacobian(
    spec: ReducedSystemSpec, point: CriticalPoint
) -> tuple[np.ndarray, tuple[complex, complex, complex]]:
    """Linearize the reduced flow at an equilibrium.

    Returns the 3x3 Jacobian together with its eigenvalues. The flow
    preserves both the energy and the leaf radius, so the characteristic
    cubic carries a guaranteed zero root; that root is deflated first and
    the surviving quadratic yields an exact +/- pair, real at saddles and
    purely imaginary at centers.
    """
    if spec.geometry != point.geometry:
        raise ValueError("spec geometry does not match the critical point")
    X, Y, Z = point.coords
    rate = nambu_rhs(spec, point.as_state())
    scale = max(1.0, abs(X), abs(Y), abs(Z))
    residual = max(abs(c) for c in rate)
    if residual > _RESIDUAL_TOL * scale:
        raise NotAnEquilibrium(residual)

    hx, hz, hxx, hxz, hzz = reduced_gradients(spec, X, Z, point.theta)
    s = 1.0 if spec.geometry == SPHERE else -1.0
    jac = np.array(
        [
            [4.0 * Y * hxz, 4.0 * hz, 4.0 * Y * hzz],
            [
                s * 4.0 * Z * hxx - 4.0 * hz - 4.0 * X * hxz,
                0.0,
                s * 4.0 * hx + s * 4.0 * Z * hxz - 4.0 * X * hzz,
            ],
            [-4.0 * Y * hxx, -4.0 * hx, -4.0 * Y * hxz],
        ]
    )
    # trace and determinant both vanish, so the cubic is lambda^3 + m2*lambda
    m2 = (
        jac[0, 0] * jac[1, 1]
        - jac[0, 1] * jac[1, 0]
        + jac[0, 0] * jac[2, 2]
        - jac[0, 2] * jac[2, 0]
        + jac[1, 1] * jac[2, 2]
        - jac[1, 2] * jac[2, 1]
    )
    lam = cmath.sqrt(complex(-m2, 0.0))
    return jac, (complex(0.0), lam, -lam)


def _with_eigenvalues(spec: ReducedSystemSpec, point: CriticalPoint) -> CriticalPoint:
    _, eigs = jacobian(spec, point)
    return replace(point, eigenvalues=eigs)


def equilibria_111(theta: float) -> list[CriticalPoint]:
    """Catalog the eight critical points for three equal strengths.

    Five equilibria (three collinear saddles and the two poles) plus the
    three pair-collision singularities, all scaling linearly with the leaf
    radius ``theta``.
    """
    if not (theta > 0.0) or not math.isfinite(theta):
        raise ValueError("the identical-strengths leaf requires Theta > 0")
    spec = ReducedSystemSpec.for_circulations([1.0, 1.0, 1.0])
    window = "Theta > 0"
    half = 0.5 * theta
    wing = GAMMA_SADDLE_NODE * theta  # sqrt(3)/2 * Theta
    points = [
        CriticalPoint((0.0, 0.0, theta), theta, SPHERE, EQUILIBRIUM, "collinear-eq", window),
        CriticalPoint((wing, 0.0, -half), theta, SPHERE, EQUILIBRIUM, "collinear-eq", window),
        CriticalPoint((-wing, 0.0, -half), theta, SPHERE, EQUILIBRIUM, "collinear-eq", window),
        CriticalPoint((0.0, theta, 0.0), theta, SPHERE, EQUILIBRIUM, "pole+", window),
        CriticalPoint((0.0, -theta, 0.0), theta, SPHERE, EQUILIBRIUM, "pole-", window),
        CriticalPoint(
            (0.0, 0.0, -theta), theta, SPHERE, SINGULARITY, "pair-singularity",
            window, pair=(0, 1),
        ),
        CriticalPoint(
            (wing, 0.0, half), theta, SPHERE, SINGULARITY, "pair-singularity",
            window, pair=(1, 2),
        ),
        CriticalPoint(
            (-wing, 0.0, half), theta, SPHERE, SINGULARITY, "pair-singularity",
            window, pair=(0, 2),
        ),
    ]
    return [
        _with_eigenvalues(spec, p) if p.kind == EQUILIBRIUM else p for p in points
    ]


def equilibria_11m1(theta: float) -> list[CriticalPoint]:
    """Critical points for strengths (1, 1, -1) at fixed leaf radius.

    Negative ``theta`` carries the two triangular equilibria and the
    equal-pair singularity; positive ``theta`` a single collinear
    equilibrium and no singularities.  At ``theta == 0`` the singular set
    is the whole cone Z == |X| with no isolated points, so the catalog is
    empty.
    """
    if not math.isfinite(theta):
        raise ValueError("Theta must be finite")
    if theta == 0.0:
        return []
    spec = ReducedSystemSpec.for_circulations([1.0, 1.0, -1.0])
    points: list[CriticalPoint] = []
    if theta < 0.0:
        window = "Theta < 0"
        side = math.sqrt(3.0) * theta
        points.append(
            CriticalPoint(
                (0.0, side, -2.0 * theta), theta, HYPERBOLOID, EQUILIBRIUM,
                "E_tri+", window,
            )
        )
        points.append(
            CriticalPoint(
                (0.0, -side, -2.0 * theta), theta, HYPERBOLOID, EQUILIBRIUM,
                "E_tri-", window,
            )
        )
        points.append(
            CriticalPoint(
                (0.0, 0.0, -theta), theta, HYPERBOLOID, SINGULARITY, "S_11",
                window, pair=(0, 1),
            )
        )
    else:
        points.append(
            CriticalPoint(
                (0.0, 0.0, theta), theta, HYPERBOLOID, EQUILIBRIUM, "E_-1",
                "Theta > 0",
            )
        )
    return [
        _with_eigenvalues(spec, p) if p.kind == EQUILIBRIUM else p for p in points
    ]


def _leaf_z(theta: float, x: float, y: float = 0.0) -> float:
    return math.sqrt(theta * theta + x * x + y * y)


def equilibria_gamma(gamma: float, theta: float) -> list[CriticalPoint]:
    """Critical points for strengths (1, Gamma, -1), Gamma positive, != 1.

    Returns only the branches whose existence window contains (Gamma,
    Theta). The two collinear roots merge in a saddle-node at Gamma =
    sqrt(3)/2; exactly at the fold both are returned, flagged degenerate.
    """
    if not (gamma > 0.0) or not math.isfinite(gamma):
        raise ValueError("Gamma must be positive and finite")
    if abs(gamma - 1.0) < 1e-12:
        raise GammaOne("Gamma = 1 branches are poles; use equilibria_11m1")
    if not math.isfinite(theta) or theta == 0.0:
        raise ValueError("Theta must be finite and nonzero")

    spec = ReducedSystemSpec.for_circulations([1.0, gamma, -1.0])
    g = gamma
    points: list[CriticalPoint] = []

    if theta < 0.0:
        x_tri = g * theta * (g - 1.0) / (g + 1.0)
        side = math.sqrt(3.0) * g * theta
        for sgn, tag in ((1.0, "E_tri+"), (-1.0, "E_tri-")):
            y = sgn * side
            points.append(
                CriticalPoint(
                    (x_tri, y, _leaf_z(theta, x_tri, y)), theta, HYPERBOLOID,
                    EQUILIBRIUM, tag, "Theta < 0",
                )
            )

    disc = 4.0 * g * g - 3.0
    degenerate = abs(disc) <= _DISC_TOL
    if disc >= -_DISC_TOL:
        root = math.sqrt(max(disc, 0.0))
        if theta > 0.0:
            # written to stay finite through Gamma = 1
            x_plus = 4.0 * g * theta * (g * g - 1.0) / (1.0 - 2.0 * g * g - root)
            points.append(
                CriticalPoint(
                    (x_plus, 0.0, _leaf_z(theta, x_plus)), theta, HYPERBOLOID,
                    EQUILIBRIUM, "E_-1", "Theta > 0 and Gamma >= sqrt(3)/2",
                    degenerate=degenerate,
                )
            )
        x_minus = g * theta * (1.0 - 2.0 * g * g - root) / (g * g - 1.0)
        if theta > 0.0 and g < 1.0:
            points.append(
                CriticalPoint(
                    (x_minus, 0.0, _leaf_z(theta, x_minus)), theta, HYPERBOLOID,
                    EQUILIBRIUM, "E_Gamma", "Theta > 0 and sqrt(3)/2 <= Gamma < 1",
                    degenerate=degenerate,
                )
            )
        elif theta < 0.0 and g > 1.0:
            points.append(
                CriticalPoint(
                    (x_minus, 0.0, _leaf_z(theta, x_minus)), theta, HYPERBOLOID,
                    EQUILIBRIUM, "E_1", "Theta < 0 and Gamma > 1",
                )
            )

    if theta < 0.0:
        points.append(
            CriticalPoint(
                (0.0, 0.0, -theta), theta, HYPERBOLOID, SINGULARITY, "S_1Gamma",
                "Theta < 0", pair=(0, 1),
            )
        )
    if theta * (g - 1.0) > 0.0:
        x_s = 2.0 * g * theta / (g * g - 1.0)
        points.append(
            CriticalPoint(
                (x_s, 0.0, _leaf_z(theta, x_s)), theta, HYPERBOLOID, SINGULARITY,
                "S_-1Gamma", "Theta*(Gamma-1) > 0", pair=(1, 2),
            )
        )

    return [
        _with_eigenvalues(spec, p) if p.kind == EQUILIBRIUM else p for p in points
    ]


def separatrix_energy(gamma: float, theta: float) -> float | None:
    """Energy level of the separatrix at the given strengths and leaf.

    The level is set by the governing saddle: the triangular pair for
    negative ``theta``, the collinear equilibrium for positive ``theta``
    when it exists. Returns None when no saddle exists, which happens for
    positive ``theta`` below the saddle-node threshold, and on the
    singular leaf ``theta == 0``.
    """
    if not (gamma > 0.0) or not math.isfinite(gamma):
        raise ValueError("Gamma must be positive and finite")
    if theta == 0.0:
        return None
    same = abs(gamma - 1.0) < 1e-12
    if theta > 0.0 and gamma < GAMMA_SADDLE_NODE - _DISC_TOL:
        return None
    catalog = equilibria_11m1(theta) if same else equilibria_gamma(gamma, theta)
    want = "E_tri+" if theta < 0.0 else "E_-1"
    for p in catalog:
        if p.label == want:
            spec = ReducedSystemSpec.for_circulations(
                [1.0, 1.0, -1.0] if same else [1.0, gamma, -1.0]
            )
            return reduced_hamiltonian(spec, p.as_state())
    return None


def critical_rho(gamma: float) -> tuple[float, float | None]:
    """Critical impact offsets bounding the exchange window at unit d.

    The lower bound is -1 for every strength ratio. The upper bound
    equates the incoming pair's energy with the collinear saddle's level;
    it exists only above the saddle-node threshold sqrt(3)/2. Both values
    use the closed forms, with the leaf radius tied to the offset via
    Theta = Gamma*(2*rho + 1).
    """
    if not (gamma > 0.0) or not math.isfinite(gamma):
        raise ValueError("Gamma must be positive and finite")
    g = gamma
    disc = 4.0 * g * g - 3.0
    if disc < -_DISC_TOL:
        return (-1.0, None)
    root = math.sqrt(max(disc, 0.0))
    # collinear saddle on the Theta = 1 leaf; scaling in Theta then gives
    # the critical leaf in closed form
    x1 = 4.0 * g * (g * g - 1.0) / (1.0 - 2.0 * g * g - root)
    z1 = math.sqrt(1.0 + x1 * x1)
    a1 = (z1 + 1.0) * (1.0 + g) / (2.0 * g)
    d1 = (g * g + 1.0) * z1 + (1.0 - g * g) - 2.0 * g * x1
    a2 = d1 / (2.0 * g * (1.0 + g))
    a3 = g * (z1 + x1) / (1.0 + g)
    theta_c = g * g * a1**g * a2 ** (-g) / a3
    return (-1.0, (theta_c / g - 1.0) / 2.0)


def bifurcation_sweep(
    theta: float, gamma_start: float, gamma_stop: float, steps: int
) -> tuple[tuple[str, ...], list[tuple]]:
    """Sample every branch's X component over a strength-ratio range.

    Returns a column header and one row per sampled Gamma with each
    branch's X value (nan where the branch formula has no real value) and
    a 0/1 existence flag. The grid must avoid the Gamma = 1 branch pole.
    """
    if theta == 0.0 or not math.isfinite(theta):
        raise ValueError("Theta must be nonzero and finite")
    if not (0.0 < gamma_start < gamma_stop) or not math.isfinite(gamma_stop):
        raise ValueError("need 0 < gamma_start < gamma_stop, both finite")
    if steps < 2:
        raise ValueError("steps must be at least 2")
    gammas = np.linspace(gamma_start, gamma_stop, steps)
    if np.any(np.abs(gammas - 1.0) < 1e-12):
        raise ValueError("the grid hits the Gamma = 1 branch pole; shift it")

    minus_label = "E_Gamma" if theta > 0.0 else "E_1"
    columns = (
        "Gamma",
        "E_tri_X", "E_tri_exists",
        "E_-1_X", "E_-1_exists",
        f"{minus_label}_X", f"{minus_label}_exists",
        "S_1Gamma_X", "S_1Gamma_exists",
        "S_-1Gamma_X", "S_-1Gamma_exists",
    )
    rows = []
    for g in map(float, gammas):
        x_tri = g * theta * (g - 1.0) / (g + 1.0)
        disc = 4.0 * g * g - 3.0
        if disc >= -_DISC_TOL:
            root = math.sqrt(max(disc, 0.0))
            x_plus = 4.0 * g * theta * (g * g - 1.0) / (1.0 - 2.0 * g * g - root)
            x_minus = g * theta * (1.0 - 2.0 * g * g - root) / (g * g - 1.0)
        else:
            x_plus = x_minus = math.nan
        if theta > 0.0:
            minus_exists = int(disc >= -_DISC_TOL and g < 1.0)
        else:
            minus_exists = int(g > 1.0)
        rows.append(
            (
                g,
                x_tri, int(theta < 0.0),
                x_plus, int(theta > 0.0 and disc >= -_DISC_TOL),
                x_minus, minus_exists,
                0.0, int(theta < 0.0),
                2.0 * g * theta / (g * g - 1.0), int(theta * (g - 1.0) > 0.0),
            )
        )
    return columns, rows
