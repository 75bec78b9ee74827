"""Two-stage reduction of three-vortex motion to a shape point.

Stage one trades lab positions for weighted relative vectors: the separation
of the first pair, the offset of the third vortex from that pair's center of
vorticity, and the overall center of vorticity, each carrying a virtual
strength.  Stage two scales the two relative vectors by the square roots of
their strengths and forms quadratic combinations (X, Y, Z): three real
functions invariant under simultaneous rotation, which is exactly the
symmetry left over.  The shape point lives on the sphere
Theta^2 = X^2 + Y^2 + Z^2 when the third strength weight is positive and on
the upper hyperboloid sheet Theta^2 = Z^2 - X^2 - Y^2 (Z >= 0) when it is
negative.  Y = 0 picks out collinear configurations in both geometries.

Reduced Hamiltonians here are sums of weighted logarithms of functions
linear in (X, Z, Theta), so values, gradients and Hessians are evaluated
from one table of coefficients.  Specialized selectors reproduce printed
normalizations that drop additive constants; each selector records its
offset from the lab energy so energy thresholds stay comparable.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import FloatArray, as_circulations, as_positions
from .errors import (
    DegenerateCirculationSum,
    DegenerateDenominator,
    SingularState,
)
from .integrate import IntegratorOptions, Trajectory, integrate

SPHERE = "sphere"
HYPERBOLOID = "hyperboloid"

SELECTORS = (
    "general-positive",
    "general-negative",
    "specialized-111",
    "specialized-11m1",
    "specialized-gamma",
)


@dataclass(frozen=True, slots=True)
class JacobiFrame:
    """Relative coordinates with their virtual strengths."""

    R1: tuple[float, float]
    R2: tuple[float, float]
    R3: tuple[float, float]
    kappa1: float
    kappa2: float
    kappa3: float


def _kappas(g: FloatArray) -> tuple[float, float, float]:
    g12 = g[0] + g[1]
    g123 = g12 + g[2]
    if abs(g12) < 1e-14:
        raise DegenerateCirculationSum(
            f"first-pair strength sum is zero: {g[0]} + {g[1]}"
        )
    if abs(g123) < 1e-14:
        raise DegenerateCirculationSum(f"total strength is zero: {tuple(g)}")
    return float(g[0] * g[1] / g12), float(g12 * g[2] / g123), float(g123)


def to_jacobi(
    positions: FloatArray | Sequence[Sequence[float]],
    circulations: FloatArray | Sequence[float],
) -> JacobiFrame:
    """Relative-vector frame of a three-vortex state."""
    x = as_positions(positions)
    g = as_circulations(circulations, 3)
    if x.shape[0] != 3:
        raise ValueError(f"expected three vortices, got {x.shape[0]}")
    k1, k2, k3 = _kappas(g)
    g12 = g[0] + g[1]
    r1, r2, r3 = x
    pair_cm = (g[0] * r1 + g[1] * r2) / g12
    R1 = r1 - r2
    R2 = pair_cm - r3
    R3 = (g[0] * r1 + g[1] * r2 + g[2] * r3) / k3
    return JacobiFrame(
        R1=(float(R1[0]), float(R1[1])),
        R2=(float(R2[0]), float(R2[1])),
        R3=(float(R3[0]), float(R3[1])),
        kappa1=k1,
        kappa2=k2,
        kappa3=k3,
    )


def frame_from_vectors(
    R1: Sequence[float],
    R2: Sequence[float],
    circulations: FloatArray | Sequence[float],
    R3: Sequence[float] = (0.0, 0.0),
) -> JacobiFrame:
    """Build a frame from relative vectors; the center defaults to origin."""
    g = as_circulations(circulations, 3)
    k1, k2, k3 = _kappas(g)
    return JacobiFrame(
        R1=(float(R1[0]), float(R1[1])),
        R2=(float(R2[0]), float(R2[1])),
        R3=(float(R3[0]), float(R3[1])),
        kappa1=k1,
        kappa2=k2,
        kappa3=k3,
    )


def from_jacobi(
    frame: JacobiFrame, circulations: FloatArray | Sequence[float]
) -> FloatArray:
    """Invert the frame back to lab positions."""
    g = as_circulations(circulations, 3)
    k1, k2, k3 = _kappas(g)
    for got, want, name in (
        (frame.kappa1, k1, "kappa1"),
        (frame.kappa2, k2, "kappa2"),
        (frame.kappa3, k3, "kappa3"),
    ):
        if abs(got - want) > 1e-10 * max(1.0, abs(want)):
            raise ValueError(
                f"frame {name}={got} inconsistent with circulations (expect {want})"
            )
    g12 = g[0] + g[1]
    R1 = np.asarray(frame.R1)
    R2 = np.asarray(frame.R2)
    R3 = np.asarray(frame.R3)
    pair_cm = R3 + (g[2] / k3) * R2
    r3 = R3 - (g12 / k3) * R2
    r1 = pair_cm + (g[1] / g12) * R1
    r2 = pair_cm - (g[0] / g12) * R1
    return np.stack([r1, r2, r3])


@dataclass(frozen=True, slots=True)
class NambuState:
    """Shape point with its leaf label Theta and geometry tag."""

    X: float
    Y: float
    Z: float
    Theta: float
    geometry: str

    def __post_init__(self) -> None:
        if self.geometry not in (SPHERE, HYPERBOLOID):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        res = self.casimir_residual()
        scale = max(1.0, self.Theta**2, self.X**2 + self.Y**2 + self.Z**2)
        # loose guard against mislabeled geometry; tight drift checks live
        # in the test suites where the provenance of the point is known
        if abs(res) > 1e-7 * scale:
            raise ValueError(
                f"point violates the {self.geometry} identity by {res:.3e}"
            )
        if self.geometry == HYPERBOLOID and self.Z < -1e-12 * scale:
            raise ValueError(f"hyperboloid sheet requires Z >= 0, got Z={self.Z}")

    def casimir_residual(self) -> float:
        """Defect of the quadratic identity tying the point to its leaf."""
        if self.geometry == SPHERE:
            return self.Theta**2 - (self.X**2 + self.Y**2 + self.Z**2)
        return self.Theta**2 - (self.Z**2 - self.X**2 - self.Y**2)


def to_nambu(frame: JacobiFrame) -> NambuState:
    """Quadratic shape map of the scaled relative pair.

    The first scaled vector is sqrt(kappa1) R1, the second sqrt(|kappa2|) R2;
    X + iY is twice the first times the conjugate of the second, which is
    what makes the triple rotation-invariant.
    """
    if frame.kappa1 <= 0.0:
        raise ValueError(
            f"kappa1 must be positive (got {frame.kappa1}); relabel so the "
            "first two strengths share a sign"
        )
    if frame.kappa2 == 0.0:
        raise DegenerateCirculationSum("kappa2 is zero (third strength vanishes)")
    m1 = math.sqrt(frame.kappa1) * complex(*frame.R1)
    m2 = math.sqrt(abs(frame.kappa2)) * complex(*frame.R2)
    w = 2.0 * m1 * m2.conjugate()
    n1 = abs(m1) ** 2
    n2 = abs(m2) ** 2
    if frame.kappa2 > 0.0:
        return NambuState(
            X=w.real, Y=w.imag, Z=n1 - n2, Theta=n1 + n2, geometry=SPHERE
        )
    return NambuState(
        X=w.real, Y=w.imag, Z=n1 + n2, Theta=n1 - n2, geometry=HYPERBOLOID
    )


def nambu_to_frame(
    s: NambuState, circulations: FloatArray | Sequence[float], phase: float = 0.0
) -> JacobiFrame:
    """One representative frame over a shape point.

    The fiber is a circle; ``phase`` picks the direction of the first
    relative vector.  Inverse of ``to_nambu`` up to that rotation.
    """
    g = as_circulations(circulations, 3)
    k1, k2, _ = _kappas(g)
    if k1 <= 0.0 or k2 == 0.0:
        raise ValueError("shape fiber needs kappa1 > 0 and kappa2 != 0")
    n1 = 0.5 * (s.Z + s.Theta)  # |m1|^2 in both geometries
    if n1 < 0.0:
        raise ValueError(f"no preimage: |m1|^2 = {n1} < 0")
    m1 = math.sqrt(n1) * cmath.exp(1j * phase)
    w = complex(s.X, s.Y)
    if n1 == 0.0:
        if abs(w) > 1e-14:
            raise ValueError("X + iY must vanish when the first pair coincides")
        n2 = 0.5 * (s.Theta - s.Z) if k2 > 0.0 else 0.5 * (s.Z - s.Theta)
        m2 = math.sqrt(max(n2, 0.0)) + 0.0j
    else:
        m2 = (w / (2.0 * m1)).conjugate()
    R1 = m1 / math.sqrt(k1)
    R2 = m2 / math.sqrt(abs(k2))
    return frame_from_vectors((R1.real, R1.imag), (R2.real, R2.imag), g)


@dataclass(frozen=True, slots=True)
class _LogTerm:
    """One c * log(a X + b Z + g Theta) contribution."""

    c: float
    a: float
    b: float
    g: float
    pair: tuple[int, int]

    def arg(self, X: float, Z: float, Theta: float) -> float:
        return self.a * X + self.b * Z + self.g * Theta


def _relabel(circulations: FloatArray) -> tuple[tuple[int, ...], bool, tuple[float, ...]]:
    g = [float(v) for v in circulations]
    if any(v == 0.0 for v in g):
        raise DegenerateCirculationSum("zero circulations are outside the reduction")
    reversed_time = sum(1 for v in g if v < 0.0) >= 2
    if reversed_time:
        g = [-v for v in g]
    pos = [i for i, v in enumerate(g) if v > 0.0]
    neg = [i for i, v in enumerate(g) if v < 0.0]
    perm = tuple(pos + neg)
    return perm, reversed_time, tuple(g[i] for i in perm)


@dataclass(frozen=True, slots=True)
class ReducedSystemSpec:
    """Frozen description of one reduced system.

    ``circulations`` are the relabeled strengths (first two positive, in
    their original relative order).  ``offset`` is the additive constant by
    which this selector's Hamiltonian exceeds the lab energy, so
    printed-normalization values stay comparable across selectors.
    """

    circulations: tuple[float, float, float]
    kappa1: float
    kappa2: float
    kappa3: float
    coupling: float
    selector: str
    offset: float
    terms: tuple[_LogTerm, ...]
    permutation: tuple[int, ...]
    time_reversed: bool

    @property
    def geometry(self) -> str:
        return SPHERE if self.kappa2 > 0.0 else HYPERBOLOID

    @classmethod
    def for_circulations(
        cls,
        circulations: FloatArray | Sequence[float],
        selector: str | None = None,
    ) -> "ReducedSystemSpec":
        """Relabel, classify and tabulate the Hamiltonian terms.

        The selector is detected from the relabeled strengths unless forced;
        forcing is only allowed onto a selector whose family matches.
        """
        g_in = as_circulations(circulations, 3)
        perm, rev, g = _relabel(g_in)
        k1, k2, k3 = _kappas(np.asarray(g))
        coupling = math.sqrt(k1 / abs(k2))

        def close(u: float, v: float) -> bool:
            return abs(u - v) <= 1e-12 * max(1.0, abs(v))

        detected = "general-positive" if k2 > 0.0 else "general-negative"
        if close(g[0], 1.0) and close(g[1], 1.0) and close(g[2], 1.0):
            detected = "specialized-111"
        elif close(g[0], 1.0) and close(g[2], -1.0) and g[1] > 0.0:
            detected = "specialized-11m1" if close(g[1], 1.0) else "specialized-gamma"
        if selector is None:
            selector = detected
        elif selector not in SELECTORS:
            raise ValueError(f"unknown selector {selector!r}")
        elif selector.startswith("specialized") and selector != detected:
            raise ValueError(
                f"selector {selector!r} does not fit circulations {g} "
                f"(detected {detected!r})"
            )

        offset = 0.0
        if selector == "specialized-11m1":
            terms = (
                _LogTerm(-0.5, 0.0, 1.0, 1.0, (0, 1)),
                _LogTerm(+0.5, -1.0, 1.0, 0.0, (1, 2)),
                _LogTerm(+0.5, +1.0, 1.0, 0.0, (0, 2)),
            )
            offset = math.log(2.0)
        elif selector == "specialized-gamma":
            G = g[1]
            terms = (
                _LogTerm(G / 2.0, -2.0 * G, G * G + 1.0, 1.0 - G * G, (1, 2)),
                _LogTerm(-G / 2.0, 0.0, 1.0, 1.0, (0, 1)),
                _LogTerm(+0.5, 1.0, 1.0, 0.0, (0, 2)),
            )
            offset = (
                G * math.log(1.0 + G)
                - 0.5 * math.log(G)
                + 0.5 * math.log(1.0 + G)
            )
        else:
            # exact lab-energy terms; the (1,1,1) printed form is already exact
            mu = coupling
            terms = (
                _LogTerm(
                    -g[0] * g[1] / 2.0, 0.0, 1.0 / (2 * k1), 1.0 / (2 * k1), (0, 1)
                ),
                _LogTerm(
                    -g[1] * g[2] / 2.0,
                    -mu / g[1],
                    -1.0 / (2 * k2) + k1 / (2 * g[1] ** 2),
                    +1.0 / (2 * k2) + k1 / (2 * g[1] ** 2),
                    (1, 2),
                ),
                _LogTerm(
                    -g[0] * g[2] / 2.0,
                    +mu / g[0],
                    -1.0 / (2 * k2) + k1 / (2 * g[0] ** 2),
                    +1.0 / (2 * k2) + k1 / (2 * g[0] ** 2),
                    (0, 2),
                ),
            )
        return cls(
            circulations=g,
            kappa1=k1,
            kappa2=k2,
            kappa3=k3,
            coupling=coupling,
            selector=selector,
            offset=offset,
            terms=terms,
            permutation=perm,
            time_reversed=rev,
        )


def _term_args(
    spec: ReducedSystemSpec, X: float, Z: float, Theta: float
) -> list[float]:
    args = []
    for t in spec.terms:
        A = t.arg(X, Z, Theta)
        if A <= 0.0:
            raise SingularState(t.pair, A)
        args.append(A)
    return args


def reduced_hamiltonian(spec: ReducedSystemSpec, s: NambuState) -> float:
    """Energy of a shape point in the selector's normalization."""
    args = _term_args(spec, s.X, s.Z, s.Theta)
    return sum(t.c * math.log(A) for t, A in zip(spec.terms, args))


def reduced_gradients(
    spec: ReducedSystemSpec, X: float, Z: float, Theta: float
) -> tuple[float, float, float, float, float]:
    """(H_X, H_Z, H_XX, H_XZ, H_ZZ) of the selected Hamiltonian.

    The Y-derivative is identically zero for every selector, which is what
    collapses the evolution to the template used in ``nambu_rhs``.
    """
    args = _term_args(spec, X, Z, Theta)
    hx = hz = hxx = hxz = hzz = 0.0
    for t, A in zip(spec.terms, args):
        w = t.c / A
        hx += w * t.a
        hz += w * t.b
        w2 = t.c / (A * A)
        hxx -= w2 * t.a * t.a
        hxz -= w2 * t.a * t.b
        hzz -= w2 * t.b * t.b
    return hx, hz, hxx, hxz, hzz


def _rhs_from_gradients(
    geometry: str, X: float, Y: float, Z: float, hx: float, hz: float
) -> tuple[float, float, float]:
    if geometry == SPHERE:
        return (4 * Y * hz, 4 * Z * hx - 4 * X * hz, -4 * Y * hx)
    return (4 * Y * hz, -4 * Z * hx - 4 * X * hz, -4 * Y * hx)


def nambu_rhs(spec: ReducedSystemSpec, s: NambuState) -> tuple[float, float, float]:
    """Shape-point velocity (dX/dt, dY/dt, dZ/dt)."""
    hx, hz, *_ = reduced_gradients(spec, s.X, s.Z, s.Theta)
    return _rhs_from_gradients(spec.geometry, s.X, s.Y, s.Z, hx, hz)


def reduced_rhs_flat(spec: ReducedSystemSpec, theta: float):
    """Flat-vector adapter for the integrator on a fixed leaf."""
    geometry = spec.geometry

    def f(t: float, y: FloatArray) -> FloatArray:
        hx, hz, *_ = reduced_gradients(spec, float(y[0]), float(y[2]), theta)
        return np.array(
            _rhs_from_gradients(geometry, float(y[0]), float(y[1]), float(y[2]), hx, hz)
        )

    return f


def alpha_rate(s: NambuState) -> float:
    """Turning rate of the lone vortex's velocity heading.

    Valid for the (1, 1, -1) family.  Vanishes identically on the Theta = 0
    leaf and at collinear instants.
    """
    if s.Theta == 0.0:
        return 0.0
    den = (s.X**2 + s.Y**2) * (s.Theta**2 + s.Y**2)
    if den == 0.0:
        raise DegenerateDenominator(
            f"heading rate undefined at X={s.X}, Y={s.Y}, Theta={s.Theta}"
        )
    return -4.0 * s.Theta * s.Y**2 / den


def theta2_rate(s: NambuState) -> float:
    """Phase rate of the lone vortex's position vector, shifted by pi/2.

    Valid for the (1, 1, -1) family.
    """
    den = (s.X**2 + s.Y**2) * (s.Theta**2 + s.Y**2)
    if den == 0.0:
        raise DegenerateDenominator(
            f"phase rate undefined at X={s.X}, Y={s.Y}, Theta={s.Theta}"
        )
    root = math.sqrt(s.Theta**2 + s.X**2 + s.Y**2)
    return (2.0 * s.Y**2 * root - 2.0 * s.Theta * s.X**2) / den


@dataclass(slots=True)
class ReducedPath:
    """Shape-space image of a lab trajectory."""

    ts: FloatArray
    points: FloatArray  # (n, 3) columns X, Y, Z
    theta: FloatArray
    geometry: str
    spec: ReducedSystemSpec

    def state(self, i: int) -> NambuState:
        x, y, z = self.points[i]
        return NambuState(
            X=float(x), Y=float(y), Z=float(z),
            Theta=float(self.theta[i]), geometry=self.geometry,
        )


def reduce_state(
    positions: FloatArray | Sequence[Sequence[float]],
    circulations: FloatArray | Sequence[float],
    spec: ReducedSystemSpec | None = None,
) -> tuple[ReducedSystemSpec, NambuState]:
    """Relabel, frame and map one lab state to its shape point."""
    if spec is None:
        spec = ReducedSystemSpec.for_circulations(circulations)
    x = as_positions(positions)
    xp = x[list(spec.permutation)]
    fr = to_jacobi(xp, spec.circulations)
    return spec, to_nambu(fr)


def map_trajectory(
    traj: Trajectory,
    circulations: FloatArray | Sequence[float],
    spec: ReducedSystemSpec | None = None,
) -> ReducedPath:
    """Map every sample of a three-vortex trajectory to shape space."""
    if spec is None:
        spec = ReducedSystemSpec.for_circulations(circulations)
    n = traj.ys.shape[0]
    pts = np.empty((n, 3))
    th = np.empty(n)
    for i in range(n):
        _, s = reduce_state(traj.ys[i].reshape(3, 2), circulations, spec=spec)
        pts[i] = (s.X, s.Y, s.Z)
        th[i] = s.Theta
    return ReducedPath(
        ts=traj.ts.copy(), points=pts, theta=th, geometry=spec.geometry, spec=spec
    )


def integrate_reduced(
    spec: ReducedSystemSpec,
    s0: NambuState,
    opts: IntegratorOptions,
) -> Trajectory:
    """Integrate the shape-point dynamics on the leaf of ``s0``."""
    f = reduced_rhs_flat(spec, s0.Theta)
    return integrate(f, np.array([s0.X, s0.Y, s0.Z]), opts)
