"""Spatial grid, field state, physics parameters, and run configuration.

The model is the coupled Schrodinger / Klein-Gordon system on an interval
[a, b] with homogeneous Dirichlet boundaries and additive space-time noise:

    i dphi + (phi_xx + u phi) dt = C1 dW,
    du_t - (u_xx - u + |phi|^2) dt = C2 dWt,

with phi = P + iQ and V = u_t / 2.  All field arrays live on the M - 1
interior nodes of a uniform grid; boundary values are identically zero and
never stored.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError

__all__ = [
    "Grid1D",
    "FieldState",
    "PhysicsParams",
    "Scheme",
    "NoiseCouplingMode",
    "SchemeConfig",
    "InitialKind",
    "InitialData",
    "make_grid",
    "eval_initial",
    "default_noise_profile",
]

# Relative slack for "T is an integer number of steps" checks.
_DIVISIBILITY_RTOL = 1e-9


class Scheme(enum.Enum):
    """Fully discrete one-step methods implemented by this package."""

    CFD_I = "CFD_I"
    CFD_II = "CFD_II"
    SPS_I = "SPS_I"
    SPS_II = "SPS_II"
    FEM_I = "FEM_I"
    FEM_II = "FEM_II"
    FD_SRK = "FD_SRK"
    MSFD = "MSFD"


class NoiseCouplingMode(enum.Enum):
    """How the noise increments enter a CFD/SPS/FEM step.

    SPLITTING_FORM applies the increments as an exact stochastic kick and
    then a deterministic substep that conserves the discrete invariants.
    COMPENSATED_FORM writes the same update in closed form with the
    quadratic noise compensation folded into the wave source; the two differ
    pathwise only in a V-row term that is quadratic in the increments and
    agree in expectation.
    """

    COMPENSATED_FORM = "COMPENSATED_FORM"
    SPLITTING_FORM = "SPLITTING_FORM"


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [a, b] with M cells; fields live on interior nodes."""

    a: float
    b: float
    M: int
    h: float
    x: np.ndarray  # interior nodes, shape (M - 1,)

    @property
    def n_interior(self) -> int:
        return self.M - 1


def make_grid(a: float, b: float, M: int) -> Grid1D:
    """Build the uniform grid with spacing h = (b - a) / M.

    M >= 2 is required so at least one interior node exists.
    """
    if not b > a:
        raise UsageError(f"domain must satisfy b > a, got [{a}, {b}]")
    if M < 2:
        raise UsageError(f"M >= 2 required for an interior node, got M={M}")
    h = (b - a) / M
    x = a + h * np.arange(1, M)
    return Grid1D(a=float(a), b=float(b), M=int(M), h=float(h), x=x)


@dataclass
class FieldState:
    """Real fields on the interior nodes at one time level.

    P, Q are the real and imaginary parts of phi; U approximates u and
    V approximates u_t / 2.
    """

    P: np.ndarray
    Q: np.ndarray
    U: np.ndarray
    V: np.ndarray
    t: float = 0.0

    def copy(self) -> "FieldState":
        return FieldState(
            P=self.P.copy(), Q=self.Q.copy(), U=self.U.copy(), V=self.V.copy(), t=self.t
        )


@dataclass(frozen=True, eq=False)
class PhysicsParams:
    """Noise amplitudes and spatial noise profiles on the interior nodes."""

    C1: float
    C2: float
    eta1: np.ndarray
    eta2: np.ndarray

    @classmethod
    def with_default_profiles(
        cls, grid: Grid1D, C1: float = 1.0, C2: float = 1.0
    ) -> "PhysicsParams":
        eta = default_noise_profile(grid)
        return cls(C1=float(C1), C2=float(C2), eta1=eta, eta2=eta.copy())


def default_noise_profile(grid: Grid1D) -> np.ndarray:
    """One half-sine arch spanning the domain, zero on the boundary."""
    return np.sin(np.pi * (grid.x - grid.a) / (grid.b - grid.a))


@dataclass(frozen=True)
class SchemeConfig:
    """Time discretization and nonlinear-solver knobs for one run.

    dt must tile [0, T] up to a relative slack of 1e-9; the number of steps
    is round(T / dt).  alpha parameterizes the symplectic Runge-Kutta
    tableau family (length stages - 1; all zeros recovers the Gauss method).
    msp_v_source selects the wave-source used by the *_II (midpoint-type)
    schemes: "conservative" (default) closes the energy balance exactly,
    "literal" keeps only the previous level's |phi|^2 in the V row.
    msfd_mixed_index selects the U factor in the MSFD phi-stage coupling:
    "stage" (default) or "literal" (the updated U^n).
    """

    scheme: Scheme
    dt: float
    T: float
    stages: int = 2
    alpha: tuple[float, ...] = ()
    noise_coupling_mode: NoiseCouplingMode = NoiseCouplingMode.SPLITTING_FORM
    fp_tol: float = 1e-12
    fp_max_iter: int = 200
    msp_v_source: str = "conservative"
    msfd_mixed_index: str = "stage"

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise UsageError(f"dt must be positive, got {self.dt}")
        if self.T <= 0.0 or self.dt > self.T:
            raise UsageError(f"need 0 < dt <= T, got dt={self.dt}, T={self.T}")
        n = round(self.T / self.dt)
        if n < 1 or abs(n * self.dt - self.T) > _DIVISIBILITY_RTOL * max(self.T, 1.0):
            raise UsageError(
                f"T={self.T} is not an integer multiple of dt={self.dt}"
            )
        if self.stages < 1:
            raise UsageError(f"stages >= 1 required, got {self.stages}")
        if self.alpha and len(self.alpha) != self.stages - 1:
            raise UsageError(
                f"alpha must have length stages-1={self.stages - 1}, "
                f"got {len(self.alpha)}"
            )
        if self.fp_tol <= 0.0 or self.fp_max_iter < 1:
            raise UsageError("fp_tol must be positive and fp_max_iter >= 1")
        if self.msp_v_source not in ("conservative", "literal"):
            raise UsageError(f"unknown msp_v_source {self.msp_v_source!r}")
        if self.msfd_mixed_index not in ("stage", "literal"):
            raise UsageError(f"unknown msfd_mixed_index {self.msfd_mixed_index!r}")

    @property
    def n_steps(self) -> int:
        return round(self.T / self.dt)

    @property
    def alpha_vector(self) -> np.ndarray:
        if self.alpha:
            return np.asarray(self.alpha, dtype=float)
        return np.zeros(self.stages - 1)


class InitialKind(enum.Enum):
    SOLITON = "SOLITON"
    ZERO_WITH_UNIT_VELOCITY = "ZERO_WITH_UNIT_VELOCITY"
    CUSTOM = "CUSTOM"


@dataclass(frozen=True, eq=False)
class InitialData:
    """Initial condition description; use the class methods to build one."""

    kind: InitialKind
    theta: float = 0.0
    P0: np.ndarray | None = None
    Q0: np.ndarray | None = None
    U0: np.ndarray | None = None
    V0: np.ndarray | None = None

    @classmethod
    def soliton(cls, theta: float) -> "InitialData":
        """Bright-soliton data with phase velocity theta in (-1, 1)."""
        if not -1.0 < theta < 1.0:
            raise UsageError(f"soliton requires theta in (-1, 1), got {theta}")
        return cls(kind=InitialKind.SOLITON, theta=float(theta))

    @classmethod
    def zero_with_unit_velocity(cls) -> "InitialData":
        """phi = 0, u = 0, u_t = 1 (so V = 1/2) everywhere."""
        return cls(kind=InitialKind.ZERO_WITH_UNIT_VELOCITY)

    @classmethod
    def custom(
        cls, P0: np.ndarray, Q0: np.ndarray, U0: np.ndarray, V0: np.ndarray
    ) -> "InitialData":
        return cls(
            kind=InitialKind.CUSTOM,
            P0=np.asarray(P0, dtype=float),
            Q0=np.asarray(Q0, dtype=float),
            U0=np.asarray(U0, dtype=float),
            V0=np.asarray(V0, dtype=float),
        )


def eval_initial(data: InitialData, grid: Grid1D) -> FieldState:
    """Evaluate initial data on the interior nodes at t = 0.

    The soliton family (theta the phase velocity):

        phi(x, 0) = 3 sqrt(2) / (4 sqrt(1 - theta^2))
                    * sech^2(x / (2 sqrt(1 - theta^2))) * exp(i theta x),
        u(x, 0)   = 3 / (4 (1 - theta^2)) * sech^2(x / (2 sqrt(1 - theta^2))),
        u_t(x, 0) = 3 theta / (4 (1 - theta^2)^{3/2})
                    * sech^2(x / (2 sqrt(1 - theta^2)))
                    * tanh(x / (2 sqrt(1 - theta^2))).
    """
    n = grid.n_interior
    if data.kind is InitialKind.ZERO_WITH_UNIT_VELOCITY:
        zero = np.zeros(n)
        return FieldState(P=zero.copy(), Q=zero.copy(), U=zero.copy(), V=np.full(n, 0.5))
    if data.kind is InitialKind.SOLITON:
        theta = data.theta
        s = np.sqrt(1.0 - theta * theta)
        y = grid.x / (2.0 * s)
        sech2 = 1.0 / np.cosh(y) ** 2
        amp = 3.0 * np.sqrt(2.0) / (4.0 * s) * sech2
        P = amp * np.cos(theta * grid.x)
        Q = amp * np.sin(theta * grid.x)
        U = 3.0 / (4.0 * s * s) * sech2
        ut = 3.0 * theta / (4.0 * s**3) * sech2 * np.tanh(y)
        return FieldState(P=P, Q=Q, U=U, V=0.5 * ut)
    if data.kind is InitialKind.CUSTOM:
        parts = (data.P0, data.Q0, data.U0, data.V0)
        if any(p is None for p in parts):
            raise UsageError("custom initial data requires P0, Q0, U0, V0")
        if any(p.shape != (n,) for p in parts):  # type: ignore[union-attr]
            raise UsageError(
                f"custom initial arrays must have shape ({n},) for this grid"
            )
        return FieldState(
            P=data.P0.copy(), Q=data.Q0.copy(), U=data.U0.copy(), V=data.V0.copy()
        )
    raise UsageError(f"unknown initial kind {data.kind!r}")
