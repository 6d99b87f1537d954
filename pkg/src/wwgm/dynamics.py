"""Time evolution in the Schrödinger, Heisenberg and Liouville pictures,
their classical limits, and the derivation ("tilde") generators.

Equations of motion, in ħ = 2 units with a real generator G:

    wavefunctions   2i dφ/dt = G ⋆ φ
    observables     dα/ds = (k²/2i)(α ⋆ G − G ⋆ α)   (k = 1: quantum)
    densities       dρ/ds = (k²/2i)(G ⋆ ρ − ρ ⋆ G)
    classical       dρ/dt = {G, ρ},   dα/dt = {α, G}

The k-dependent forms use the contracted star and converge to the
Poisson-bracket flows as k → ∞; the wavefunction equation has no such
limit and is deliberately offered only at k = 1.

Integration is a fixed-step classical Runge-Kutta 4 scheme (global error
O(dt⁴)), guarded by dt·‖G‖∞ ≤ 0.5. Separable generators G = K(p) + V(x)
are applied through mixed-space multipliers, K(p + cμ_x) and V(x − cμ_p),
which star-multiply in O(N log N) per axis and are exact for band-limited
states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._poly import PhasePolynomial, poisson_poly, star_poly
from ._spectral import derivative
from .errors import AccuracyError, ValidationError
from .phase_space import PhaseFunction, PhaseGrid, inner
from .star_algebra import HBAR, star

NORM_DRIFT_TOL = 1e-6
TRACE_DRIFT_TOL = 1e-8
MASS_DRIFT_TOL = 1e-8


@dataclass(frozen=True)
class HamiltonianGenerator:
    """Real polynomial generator G(p, x), optionally with a mass parameter."""

    name: str
    poly: PhasePolynomial
    mass: float | None = None

    def __post_init__(self):
        if self.poly.max_imag_coeff() != 0.0:
            raise ValidationError("generator must be real-valued")
        if self.mass is not None and not self.mass > 0:
            raise ValidationError(f"mass {self.mass} must be positive")

    def make(self, grid: PhaseGrid) -> PhaseFunction:
        return PhaseFunction.from_poly(grid, self.poly)

    def split_separable(self) -> tuple[PhasePolynomial, PhasePolynomial] | None:
        """(K(p), V(x)) if every monomial is pure-p or pure-x, else None."""
        n = self.poly.n
        K = PhasePolynomial(n)
        V = PhasePolynomial(n)
        for e, c in self.poly.coeffs.items():
            pure_p = all(e[n + i] == 0 for i in range(n))
            pure_x = all(e[i] == 0 for i in range(n))
            if pure_p:
                K = K + PhasePolynomial(n, {e: c})
            elif pure_x:
                V = V + PhasePolynomial(n, {e: c})
            else:
                return None
        return K, V


def harmonic_generator(n: int = 1) -> HamiltonianGenerator:
    """G = Σᵢ pᵢ² + xᵢ²; rotates coherent labels with angular frequency 2."""
    poly = PhasePolynomial(n)
    for i in range(n):
        poly = poly + PhasePolynomial.p_var(n, i) * PhasePolynomial.p_var(n, i)
        poly = poly + PhasePolynomial.x_var(n, i) * PhasePolynomial.x_var(n, i)
    return HamiltonianGenerator("harmonic", poly)


def free_generator(mass: float = 1.0, n: int = 1) -> HamiltonianGenerator:
    """G = Σᵢ pᵢ²/(2m); its contracted derivation generator is the
    classical free-particle advection, which fixes this form."""
    if not mass > 0:
        raise ValidationError("mass must be positive")
    poly = PhasePolynomial(n)
    for i in range(n):
        poly = poly + PhasePolynomial.p_var(n, i) * PhasePolynomial.p_var(n, i) * (0.5 / mass)
    return HamiltonianGenerator("free", poly, mass=mass)


@dataclass(frozen=True)
class EvolutionConfig:
    """Fixed-step RK4 run: `steps` steps of size `dt`."""

    dt: float
    steps: int
    integrator: str = "rk4"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError("dt must be positive")
        if self.steps < 1:
            raise ValidationError("steps must be >= 1")
        if self.integrator != "rk4":
            raise ValidationError("only the fixed fourth-order one-step scheme is offered")


@dataclass
class Trajectory:
    """Snapshots and scalar diagnostics recorded along an evolution."""

    picture: str
    times: list[float] = field(default_factory=list)
    states: list[PhaseFunction] = field(default_factory=list)
    norms: list[float] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    peaks_p: list[np.ndarray] = field(default_factory=list)
    peaks_x: list[np.ndarray] = field(default_factory=list)

    @property
    def final(self) -> PhaseFunction:
        return self.states[-1]

    def record(self, t, state, norm_val, energy):
        pk_p, pk_x = state.peak()
        self.times.append(float(t))
        self.states.append(state)
        self.norms.append(float(norm_val))
        self.energies.append(float(energy))
        self.peaks_p.append(pk_p)
        self.peaks_x.append(pk_x)


def export_trajectory_csv(traj: Trajectory, path) -> None:
    """One row per saved step: (t, norm, energy, peak_p…, peak_x…)."""
    n = traj.states[0].grid.n
    if n == 1:
        header = "t,norm,energy,peak_p,peak_x"
    else:
        header = "t,norm,energy," + ",".join(
            [f"peak_p{i + 1}" for i in range(n)] + [f"peak_x{i + 1}" for i in range(n)])
    lines = [header]
    for i in range(len(traj.times)):
        row = [traj.times[i], traj.norms[i], traj.energies[i],
               *traj.peaks_p[i], *traj.peaks_x[i]]
        lines.append(",".join("%.17g" % v for v in row))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# star-multiplication operators used by the steppers
# ---------------------------------------------------------------------------

class _LeftStar:
    """v ↦ G ⋆ v for a polynomial generator, at contraction parameter k.

    Separable generators go through precomputed mixed-space multipliers;
    anything else falls back to the generic star product. The multipliers
    are zeroed beyond two thirds of the Nyquist frequency: resolved states
    carry no content there, while the coordinate-plus-frequency corners
    would otherwise dominate the operator's spectral radius with modes
    that only ever hold roundoff noise.
    """

    DEALIAS_FRACTION = 2.0 / 3.0

    def __init__(self, G: HamiltonianGenerator, grid: PhaseGrid, k: float = 1.0):
        self.grid = grid
        self.c = 1.0 / k ** 2
        self.G_field = G.make(grid)
        split = G.split_separable()
        self._KM = self._VM = None
        cut = self.DEALIAS_FRACTION * float(np.max(np.abs(grid.freqs)))
        if split is not None:
            K, V = split
            n = grid.n
            if not K.is_zero:
                args = list(grid.fields)
                mask = np.ones((), dtype=float)
                for i in range(n):
                    shp = [1] * (2 * n)
                    shp[n + i] = grid.N
                    freqs = grid.freqs.reshape(shp)
                    args[i] = grid.p_field(i) + self.c * freqs
                    mask = mask * (np.abs(freqs) <= cut)
                self._KM = K.evaluate(args) * mask
            if not V.is_zero:
                args = list(grid.fields)
                mask = np.ones((), dtype=float)
                for i in range(n):
                    shp = [1] * (2 * n)
                    shp[i] = grid.N
                    freqs = grid.freqs.reshape(shp)
                    args[n + i] = grid.x_field(i) - self.c * freqs
                    mask = mask * (np.abs(freqs) <= cut)
                self._VM = V.evaluate(args) * mask
            self._separable = True
        else:
            self._separable = False

    @property
    def spectral_rate(self) -> float:
        """Largest oscillation rate the stepped operator can exhibit."""
        rate = 0.0
        if self._KM is not None:
            rate += float(np.max(np.abs(self._KM)))
        if self._VM is not None:
            rate += float(np.max(np.abs(self._VM)))
        if not self._separable:
            rate = float(np.max(np.abs(self.G_field.values)))
        return rate / HBAR

    def __call__(self, values: np.ndarray) -> np.ndarray:
        if not self._separable:
            f = PhaseFunction(self.grid, values, _checked=True)
            return star(self.G_field, f, k=self.c ** -0.5).values
        g = self.grid
        out = np.zeros(g.shape, dtype=np.complex128)
        if self._KM is not None:
            spec = np.fft.fftn(values, axes=g.x_axes())
            out += np.fft.ifftn(self._KM * spec, axes=g.x_axes())
        if self._VM is not None:
            spec = np.fft.fftn(values, axes=g.p_axes())
            out += np.fft.ifftn(self._VM * spec, axes=g.p_axes())
        return out

    def commutator(self, values: np.ndarray) -> np.ndarray:
        """[G, v]_⋆ = G ⋆ v − v ⋆ G; uses v ⋆ G = conj(G ⋆ v̄) for real G."""
        return self(values) - np.conj(self(np.conj(values)))


class _PoissonFlow:
    """v ↦ {G, v} with the generator's derivatives evaluated analytically."""

    def __init__(self, G: HamiltonianGenerator, grid: PhaseGrid):
        self.grid = grid
        self.dGdx = [G.poly.diff_x(i).evaluate(grid.fields) for i in range(grid.n)]
        self.dGdp = [G.poly.diff_p(i).evaluate(grid.fields) for i in range(grid.n)]

    def __call__(self, values: np.ndarray) -> np.ndarray:
        g = self.grid
        out = np.zeros(g.shape, dtype=np.complex128)
        for i in range(g.n):
            out += self.dGdx[i] * derivative(values, g.freqs, axis=i)
            out -= self.dGdp[i] * derivative(values, g.freqs, axis=g.n + i)
        return out

    @property
    def spectral_rate(self) -> float:
        kmax = float(np.max(np.abs(self.grid.freqs)))
        rate = 0.0
        for i in range(self.grid.n):
            rate += float(np.max(np.abs(self.dGdx[i]))) * kmax
            rate += float(np.max(np.abs(self.dGdp[i]))) * kmax
        return rate


#: imaginary-axis stability limit of the RK4 scheme is 2*sqrt(2); stay inside
_RK4_RATE_LIMIT = 2.5


def _stability_guard(G: HamiltonianGenerator, grid: PhaseGrid, cfg: EvolutionConfig) -> None:
    sup = float(np.max(np.abs(G.make(grid).values)))
    if cfg.dt * sup > 0.5:
        raise ValidationError(
            f"stability guard failed: dt*||G||_inf = {cfg.dt * sup:.3g} > 0.5")


def _rate_guard(rate: float, cfg: EvolutionConfig) -> None:
    if cfg.dt * rate > _RK4_RATE_LIMIT:
        raise ValidationError(
            f"step size unstable on this grid: dt*rate = {cfg.dt * rate:.3g} "
            f"exceeds the RK4 limit {_RK4_RATE_LIMIT}")


def _rk4_step(y, rhs, dt):
    k1 = rhs(y)
    k2 = rhs(y + (0.5 * dt) * k1)
    k3 = rhs(y + (0.5 * dt) * k2)
    k4 = rhs(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _run_grid_evolution(y0, rhs, cfg, save_every, record, conserve):
    """March RK4 on a raw array, recording snapshots and policing the
    conserved scalar (name, value0, tolerance) from `conserve`."""
    name, ref, tol, measure = conserve
    record(0, y0)
    y = y0
    for step in range(1, cfg.steps + 1):
        y = _rk4_step(y, rhs, cfg.dt)
        drift = abs(measure(y) - ref)
        if drift > tol:
            raise AccuracyError(
                f"{name} drifted by {drift:.3e} (tolerance {tol:.0e}) at step {step}",
                step=step, drift=drift)
        if (save_every and step % save_every == 0) or step == cfg.steps:
            record(step, y)
    return y


# ---------------------------------------------------------------------------
# quantum pictures
# ---------------------------------------------------------------------------

def schrodinger_evolve(phi: PhaseFunction, G: HamiltonianGenerator,
                       cfg: EvolutionConfig, save_every: int = 0) -> Trajectory:
    """Integrate 2i dφ/dt = G ⋆ φ. Unitary up to integrator error; the run
    aborts if the norm drifts by more than 1e-6."""
    grid = phi.grid
    nrm0 = inner(phi, phi).real
    if abs(nrm0 - 1.0) > 1e-6:
        raise ValidationError(f"state not normalized: <phi|phi> = {nrm0:.8g}")
    _stability_guard(G, grid, cfg)
    lstar = _LeftStar(G, grid, 1.0)
    _rate_guard(lstar.spectral_rate, cfg)
    factor = 1.0 / 2j
    measure = lambda v: float(np.sum(np.abs(v) ** 2)) * grid.weight / np.pi ** grid.n

    traj = Trajectory("schrodinger")

    def record(step, v):
        f = PhaseFunction(grid, v, role="wavefunction", _checked=True)
        energy = float(np.real(np.sum(np.conj(v) * lstar(v)))
                       * grid.weight / np.pi ** grid.n)
        traj.record(step * cfg.dt, f, measure(v), energy)

    _run_grid_evolution(phi.values, lambda v: factor * lstar(v), cfg, save_every,
                        record, ("norm", nrm0, NORM_DRIFT_TOL, measure))
    return traj


def heisenberg_evolve(alpha: PhaseFunction, G: HamiltonianGenerator,
                      cfg: EvolutionConfig, k: float = 1.0,
                      save_every: int = 0) -> Trajectory:
    """Integrate dα/ds = (k²/2i)[α, G]_⋆ at contraction parameter k.

    Polynomial observables evolve in exact coefficient arithmetic (the
    quadratic algebra closes on itself); grid observables go through the
    star multipliers.
    """
    grid = alpha.grid
    _stability_guard(G, grid, cfg)
    c = 1.0 / k ** 2
    factor = k ** 2 / 2j
    traj = Trajectory("heisenberg")

    if alpha.poly is not None:
        poly = alpha.poly

        def rhs(q):
            return (star_poly(q, G.poly, c) - star_poly(G.poly, q, c)) * factor

        def record_poly(step, q):
            f = PhaseFunction.from_poly(grid, q)
            traj.record(step * cfg.dt, f, f.max_abs(), float("nan"))

        record_poly(0, poly)
        q = poly
        for step in range(1, cfg.steps + 1):
            q = _rk4_step(q, rhs, cfg.dt)
            if (save_every and step % save_every == 0) or step == cfg.steps:
                record_poly(step, q)
        return traj

    lstar = _LeftStar(G, grid, k)
    _rate_guard(lstar.spectral_rate, cfg)

    def record(step, v):
        f = PhaseFunction(grid, v, _checked=True)
        traj.record(step * cfg.dt, f, f.max_abs(), float("nan"))

    sup0 = float(np.max(np.abs(alpha.values)))
    _run_grid_evolution(alpha.values, lambda v: -factor * lstar.commutator(v),
                        cfg, save_every, record,
                        ("observable sup-norm", sup0, np.inf,
                         lambda v: float(np.max(np.abs(v)))))
    return traj


def liouville_evolve(rho: PhaseFunction, G: HamiltonianGenerator,
                     cfg: EvolutionConfig, k: float = 1.0,
                     save_every: int = 0) -> Trajectory:
    """Integrate dρ/ds = (k²/2i)[G, ρ]_⋆; the trace is conserved to 1e-8."""
    grid = rho.grid
    if rho.role != "density":
        raise ValidationError("liouville_evolve expects a density")
    _stability_guard(G, grid, cfg)
    lstar = _LeftStar(G, grid, k)
    _rate_guard(lstar.spectral_rate, cfg)
    factor = k ** 2 / 2j
    trace_w = grid.weight / (2.0 ** (2 * grid.n) * np.pi ** grid.n)
    measure = lambda v: float(np.real(np.sum(v))) * trace_w
    tr0 = measure(rho.values)
    traj = Trajectory("liouville")

    def record(step, v):
        f = PhaseFunction(grid, v, role="density", _checked=True)
        energy = float(np.real(np.sum(G.make(grid).values * v)) * trace_w)
        traj.record(step * cfg.dt, f, measure(v), energy)

    _run_grid_evolution(rho.values, lambda v: factor * lstar.commutator(v),
                        cfg, save_every, record,
                        ("trace", tr0, TRACE_DRIFT_TOL, measure))
    return traj


# ---------------------------------------------------------------------------
# classical flows
# ---------------------------------------------------------------------------

def classical_liouville_evolve(rho: PhaseFunction, G: HamiltonianGenerator,
                               cfg: EvolutionConfig, save_every: int = 0) -> Trajectory:
    """Advect a classical density: dρ/dt = {G, ρ}. Plain ∫ρ is conserved."""
    grid = rho.grid
    m = rho.max_abs()
    if float(np.max(np.abs(rho.values.imag))) > 1e-8 * m:
        raise ValidationError("classical density must be real")
    if float(np.min(rho.values.real)) < -1e-8 * m:
        raise ValidationError("classical density must be nonnegative")
    _stability_guard(G, grid, cfg)
    flow = _PoissonFlow(G, grid)
    _rate_guard(flow.spectral_rate, cfg)
    measure = lambda v: float(np.real(np.sum(v))) * grid.weight
    mass0 = measure(rho.values)
    G_vals = G.make(grid).values
    traj = Trajectory("classical-liouville")

    def record(step, v):
        f = PhaseFunction(grid, v, role="density", _checked=True)
        energy = float(np.real(np.sum(G_vals * v)) * grid.weight)
        traj.record(step * cfg.dt, f, measure(v), energy)

    _run_grid_evolution(rho.values, flow, cfg, save_every, record,
                        ("mass", mass0, MASS_DRIFT_TOL * max(1.0, abs(mass0)), measure))
    return traj


def classical_heisenberg_evolve(alpha: PhaseFunction, G: HamiltonianGenerator,
                                cfg: EvolutionConfig, save_every: int = 0) -> Trajectory:
    """Transport a classical observable: dα/dt = {α, G}."""
    grid = alpha.grid
    _stability_guard(G, grid, cfg)
    traj = Trajectory("classical-heisenberg")

    if alpha.poly is not None:
        q = alpha.poly

        def record_poly(step, qq):
            f = PhaseFunction.from_poly(grid, qq)
            traj.record(step * cfg.dt, f, f.max_abs(), float("nan"))

        record_poly(0, q)
        for step in range(1, cfg.steps + 1):
            q = _rk4_step(q, lambda qq: poisson_poly(qq, G.poly), cfg.dt)
            if (save_every and step % save_every == 0) or step == cfg.steps:
                record_poly(step, q)
        return traj

    flow = _PoissonFlow(G, grid)
    _rate_guard(flow.spectral_rate, cfg)

    def record(step, v):
        f = PhaseFunction(grid, v, _checked=True)
        traj.record(step * cfg.dt, f, float(np.max(np.abs(v))), float("nan"))

    _run_grid_evolution(alpha.values, lambda v: -flow(v), cfg, save_every, record,
                        ("observable sup-norm", float(np.max(np.abs(alpha.values))),
                         np.inf, lambda v: float(np.max(np.abs(v)))))
    return traj


# ---------------------------------------------------------------------------
# derivation generators
# ---------------------------------------------------------------------------

def tilde_apply(which: str, alpha: PhaseFunction, axis: int = 0) -> PhaseFunction:
    """Apply a derivation generator: p̃ = 2i ∂_x, x̃ = 2i ∂_p.

    These act on observables and densities (not wavefunctions) and obey
    the Leibniz rule over the star product. Polynomial-tagged observables
    are differentiated in coefficient form.
    """
    if which not in ("p", "x"):
        raise ValidationError(f"which must be 'p' or 'x', got {which!r}")
    g = alpha.grid
    if alpha.poly is not None:
        dpoly = alpha.poly.diff_x(axis) if which == "p" else alpha.poly.diff_p(axis)
        return PhaseFunction.from_poly(g, dpoly * 2j, role=alpha.role)
    ax = g.n + axis if which == "p" else axis
    vals = 2j * derivative(alpha.values, g.freqs, axis=ax)
    return PhaseFunction(g, vals, role=alpha.role, _checked=True)


@dataclass(frozen=True)
class FreeParticleTildeGenerator:
    """Contracted derivation generator of the free flow: G̃ = (−iħ/m) p·∂_x."""

    mass: float
    k: float = 1.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ValidationError(f"mass {self.mass} must be positive")
        if not self.k > 0:
            raise ValidationError(f"k {self.k} must be positive")

    def apply(self, rho: PhaseFunction) -> PhaseFunction:
        g = rho.grid
        out = np.zeros(g.shape, dtype=np.complex128)
        for i in range(g.n):
            out += (-1j * HBAR / self.mass) * g.p_field(i) \
                * derivative(rho.values, g.freqs, axis=g.n + i)
        return PhaseFunction(g, out, role=rho.role, _checked=True)

    def flow(self, rho: PhaseFunction) -> PhaseFunction:
        """(1/2i) G̃ ρ = −(p/m)·∂_x ρ, the advection field of G = p²/(2m)."""
        return self.apply(rho) * (1.0 / 2j)


def free_particle_tilde_generator(mass: float, k: float = 1.0) -> FreeParticleTildeGenerator:
    return FreeParticleTildeGenerator(mass=mass, k=k)
