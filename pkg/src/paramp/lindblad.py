"""Dissipative dynamics: Liouvillian construction, steady states, observables.

The master equation is the standard single-channel Lindblad form

    drho/dt = -i [H, rho] + kbar D[a] rho,
    D[a] rho = a rho a' - (a'a rho + rho a'a) / 2,

with kbar = kappa + gamma the total damping rate. The signal port kappa and
the loss port gamma act identically on the state; they differ only in the
input-output bookkeeping done by the response layer.

Vectorization is column-stacking: vec(A rho B) = (B^T kron A) vec(rho).
Steady states are obtained from a bordered linear system in which the row
for rho[0, 0] is replaced by the trace constraint; that row is redundant
(the diagonal rows of any trace-preserving generator sum to zero), so the
same LU factorization also serves the trace-zero resolvent solves used by
the quantum-regression noise integrals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fock import DensityOperator, HilbertSpace, Operator, annihilation

__all__ = [
    "EnvironmentParams",
    "GaussianMoments",
    "WignerField",
    "SolveDiagnostics",
    "DegenerateSteadyStateError",
    "ResolventSolveError",
    "liouvillian",
    "lindblad_generator",
    "steady_state",
    "steady_state_converged",
    "tail_population",
    "moments",
    "deviation_xi",
    "wigner",
    "output_quadrature_variance",
    "squeezing_level",
]

STEADY_RESIDUAL_RTOL = 1e-10
TAIL_TOL = 1e-8
TAIL_STATES = 5
DEFAULT_DIM = 80
NEAR_THRESHOLD_DIM = 120
MAX_DIM = 224


class DegenerateSteadyStateError(RuntimeError):
    """The Liouvillian null space is multidimensional; no unique steady state."""


class ResolventSolveError(RuntimeError):
    """The trace-zero resolvent solve failed (generator singular in that subspace)."""


@dataclass(frozen=True)
class EnvironmentParams:
    """Damping rates: signal-port kappa, undesired-loss gamma."""

    kappa: float
    gamma: float = 0.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")

    @property
    def kappa_bar(self) -> float:
        return self.kappa + self.gamma


@dataclass(frozen=True)
class GaussianMoments:
    """First and second cumulants of the intracavity field.

    n = <a'a> - |<a>|^2 and m = <a^2> - <a>^2. Physicality requires
    |m|^2 <= n (n + 1); construction enforces it up to numerical slack.
    """

    mean: complex
    n: float
    m: complex

    def __post_init__(self):
        if self.n < -1e-8:
            raise ValueError(f"negative fluctuation number n = {self.n:.3e}")
        if abs(self.m) ** 2 > self.n * (self.n + 1.0) + 1e-6:
            raise ValueError("moments violate the physicality bound |m|^2 <= n(n+1)")


@dataclass(frozen=True)
class WignerField:
    """Wigner quasiprobability W(x, p) sampled on a rectangular grid."""

    x_grid: np.ndarray
    p_grid: np.ndarray
    values: np.ndarray = field(repr=False)

    def norm(self) -> float:
        dx = self.x_grid[1] - self.x_grid[0]
        dp = self.p_grid[1] - self.p_grid[0]
        return float(self.values.sum() * dx * dp)


@dataclass(frozen=True)
class SolveDiagnostics:
    """Convergence record attached to each adaptive steady-state solve."""

    dim: int
    tail: float
    residual: float
    escalations: int
    dim_capped: bool


def lindblad_generator(h_entries: np.ndarray, collapse: list[tuple[float, np.ndarray]]):
    """Sparse generator for drho/dt = -i[H, rho] + sum_k rate_k D[c_k] rho."""
    dim = h_entries.shape[0]
    eye = sp.identity(dim, format="csr")
    hs = sp.csr_matrix(h_entries)
    gen = -1j * (sp.kron(eye, hs) - sp.kron(hs.T, eye))
    for rate, c in collapse:
        cs = sp.csr_matrix(c)
        cdc = sp.csr_matrix(c.conj().T @ c)
        gen = gen + rate * (
            sp.kron(cs.conj(), cs)
            - 0.5 * sp.kron(eye, cdc)
            - 0.5 * sp.kron(cdc.T, eye)
        )
    return gen.tocsr()


def liouvillian(h: Operator, env: EnvironmentParams):
    """Generator of the single-channel master equation at total rate kbar.

    Rejects non-Hermitian Hamiltonians: the dissipative structure assumes
    the coherent part is H rho - rho H with H = H'.
    """
    hm = h.entries
    scale = max(1.0, float(np.max(np.abs(hm))))
    if np.max(np.abs(hm - hm.conj().T)) > 1e-12 * scale:
        raise ValueError("liouvillian requires a Hermitian Hamiltonian")
    a = annihilation(h.space).entries
    return lindblad_generator(hm, [(env.kappa_bar, a)])


def _trace_indices(dim: int) -> np.ndarray:
    return np.arange(dim) * (dim + 1)


class BorderedSolver:
    """LU factorization of the generator with the rho[0,0] row replaced by trace.

    Solves both the steady-state problem (rhs = trace target) and trace-zero
    resolvent problems y = -L^{-1} x with tr(x) = 0. The replaced row is a
    diagonal row, hence linearly dependent on the remaining ones for any
    trace-preserving generator, so no information is lost.
    """

    def __init__(self, gen):
        n2 = gen.shape[0]
        dim = int(round(math.sqrt(n2)))
        if dim * dim != n2:
            raise ValueError("generator is not dim^2 x dim^2")
        self.dim = dim
        self.gen = gen.tocsr()
        self.scale = float(spla.norm(self.gen, np.inf)) if n2 > 1 else 1.0
        bordered = self.gen.tolil(copy=True)
        row = np.zeros(n2)
        row[_trace_indices(dim)] = 1.0
        bordered[0, :] = row
        self._lu = spla.splu(bordered.tocsc())

    def steady_rho(self) -> np.ndarray:
        b = np.zeros(self.dim * self.dim, dtype=complex)
        b[0] = 1.0
        rho = self._lu.solve(b).reshape((self.dim, self.dim), order="F")
        return 0.5 * (rho + rho.conj().T)

    def residual(self, rho: np.ndarray) -> float:
        v = rho.flatten(order="F")
        return float(np.max(np.abs(self.gen @ v)))

    def resolvent(self, x: np.ndarray) -> np.ndarray:
        """y with L y = -x and tr(y) = 0, for trace-free x."""
        b = -x.flatten(order="F")
        b[0] = 0.0
        y = self._lu.solve(b)
        if not np.all(np.isfinite(y)):
            raise ResolventSolveError("resolvent solve returned non-finite values")
        return y.reshape((self.dim, self.dim), order="F")


def _null_space_multiplicity(gen, scale: float) -> tuple[int, np.ndarray]:
    """Count near-zero eigenvalues of the generator and return one null vector."""
    n2 = gen.shape[0]
    tol = 1e-10 * max(scale, 1.0)
    if n2 <= 4096:
        vals, vecs = np.linalg.eig(gen.toarray())
    else:
        vals, vecs = spla.eigs(gen.tocsc(), k=4, sigma=1e-12, which="LM")
    order = np.argsort(np.abs(vals))
    count = int(np.sum(np.abs(vals) < tol))
    return count, vecs[:, order[0]]


def steady_state(gen, solver: BorderedSolver | None = None) -> DensityOperator:
    """Unique steady state of a trace-preserving generator.

    Direct bordered solve first; on failure (or an unacceptably large
    residual) falls back to a null-space eigensolve, which also reports a
    multidimensional null space instead of silently picking an element.
    """
    if solver is None:
        try:
            solver = BorderedSolver(gen)
        except (RuntimeError, ValueError) as exc:
            return _steady_state_nullspace(gen, err=str(exc))
    rho = solver.steady_rho()
    ok = np.all(np.isfinite(rho)) and abs(np.trace(rho) - 1.0) < 1e-8
    if ok and solver.residual(rho) <= STEADY_RESIDUAL_RTOL * solver.scale:
        space = HilbertSpace(solver.dim)
        return DensityOperator(space, rho)
    return _steady_state_nullspace(gen, err="direct solve residual too large")


def _steady_state_nullspace(gen, err: str) -> DensityOperator:
    n2 = gen.shape[0]
    dim = int(round(math.sqrt(n2)))
    scale = float(spla.norm(gen, np.inf))
    count, vec = _null_space_multiplicity(gen, scale)
    if count > 1:
        raise DegenerateSteadyStateError(
            f"generator null space has dimension {count}; steady state is not unique"
        )
    rho = vec.reshape((dim, dim), order="F")
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr) < 1e-14:
        raise DegenerateSteadyStateError(
            f"null vector has vanishing trace ({err}); no normalizable steady state"
        )
    rho = rho / tr
    return DensityOperator(HilbertSpace(dim), rho)


def tail_population(rho: DensityOperator, last: int = TAIL_STATES) -> float:
    """Total population of the uppermost `last` Fock states."""
    pops = rho.populations()
    return float(np.sum(pops[max(0, rho.space.dim - last):]))


def _initial_dim(coeffs, env: EnvironmentParams, dim: int | None) -> int:
    if dim is not None:
        dim0 = dim
    else:
        dim0 = DEFAULT_DIM
    if abs(complex(coeffs.lam)) > 0.48 * env.kappa and dim0 < NEAR_THRESHOLD_DIM:
        if dim is not None:
            warnings.warn(
                "drive beyond 0.48 kappa: raising truncation to 120; "
                "truncation convergence dominates the error budget here",
                stacklevel=3,
            )
        dim0 = NEAR_THRESHOLD_DIM
    return dim0


def steady_state_converged(coeffs, env: EnvironmentParams, dim: int | None = None,
                           epsilon: complex = 0.0, tail_tol: float = TAIL_TOL,
                           max_dim: int = MAX_DIM):
    """Steady state with automatic truncation escalation.

    Solves at an initial dimension (default 80, at least 120 close to
    threshold) and grows the basis until the population of the top five
    Fock states drops below `tail_tol`. Returns (rho, solver, diagnostics);
    the solver retains the LU factorization for follow-up resolvent work.
    """
    from .model import build_hamiltonian, probe_hamiltonian

    dim_now = _initial_dim(coeffs, env, dim)
    escalations = 0
    while True:
        space = HilbertSpace(dim_now)
        if epsilon:
            h = probe_hamiltonian(coeffs, space, epsilon)
        else:
            h = build_hamiltonian(coeffs, space)
        gen = liouvillian(h, env)
        solver = BorderedSolver(gen)
        rho = steady_state(gen, solver)
        tail = tail_population(rho)
        if tail < tail_tol:
            break
        if dim_now >= max_dim:
            warnings.warn(
                f"tail population {tail:.2e} above {tail_tol:.0e} at the dimension "
                f"cap {max_dim}; treat results as unconverged",
                stacklevel=2,
            )
            break
        dim_now = min(max_dim, int(math.ceil(dim_now * 1.4 / 8.0)) * 8)
        escalations += 1
    diag = SolveDiagnostics(dim=dim_now, tail=tail,
                            residual=solver.residual(rho.entries) / solver.scale,
                            escalations=escalations,
                            dim_capped=(tail >= tail_tol))
    return rho, solver, diag


def moments(rho: DensityOperator) -> GaussianMoments:
    """Central moments of a and a^2 by exact trace evaluation."""
    a = annihilation(rho.space).entries
    r = rho.entries
    mean = complex(np.trace(a @ r))
    n = float(np.real(np.trace(a.conj().T @ a @ r))) - abs(mean) ** 2
    m = complex(np.trace(a @ a @ r)) - mean**2
    return GaussianMoments(mean=mean, n=max(n, 0.0) if -1e-8 < n < 0 else n, m=m)


VACUUM_N_FLOOR = 1e-12


def deviation_xi(mom: GaussianMoments) -> float:
    """Distance from ideal degenerate-parametric-amplifier statistics.

    xi = 1 - |m| / sqrt(n (n + 1/2)); zero for the squeezed-thermal family
    the ideal amplifier produces. The n -> 0 limit is taken as 0 (vacuum is
    the zero-drive member of that family). Raw values escaping [0, 1] by
    more than 1e-6 are reported via a warning before clamping.
    """
    if mom.n < 0:
        raise ValueError("deviation_xi requires n >= 0")
    if mom.n < VACUUM_N_FLOOR:
        return 0.0
    raw = 1.0 - abs(mom.m) / math.sqrt(mom.n * (mom.n + 0.5))
    if raw < -1e-6 or raw > 1.0 + 1e-6:
        warnings.warn(f"deviation parameter {raw:.3e} outside [0, 1]", stacklevel=2)
    return min(max(raw, 0.0), 1.0)


def wigner(rho: DensityOperator, x_grid=None, p_grid=None) -> WignerField:
    """Wigner function W(x, p) with x = sqrt(2) Re(alpha), p = sqrt(2) Im(alpha).

    Uses the displaced-parity form W = (1/pi) Tr[rho D(2 alpha) Pi] evaluated
    diagonal-by-diagonal with the associated-Laguerre three-term recursion,
    so the cost is one grid-sized array op per density-matrix element.
    Vacuum peaks at 1/pi with quadrature variance 1/2.
    """
    if x_grid is None:
        x_grid = np.linspace(-6.0, 6.0, 201)
    if p_grid is None:
        p_grid = np.linspace(-6.0, 6.0, 201)
    x_grid = np.asarray(x_grid, dtype=float)
    p_grid = np.asarray(p_grid, dtype=float)
    dim = rho.space.dim
    r = rho.entries
    xs, ps = np.meshgrid(x_grid, p_grid, indexing="ij")
    beta = np.sqrt(2.0) * (xs + 1j * ps)  # 2 alpha
    t = np.abs(beta) ** 2
    envelope = np.exp(-0.5 * t)
    w = np.zeros_like(xs)
    parity = (-1.0) ** np.arange(dim)
    lgam = [math.lgamma(k + 1) for k in range(dim + 1)]
    for k in range(dim):
        if k == 0:
            bk = None
        elif k == 1:
            bk = beta.copy()
        else:
            bk = bk * beta
        lag_prev = np.zeros_like(t)
        lag = np.ones_like(t)  # L_0^(k)
        for n in range(dim - k):
            if n > 0:
                lag_next = ((2 * n - 1 + k - t) * lag - (n - 1 + k) * lag_prev) / n
                lag_prev, lag = lag, lag_next
            m = n + k
            weight = r[n, m] * parity[n]
            if weight == 0:
                continue
            cf = math.exp(0.5 * (lgam[n] - lgam[m]))
            amp = cf * envelope * lag
            if k == 0:
                w += np.real(weight) * amp
            else:
                w += 2.0 * np.real(weight * bk) * amp
    return WignerField(x_grid=x_grid, p_grid=p_grid, values=w / np.pi)


def _noise_integrals(solver: BorderedSolver, rho: DensityOperator):
    """One-sided integrated fluctuation correlators of the output-ordered set.

    J1 = int <da(t) da(0)>,   J2 = int <da'(0) da'(t)>,
    J3 = int <da'(t) da(0)>,  J4 = int <da'(0) da(t)>,

    each obtained from a trace-zero resolvent solve against the generator
    (quantum regression theorem; no time integration). The creation-pair
    term J2 carries the later time on the right, which is the ordering the
    output field inherits from input-output theory.
    """
    dim = rho.space.dim
    a = annihilation(rho.space).entries
    mean = complex(np.trace(a @ rho.entries))
    da = a - mean * np.eye(dim)
    dad = da.conj().T
    y_left = solver.resolvent(da @ rho.entries)   # evolves da . rho
    y_right = solver.resolvent(rho.entries @ dad)  # evolves rho . da'
    j1 = complex(np.trace(da @ y_left))
    j3 = complex(np.trace(dad @ y_left))
    j2 = complex(np.trace(dad @ y_right))
    j4 = complex(np.trace(da @ y_right))
    return j1, j2, j3, j4


def _variance_from_integrals(integrals, theta: float, env: EnvironmentParams) -> float:
    j1, j2, j3, j4 = integrals
    corr = np.exp(-2j * theta) * j1 + np.exp(2j * theta) * j2 + j3 + j4
    return 0.5 + env.kappa * float(np.real(corr))


def output_quadrature_variance(gen, rho_ss: DensityOperator, theta: float,
                               env: EnvironmentParams,
                               solver: BorderedSolver | None = None) -> float:
    """Zero-frequency output variance of X_theta = (a e^{-i theta} + a' e^{i theta})/sqrt(2).

    variance = 1/2 + kappa * (two-sided integral of the normally ordered
    output-field quadrature correlations), evaluated through resolvent
    solves against the generator. Vacuum input gives exactly 1/2.
    """
    if solver is None:
        solver = BorderedSolver(gen)
    return _variance_from_integrals(_noise_integrals(solver, rho_ss), theta, env)


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_minimize(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
    xm = 0.5 * (lo + hi)
    return xm, f(xm)


def squeezing_level(gen, rho_ss: DensityOperator, env: EnvironmentParams,
                    theta_tol: float = 1e-4,
                    solver: BorderedSolver | None = None) -> float:
    """Vacuum-to-minimum output variance ratio S_f = (1/2) / min_theta var(theta).

    The variance is a single pi-periodic harmonic in theta; a coarse scan
    brackets the minimum and a golden-section search polishes it to
    `theta_tol` radians.
    """
    if solver is None:
        solver = BorderedSolver(gen)
    integrals = _noise_integrals(solver, rho_ss)

    def var(theta: float) -> float:
        return _variance_from_integrals(integrals, theta, env)

    coarse = np.linspace(0.0, np.pi, 33)
    vals = [var(t) for t in coarse]
    i0 = int(np.argmin(vals))
    step = coarse[1] - coarse[0]
    _, vmin = _golden_minimize(var, coarse[i0] - step, coarse[i0] + step, theta_tol)
    if vmin <= 0:
        raise ResolventSolveError(
            f"nonpositive minimum output variance {vmin:.3e}; "
            "state is unconverged or beyond threshold"
        )
    return 0.5 / vmin
