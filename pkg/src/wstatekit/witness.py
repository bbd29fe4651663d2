"""Projector-based entanglement witness for the 8-mode single-photon
state, with a feasibility search over its three coefficients.

The witness is ``alpha * P0 + beta * P1 + gamma * P2 - |target><target|``
where P_i projects onto the i-excitation subspace of 8 dual-rail qubits
and the target is the uniform single-excitation superposition.  A valid
witness must be non-negative on every separable product state; following
the symmetric two-block ansatz, candidates are checked against states
``(a0|0> + a1|1>)^k tensor (b0|0> + b1|1>)^(8-k)`` for every split k,
which is where the symmetric extreme points live (gamma is kept
non-negative so the two-excitation mass of these products can only help,
keeping the reduction conservative).  The search itself is a small
linear program over (alpha, beta, gamma) plus the worst-corner value of
the witness on the modeled noisy state, solved exactly by active-set
vertex enumeration with cutting planes from the continuous minimizer.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .optics import NoiseModel

N_QUBITS = 8
DIM = 2**N_QUBITS

# Hamming weight of each basis index = total excitation number.
_WEIGHTS = np.array([bin(i).count("1") for i in range(DIM)])

# Numerical slack: sampled LP constraints are satisfied to this
# tolerance, the continuous minimum must clear -1e-9, and a certificate
# only counts as feasible when its margin is below -1e-9.
_LP_FEAS_TOL = 1e-9
MIN_EXPECTATION_TOL = 1e-9


@dataclass(frozen=True)
class WitnessParams:
    """Witness coefficients for the 0-, 1-, and 2-excitation projectors."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class ProductAnsatz:
    """Symmetric two-block product state.

    The first ``k`` qubits each carry ``a0|0> + a1|1>`` and the rest each
    carry ``b0|0> + b1|1>``, with a1, b1 fixed by per-qubit normalization.
    Amplitudes are real non-negative: the projector terms only see
    moduli and the target overlap is maximal at aligned phases, so this
    slice contains the worst case.
    """

    k: int
    a0: float
    b0: float

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or not 1 <= self.k <= N_QUBITS - 1:
            raise ValueError(f"k must be an integer in [1, {N_QUBITS - 1}], got {self.k!r}")
        for name in ("a0", "b0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and 0.0 <= value <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {value!r}")

    @property
    def a1(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.a0 * self.a0))

    @property
    def b1(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.b0 * self.b0))


@dataclass(frozen=True, eq=False)
class DenseState:
    """Dense 256-dimensional state: either a unit vector or a density
    matrix (trace one, Hermitian).  Exactly one of the two is set."""

    vector: np.ndarray = None
    density: np.ndarray = None

    def __post_init__(self):
        if (self.vector is None) == (self.density is None):
            raise ValueError("provide exactly one of vector or density")
        if self.vector is not None:
            vec = np.asarray(self.vector, dtype=complex).copy()
            if vec.shape != (DIM,):
                raise ValueError(f"vector must have shape ({DIM},)")
            if abs(float(np.sum(np.abs(vec) ** 2)) - 1.0) > 1e-12:
                raise ValueError("vector is not normalized within 1e-12")
            vec.flags.writeable = False
            object.__setattr__(self, "vector", vec)
        else:
            rho = np.asarray(self.density, dtype=complex).copy()
            if rho.shape != (DIM, DIM):
                raise ValueError(f"density must have shape ({DIM}, {DIM})")
            if abs(float(np.real(np.trace(rho))) - 1.0) > 1e-12:
                raise ValueError("density trace is not 1 within 1e-12")
            if float(np.max(np.abs(rho - rho.conj().T))) > 1e-12:
                raise ValueError("density is not Hermitian within 1e-12")
            rho.flags.writeable = False
            object.__setattr__(self, "density", rho)


def target_vector() -> np.ndarray:
    """Uniform superposition over the 8 single-excitation basis states."""
    vec = np.zeros(DIM)
    vec[_WEIGHTS == 1] = 1.0 / math.sqrt(N_QUBITS)
    return vec


def witness_matrix(params: WitnessParams) -> np.ndarray:
    """Dense 256 x 256 witness matrix (real symmetric)."""
    diagonal = np.zeros(DIM)
    diagonal[_WEIGHTS == 0] = params.alpha
    diagonal[_WEIGHTS == 1] = params.beta
    diagonal[_WEIGHTS == 2] = params.gamma
    target = target_vector()
    return np.diag(diagonal) - np.outer(target, target)


def dense_expectation(params: WitnessParams, state: DenseState) -> float:
    """Witness expectation by direct contraction; the reference the
    closed forms are validated against."""
    matrix = witness_matrix(params)
    if state.vector is not None:
        return float(np.real(np.conj(state.vector) @ (matrix @ state.vector)))
    return float(np.real(np.trace(matrix @ state.density)))


def product_state_vector(ansatz: ProductAnsatz) -> np.ndarray:
    """Dense vector of the two-block product state."""
    block_a = np.array([ansatz.a0, ansatz.a1])
    block_b = np.array([ansatz.b0, ansatz.b1])
    vec = np.ones(1)
    for _ in range(ansatz.k):
        vec = np.kron(vec, block_a)
    for _ in range(N_QUBITS - ansatz.k):
        vec = np.kron(vec, block_b)
    return vec


def noise_density(noise: NoiseModel) -> np.ndarray:
    """Density matrix of the modeled preparation: coherent fraction p of
    the target within the single-excitation sector, the rest of that
    sector fully mixed, plus two-excitation contamination of weight q."""
    target = target_vector()
    single = np.diag((_WEIGHTS == 1) / float(N_QUBITS))
    double = np.diag((_WEIGHTS == 2) / float(comb(N_QUBITS, 2)))
    coherent = np.outer(target, target)
    return (1.0 - noise.q) * (noise.p * coherent + (1.0 - noise.p) * single) + noise.q * double


def _product_terms(k: int, a0, b0):
    """Projector expectations and target overlap of the two-block product.

    Vectorized over a0 and b0 (scalar k).  Returns (P0, P1, P2, overlap**2).
    """
    a0 = np.asarray(a0, dtype=float)
    b0 = np.asarray(b0, dtype=float)
    m = N_QUBITS - k
    a1sq = np.clip(1.0 - a0 * a0, 0.0, None)
    b1sq = np.clip(1.0 - b0 * b0, 0.0, None)
    p0 = a0 ** (2 * k) * b0 ** (2 * m)
    p1 = (
        k * a0 ** (2 * (k - 1)) * a1sq * b0 ** (2 * m)
        + m * a0 ** (2 * k) * b0 ** (2 * (m - 1)) * b1sq
    )
    p2 = k * m * a0 ** (2 * (k - 1)) * a1sq * b0 ** (2 * (m - 1)) * b1sq
    if k >= 2:
        p2 = p2 + comb(k, 2) * a0 ** (2 * (k - 2)) * a1sq**2 * b0 ** (2 * m)
    if m >= 2:
        p2 = p2 + comb(m, 2) * a0 ** (2 * k) * b0 ** (2 * (m - 2)) * b1sq**2
    overlap = (
        k * a0 ** (k - 1) * np.sqrt(a1sq) * b0**m
        + m * a0**k * b0 ** (m - 1) * np.sqrt(b1sq)
    ) / math.sqrt(float(N_QUBITS))
    return p0, p1, p2, overlap * overlap


def product_expectation(params: WitnessParams, ansatz: ProductAnsatz) -> float:
    """Closed-form witness expectation on a two-block product state.

    Agrees with ``dense_expectation`` on the tensor-constructed vector to
    float precision; linear in (alpha, beta, gamma), which is what makes
    the feasibility search a linear program.
    """
    p0, p1, p2, ovl2 = _product_terms(ansatz.k, ansatz.a0, ansatz.b0)
    return float(params.alpha * p0 + params.beta * p1 + params.gamma * p2 - ovl2)


def rho_expectation(params: WitnessParams, noise: NoiseModel) -> float:
    """Closed-form witness expectation on the modeled noisy state:
    ``(1 - q) * (beta - (7 p + 1) / 8) + gamma * q``.

    Affine in p and in q, so extremes over a (p, q) rectangle sit at its
    corners.
    """
    p, q = noise.p, noise.q
    single_part = params.beta - (7.0 * p + 1.0) / 8.0
    return float((1.0 - q) * single_part + params.gamma * q)


def _refine_minimum(params: WitnessParams, k: int, a0: float, b0: float):
    """Coordinate descent from a grid point down to step 1e-6."""

    def value(x, y):
        p0, p1, p2, ovl2 = _product_terms(k, x, y)
        return float(params.alpha * p0 + params.beta * p1 + params.gamma * p2 - ovl2)

    best = value(a0, b0)
    step = 0.01
    while step >= 1e-6:
        moved = False
        for dx, dy in ((-step, 0.0), (step, 0.0), (0.0, -step), (0.0, step)):
            x = min(1.0, max(0.0, a0 + dx))
            y = min(1.0, max(0.0, b0 + dy))
            candidate = value(x, y)
            if candidate < best:
                best, a0, b0 = candidate, x, y
                moved = True
        if not moved:
            step /= 10.0
    return best, a0, b0


def min_product_expectation(params: WitnessParams):
    """Minimum witness expectation over the product-state ansatz.

    Scans a 101 x 101 grid in (a0, b0) for every split k, then refines
    the best grid point by coordinate descent to step 1e-6.

    Returns
    -------
    (float, ProductAnsatz)
        The minimum value and where it is attained.
    """
    grid = np.linspace(0.0, 1.0, 101)
    a0g, b0g = np.meshgrid(grid, grid, indexing="ij")
    best_value, best_point = math.inf, None
    for k in range(1, N_QUBITS):
        p0, p1, p2, ovl2 = _product_terms(k, a0g, b0g)
        values = params.alpha * p0 + params.beta * p1 + params.gamma * p2 - ovl2
        flat = int(np.argmin(values))
        i, j = np.unravel_index(flat, values.shape)
        value, a0, b0 = _refine_minimum(params, k, float(grid[i]), float(grid[j]))
        if value < best_value:
            best_value, best_point = value, ProductAnsatz(k, a0, b0)
    return best_value, best_point


# ---------------------------------------------------------------------------
# Linear program: minimize the worst-corner expectation subject to
# non-negativity on sampled product states.  Solved without external
# dependencies by enumerating vertices of a small working set of
# constraints and adding the most violated rows until none remain.
# ---------------------------------------------------------------------------


def _vertex_solve(objective: np.ndarray, rows: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Exact minimum of a 4-variable LP ``rows @ x <= rhs`` over its
    vertices.  The feasible set must be pointed and the optimum finite."""
    n = rows.shape[0]
    if math.comb(n, 4) > 500_000:
        raise RuntimeError(f"working set grew to {n} rows; enumeration is off the table")
    combos = np.array(list(itertools.combinations(range(n), 4)))
    mats = rows[combos]
    vecs = rhs[combos]
    dets = np.abs(np.linalg.det(mats))
    usable = dets > 1e-12
    if not np.any(usable):
        raise RuntimeError("no non-singular constraint combination")
    solutions = np.linalg.solve(mats[usable], vecs[usable][..., None])[..., 0]
    feasible = np.all(rows @ solutions.T <= rhs[:, None] + _LP_FEAS_TOL, axis=0)
    if not np.any(feasible):
        raise RuntimeError("no feasible vertex; the working set is inconsistent")
    candidates = solutions[feasible]
    scores = candidates @ objective
    return candidates[int(np.argmin(scores))]


def _lp_min(objective: np.ndarray, rows: np.ndarray, rhs: np.ndarray, n_structural: int) -> np.ndarray:
    """Cutting-plane LP: start from the structural rows (assumed to bound
    the problem) and pull in violated sampled rows until optimal."""
    work = list(range(n_structural))
    in_work = set(work)
    for _ in range(500):
        x = _vertex_solve(objective, rows[work], rhs[work])
        violation = rows @ x - rhs
        violation[work] = -math.inf
        worst = np.argsort(violation)[-3:][::-1]
        added = False
        for idx in worst:
            idx = int(idx)
            if violation[idx] > _LP_FEAS_TOL and idx not in in_work:
                work.append(idx)
                in_work.add(idx)
                added = True
        if not added:
            return x
    raise RuntimeError("linear program failed to converge")


@dataclass(frozen=True)
class WitnessCertificate:
    """Search outcome: the coefficients, the verified minimum over the
    product ansatz with its minimizer, the worst corner of the (p, q)
    rectangle with the witness value there (the margin), the number of
    verification rounds, and whether the witness succeeds (margin
    strictly negative)."""

    params: WitnessParams
    feasible: bool
    margin: float
    worst_corner: tuple
    min_product_expectation: float
    argmin: ProductAnsatz
    rounds: int

    def to_dict(self) -> dict:
        return {
            "alpha": self.params.alpha,
            "beta": self.params.beta,
            "gamma": self.params.gamma,
            "min_product_expectation": self.min_product_expectation,
            "argmin": {"k": self.argmin.k, "a0": self.argmin.a0, "b0": self.argmin.b0},
            "worst_corner": {"p": self.worst_corner[0], "q": self.worst_corner[1]},
            "margin": self.margin,
            "rounds": self.rounds,
            "feasible": self.feasible,
        }


def _corner_rows(corners) -> tuple:
    """Corner constraints ``rho_expectation <= t`` as LP rows over
    (alpha, beta, gamma, t)."""
    rows, rhs = [], []
    for p, q in corners:
        # (1-q) * (beta - (7p+1)/8) + gamma * q - t <= 0
        rows.append([0.0, 1.0 - q, q, -1.0])
        rhs.append((1.0 - q) * (7.0 * p + 1.0) / 8.0)
    return np.array(rows), np.array(rhs)


def _sampled_rows(grid_step: float) -> tuple:
    """Non-negativity on the sampled product grid as LP rows."""
    grid = np.linspace(0.0, 1.0, int(round(1.0 / grid_step)) + 1)
    a0g, b0g = np.meshgrid(grid, grid, indexing="ij")
    rows, rhs = [], []
    for k in range(1, N_QUBITS):
        p0, p1, p2, ovl2 = _product_terms(k, a0g, b0g)
        block = np.column_stack(
            [-p0.ravel(), -p1.ravel(), -p2.ravel(), np.zeros(p0.size)]
        )
        rows.append(block)
        rhs.append(-ovl2.ravel())
    rows = np.vstack(rows)
    rhs = np.concatenate(rhs)
    # Scale rows to unit magnitude and drop the numerically empty ones.
    scale = np.maximum(np.max(np.abs(rows), axis=1), np.abs(rhs))
    keep = scale > 1e-12
    rows, rhs = rows[keep] / scale[keep, None], rhs[keep] / scale[keep]
    merged = np.unique(np.column_stack([rows, rhs]), axis=0)
    return merged[:, :4], merged[:, 4]


def _ansatz_row(ansatz: ProductAnsatz) -> tuple:
    p0, p1, p2, ovl2 = _product_terms(ansatz.k, ansatz.a0, ansatz.b0)
    row = np.array([-float(p0), -float(p1), -float(p2), 0.0])
    rhs = -float(ovl2)
    scale = max(float(np.max(np.abs(row))), abs(rhs), 1e-12)
    return row / scale, rhs / scale


def find_witness(
    p_min: float,
    q_max: float,
    coeff_box: float = 4.0,
    grid_step: float = 0.02,
    max_rounds: int = 50,
) -> WitnessCertificate:
    """Search for witness coefficients certifying entanglement over the
    whole parameter rectangle [p_min, 1] x [0, q_max].

    Minimizes the worst corner value of the witness on the modeled state
    subject to non-negativity on the sampled product grid, then verifies
    the continuous minimum over the ansatz; any violation below -1e-9 is
    added as a cutting plane and the program re-solved, up to
    ``max_rounds`` times.  The returned certificate is feasible when the
    verified margin is strictly negative; p_min = 0 is accepted and
    yields the expected infeasible certificate.

    Raises
    ------
    ValueError
        If p_min is outside [0, 1] or q_max outside [0, 1).
    RuntimeError
        If the cutting-plane loop fails to converge.
    """
    if not (math.isfinite(p_min) and 0.0 <= p_min <= 1.0):
        raise ValueError(f"p_min must be in [0, 1], got {p_min!r}")
    if not (math.isfinite(q_max) and 0.0 <= q_max < 1.0):
        raise ValueError(f"q_max must be in [0, 1), got {q_max!r}")

    corners = sorted({(p_min, 0.0), (p_min, q_max), (1.0, 0.0), (1.0, q_max)})
    corner_rows, corner_rhs = _corner_rows(corners)
    box_rows, box_rhs = [], []
    for var in range(3):
        for sign in (1.0, -1.0):
            row = np.zeros(4)
            row[var] = sign
            box_rows.append(row)
            box_rhs.append(coeff_box)
    box_rows.append(np.array([0.0, 0.0, -1.0, 0.0]))  # gamma >= 0
    box_rhs.append(0.0)
    structural_rows = np.vstack([corner_rows, np.array(box_rows)])
    structural_rhs = np.concatenate([corner_rhs, np.array(box_rhs)])

    sampled_rows, sampled_rhs = _sampled_rows(grid_step)
    rows = np.vstack([structural_rows, sampled_rows])
    rhs = np.concatenate([structural_rhs, sampled_rhs])
    objective = np.array([0.0, 0.0, 0.0, 1.0])

    rounds = 0
    for rounds in range(1, max_rounds + 1):
        x = _lp_min(objective, rows, rhs, structural_rows.shape[0])
        params = WitnessParams(float(x[0]), float(x[1]), float(x[2]))
        minimum, argmin = min_product_expectation(params)
        if minimum >= -MIN_EXPECTATION_TOL:
            break
        cut_row, cut_rhs = _ansatz_row(argmin)
        rows = np.vstack([rows, cut_row])
        rhs = np.append(rhs, cut_rhs)
    else:
        raise RuntimeError(f"witness search did not converge in {max_rounds} rounds")

    corner_values = [rho_expectation(params, NoiseModel(p, q)) for p, q in corners]
    worst = int(np.argmax(corner_values))
    margin = float(corner_values[worst])
    return WitnessCertificate(
        params=params,
        feasible=margin < -MIN_EXPECTATION_TOL,
        margin=margin,
        worst_corner=corners[worst],
        min_product_expectation=minimum,
        argmin=argmin,
        rounds=rounds,
    )
