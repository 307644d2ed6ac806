'''
  @ Date: 2026/10/18 21:40
'''
import collections
import math

import numpy as np
import pandas as pd

from chirikov.model import get_model
from chirikov.torus import (TangentVector, TorusPoint, check_kick, jacobian, torus_dist, chirikov_step,
                            _round_trip_errors)
from chirikov.utils.rng import RngStreamSpec, uniform_angles
from chirikov.harris import LogRate

RANK_TOL = 1e-8
FD_STEP = 1e-6
COMPLEX_STEP = 1e-30
# a real step is shrunk until h K^n stays below this, n being the number of composed steps
FD_LINEAR_RANGE = 1e-2
EQUILIBRATION_SWEEPS = 4
# pivot coordinates (w1 of the first step, w2 of the first step) of the four-step one-point map
KERNEL_PIVOTS = (0, 1)
DERIVATIVE_METHODS = ("complex", "fd")

RankReport = collections.namedtuple("RankReport", ["rows", "cols", "singular_values", "rank_at_tol", "tol",
                                                   "matrix", "equilibrated"])
DetReport = collections.namedtuple("DetReport", ["value", "expected", "rel_error"])
SurjectivityReport = collections.namedtuple("SurjectivityReport", ["phi", "product", "kernel", "kernel_residual"])


def equilibrate(matrix, sweeps=EQUILIBRATION_SWEEPS):
    """
    Alternating row and column scaling by the largest absolute entry. Rank is unchanged, but entries of order K^n
    and order one become comparable, so a relative threshold no longer reads K-powers as rank deficiency.
    """
    scaled = np.array(matrix, dtype=float)
    for _ in range(sweeps):
        rows = np.max(np.abs(scaled), axis=1)
        rows[rows == 0.] = 1.
        scaled /= rows[:, None]
        cols = np.max(np.abs(scaled), axis=0)
        cols[cols == 0.] = 1.
        scaled /= cols[None, :]
    return scaled


def rank_report(matrix, tol=RANK_TOL, equilibrated=False):
    """
    Numerical rank: the number of singular values above tol times the largest one.
    :param matrix: 2-d array.
    :param tol: relative threshold.
    :param equilibrated: take the singular values of the row/column equilibrated matrix.
    :return: RankReport; matrix is always the unscaled input.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    measured = equilibrate(matrix) if equilibrated else matrix
    singular_values = np.linalg.svd(measured, compute_uv=False)
    top = singular_values[0] if singular_values.size else 0.
    rank = int(np.sum(singular_values > tol * top)) if top > 0 else 0
    return RankReport(matrix.shape[0], matrix.shape[1], singular_values, rank, tol, matrix, equilibrated)


def det_report(value, expected):
    return DetReport(value, expected, abs(value - expected) / max(abs(expected), 1e-300))


def fd_jacobian(function, params, h=FD_STEP):
    """
    Fourth-order central difference Jacobian of a vector function.
    :param function: maps a 1-d parameter array to a 1-d array.
    :param params: base point.
    :param h: step.
    :return: (outputs, inputs) array
    """
    params = np.asarray(params, dtype=float)
    columns = []
    for i in range(params.size):
        shift = np.zeros(params.size)
        shift[i] = h
        columns.append((-np.asarray(function(params + 2 * shift)) + 8 * np.asarray(function(params + shift))
                        - 8 * np.asarray(function(params - shift)) + np.asarray(function(params - 2 * shift)))
                       / (12 * h))
    return np.stack(columns, axis=1)


def complex_step_jacobian(function, params, h=COMPLEX_STEP):
    """
    Jacobian from Im f(p + i h e_j) / h. Exact to rounding for functions analytic in their parameters, with no
    subtraction and so no dependence on the size of h.
    :param function: maps a 1-d parameter array to a 1-d array; must accept complex input.
    """
    params = np.asarray(params, dtype=float)
    columns = []
    for i in range(params.size):
        shifted = params.astype(complex)
        shifted[i] += 1j * h
        columns.append(np.imag(np.asarray(function(shifted))) / h)
    return np.stack(columns, axis=1)


def scaled_fd_step(K, n_steps, h=FD_STEP):
    """Largest step not above h for which a phase perturbation, grown by about K per step, stays near-linear."""
    return min(h, FD_LINEAR_RANGE / K ** n_steps)


def derivative(function, params, method="complex", h=FD_STEP):
    if method == "complex":
        return complex_step_jacobian(function, params)
    if method == "fd":
        return fd_jacobian(function, params, h=h)
    raise ValueError("'method' must be one of {0}; '{1}' is not recognized".format(DERIVATIVE_METHODS, method))


def lipschitz_probe(function, z, delta=1e-7):
    """Spectral norm of a finite-difference Jacobian: a local Lipschitz constant of function at z."""
    return float(np.linalg.norm(fd_jacobian(function, z, h=delta), ord=2))


def _lifted_endpoints(points, phases, shear):
    values = []
    for point in points:
        x = np.asarray(point, dtype=float)
        for w in phases:
            x = shear.lifted_step(x, w)
        values.append(x)
    return np.concatenate(values)


def phase_map(points, K, model="chirikov"):
    """Lifted composed map of the flattened phase vector, for every start point stacked."""
    shear = get_model(model, K)

    def function(flat):
        return _lifted_endpoints(points, np.reshape(flat, (-1, 2)), shear)

    return function


def phase_jacobian(points, phases, K, columns=None, model="chirikov"):
    """
    Chain-rule derivative of the lifted composed map with respect to selected phase coordinates.
    :param points: start points.
    :param phases: (n, 2) base phases.
    :param columns: list of (step, component) pairs; all phases when None.
    :return: (2 * len(points), len(columns)) array
    """
    shear = get_model(model, K)
    phases = np.asarray(phases, dtype=float)
    n = phases.shape[0]
    if columns is None:
        columns = [(i, j) for i in range(n) for j in range(2)]
    blocks = []
    for point in points:
        x = np.asarray(point, dtype=float)
        steps, partials = [], []
        for w in phases:
            a, b, c, d = shear.jacobian_array(x, w)
            steps.append(np.array([[a, b], [c, d]], dtype=float))
            first, second = shear.phase_derivative_array(x, w)
            partials.append((np.array(first, dtype=float), np.array(second, dtype=float)))
            x = shear.lifted_step(x, w)
        block = np.zeros((2, len(columns)))
        for column, (i, j) in enumerate(columns):
            vector = partials[i][j]
            for later in steps[i + 1:]:
                vector = later.dot(vector)
            block[:, column] = vector
        blocks.append(block)
    return np.concatenate(blocks, axis=0)


def det_xi_phi8(K, method="chain", h=FD_STEP):
    """
    |det| of the derivative of the four-step two-point map at z = ((0, 0), (0, pi)), zero phases, with respect to
    (w_1^1, w_2^2, w_3^2, w_4^2); expected 12 K^4.
    :param method: 'chain', 'complex' or 'fd'; 'fd' uses h shrunk by scaled_fd_step for the four steps.
    """
    K = check_kick(K)
    points = [(0., 0.), (0., math.pi)]
    phases = np.zeros((4, 2))
    columns = [(0, 0), (1, 1), (2, 1), (3, 1)]
    if method == "chain":
        matrix = phase_jacobian(points, phases, K, columns)
    elif method in DERIVATIVE_METHODS:
        full = derivative(phase_map(points, K), phases.ravel(), method, h=scaled_fd_step(K, 4, h))
        matrix = full[:, [2 * i + j for i, j in columns]]
    else:
        raise ValueError("'method' must be 'chain', 'complex' or 'fd'; '{0}' is not recognized".format(method))
    return det_report(abs(float(np.linalg.det(matrix))), 12. * K ** 4)


def one_point_submersion(K, tol=RANK_TOL, method="complex", h=FD_STEP):
    """D_w of one step at x = (0, 0), w = (0, 0); closed form [[-K, 0], [-K, -1]]."""
    K = check_kick(K)
    return rank_report(derivative(phase_map([(0., 0.)], K), np.zeros(2), method, h=scaled_fd_step(K, 1, h)), tol)


def projective_map(x, v, K):
    """Lifted projective map of the flattened phase vector: (x1, x2, u1, u2) with u = D f v / |D f v|."""
    shear = get_model("chirikov", K)

    def function(flat):
        phases = np.reshape(flat, (-1, 2))
        y = np.asarray(x, dtype=float)
        u = np.asarray(v, dtype=float)
        for w in phases:
            a, b, c, d = shear.jacobian_array(y, w)
            u = np.array([a * u[0] + b * u[1], c * u[0] + d * u[1]])
            y = shear.lifted_step(y, w)
        # analytic norm, hypot has no complex extension
        return np.concatenate([y, u / np.sqrt(u[0] * u[0] + u[1] * u[1])])

    return function


def projective_submersion(K, tol=RANK_TOL, method="complex", h=FD_STEP):
    """Two-step projective map at x = (0, 0), v = (1, 0), phases ((0, 0), (pi/2, 0)); rank 3 expected."""
    K = check_kick(K)
    base = np.array([0., 0., math.pi / 2., 0.])
    matrix = derivative(projective_map((0., 0.), (1., 0.), K), base, method, h=scaled_fd_step(K, 2, h))
    return rank_report(matrix, tol)


def two_point_submersion(K, n=3, tol=RANK_TOL, method="complex", h=FD_STEP):
    """
    Two-point map at ((0, 0), (pi, pi)) after n zero-phase steps; full rank 4 for n = 3.
    Rows carry powers of K from K^n down to one, so the rank is read off the equilibrated matrix.
    """
    K = check_kick(K)
    matrix = derivative(phase_map([(0., 0.), (math.pi, math.pi)], K), np.zeros(2 * n), method,
                        h=scaled_fd_step(K, n, h))
    return rank_report(matrix, tol, equilibrated=True)


def two_point_degenerate(K, tol=RANK_TOL, method="complex", h=FD_STEP):
    """The n = 2 analogue of two_point_submersion, which is rank-deficient."""
    return two_point_submersion(K, n=2, tol=tol, method=method, h=h)


def surjectivity_point(K):
    x = (math.pi / 2., math.pi)
    phases = np.array([[0., math.pi / 2. - 1.],
                       [math.pi / 2. + 1., math.pi / 2. + K],
                       [math.pi / 2. + 1., math.pi / 2. + 2. * K],
                       [math.pi / 2. + 1., math.pi / 2. + 3. * K]])
    return x, phases


def cocycle_map(x, K):
    """Flattened (a, b, c, d) of the derivative cocycle as a function of the flattened phases."""
    shear = get_model("chirikov", K)

    def function(flat):
        y = np.asarray(x, dtype=float)
        product = np.eye(2)
        for w in np.reshape(flat, (-1, 2)):
            a, b, c, d = shear.jacobian_array(y, w)
            product = np.array([[a, b], [c, d]]).dot(product)
            y = shear.lifted_step(y, w)
        return product.ravel()

    return function


def pivot_kernel_basis(matrix, pivots=KERNEL_PIVOTS):
    """
    Kernel basis with one unit coordinate per free column: column j is e_j - B^-1 A e_j placed on the pivots,
    B being the square block of pivot columns.
    :param matrix: (r, m) array of full row rank r.
    :param pivots: r column indices with an invertible block.
    :return: (m, m - r) array
    """
    matrix = np.asarray(matrix, dtype=float)
    pivots = list(pivots)
    free = [j for j in range(matrix.shape[1]) if j not in pivots]
    block = matrix[:, pivots]
    if block.shape[0] != block.shape[1] or rank_report(block, equilibrated=True).rank_at_tol < block.shape[0]:
        raise ValueError("pivot columns {0} do not form an invertible block".format(pivots))
    basis = np.zeros((matrix.shape[1], len(free)))
    basis[pivots, :] = -np.linalg.solve(block, matrix[:, free])
    basis[free, np.arange(len(free))] = 1.
    return basis


def lyapunov_surjectivity(K, tol=RANK_TOL, method="complex", h=FD_STEP):
    """
    Submersion of the four-step one-point map at x = (pi/2, pi) and surjectivity of the cocycle derivative
    restricted to its kernel, spanned by pivot_kernel_basis on (w_1^1, w_2^1).
    :return: SurjectivityReport with the 2x8 rank report, the rank report of M K (kernel basis product), the
    kernel basis used and the residual |D Phi K|.
    """
    K = check_kick(K)
    x, phases = surjectivity_point(K)
    step = scaled_fd_step(K, 4, h)
    phi = derivative(phase_map([x], K), phases.ravel(), method, h=step)
    kernel = pivot_kernel_basis(phi)
    product = derivative(cocycle_map(x, K), phases.ravel(), method, h=step).dot(kernel)
    residual = float(np.max(np.abs(phi.dot(kernel)))) / max(float(np.max(np.abs(phi))), 1e-300)
    return SurjectivityReport(rank_report(phi, tol), rank_report(product, tol), kernel, residual)


def cocycle_derivative(K, method="complex", h=FD_STEP):
    """The 4x8 derivative of the flattened cocycle at the surjectivity point."""
    x, phases = surjectivity_point(check_kick(K))
    return derivative(cocycle_map(x, K), phases.ravel(), method, h=scaled_fd_step(K, 4, h))


def projective_fixed_direction(K):
    """
    Expanding eigen direction of [[1, K], [1, 1 + K]] and its eigenvalue (2 + K + sqrt(K^2 + 4K)) / 2.
    :return: (TangentVector, eigenvalue)
    """
    K = check_kick(K)
    s = math.sqrt(K * K + 4. * K)
    first = 2. * K / (s + K)
    norm = math.hypot(first, 1.)
    return TangentVector(first / norm, 1. / norm), (2. + K + s) / 2.


def fixed_point_suite(K, tol=1e-10):
    """
    The three fixed-point facts at zero phases.
    :return: DataFrame with columns check, residual, passed
    """
    K = check_kick(K)
    zero = (0., 0.)
    origin = TorusPoint(0., 0.)
    partner = TorusPoint(0., math.pi)
    v, eigenvalue = projective_fixed_direction(K)
    image = jacobian(origin, zero, K).apply(v)
    norm = math.hypot(image.v1, image.v2)
    rows = [
        ("one-point", torus_dist(chirikov_step(origin, zero, K), origin)),
        ("two-point", max(torus_dist(chirikov_step(origin, zero, K), origin),
                          torus_dist(chirikov_step(partner, zero, K), partner))),
        ("projective", max(torus_dist(chirikov_step(origin, zero, K), origin),
                           math.hypot(image.v1 / norm - v.v1, image.v2 / norm - v.v2))),
        ("eigenvalue", math.hypot(image.v1 - eigenvalue * v.v1, image.v2 - eigenvalue * v.v2) / eigenvalue),
    ]
    table = pd.DataFrame(rows, columns=["check", "residual"])
    table["passed"] = table["residual"] <= tol
    return table


SMALLSET_EXPONENTS = collections.OrderedDict([
    ("radius_small_set", (-130., "radius of the small-set ball B(z*, K^-130)")),
    ("radius_measure", (-55., "radius of the minorizing measure's ball B(z*, K^-55)")),
    ("mass_small_set", (-764., "minorization constant c1(K) = K^-764")),
    ("mass_measure", (-288., "density of the minorizing measure K^-288")),
    ("mass_total", (-780., "assembled minorization mass K^-780")),
])


def smallset_constants(K, constants=None):
    """
    log10 of the small-set radii and masses with unit prefactors unless overridden.
    :param K: kick strength > 1.
    :param constants: optional mapping name -> prefactor.
    :return: OrderedDict name -> LogRate
    """
    K = check_kick(K)
    if K < 1:
        raise ValueError("'K' must be at least 1 for the small-set constants; got {0}".format(K))
    constants = constants or {}
    table = collections.OrderedDict()
    for name, (exponent, description) in SMALLSET_EXPONENTS.items():
        prefactor = float(constants.get(name, 1.))
        table[name] = LogRate(math.log10(prefactor) + exponent * math.log10(K),
                              "{0} (prefactor {1:g})".format(description, prefactor))
    return table


def volume_preservation(K_values=(4 * math.pi, 100.), samples=10 ** 6, stream=None, model="chirikov",
                        chunk=10 ** 5):
    """
    Largest |det D_x f_w - 1| and round-trip distance |inverse(f_w(x)) - x| over uniformly random (x, w) per kick.
    :param samples: draws per kick, taken in batches of chunk.
    :return: DataFrame with columns K, samples, max_det_error, max_round_trip
    """
    stream = stream if stream is not None else RngStreamSpec(0)
    rows = []
    for index, K in enumerate(K_values):
        K = check_kick(K)
        profile = get_model(model, K).profile
        generator = stream.child(index).generator()
        det_error, round_trip, done = 0., 0., 0
        while done < samples:
            size = min(chunk, samples - done)
            errors, distances = _round_trip_errors(uniform_angles(generator, (size, 2)),
                                                   uniform_angles(generator, (size, 2)), np.full(size, K), profile)
            det_error = max(det_error, float(errors.max()))
            round_trip = max(round_trip, float(distances.max()))
            done += size
        rows.append({"K": K, "samples": int(samples), "max_det_error": det_error, "max_round_trip": round_trip})
    return pd.DataFrame(rows)
