'''
  @ Date: 2026/10/18 22:30
'''
import collections
import math
import warnings

import numba as nb
import numpy as np

from chirikov.processes import TwoPointState, ProjectiveState, propagate_two_point, log_norm_growth, as_phases
from chirikov.structure import lipschitz_probe
from chirikov.torus import (TWO_PI, LINEAR_PROFILE, TorusPoint, PhasePair, TangentVector, check_kick, wrap,
                            wrap_centered, torus_dist, horizontal_step, chirikov_step, chirikov_inverse, jacobian,
                            lifted_step, _wrap, _wrap_centered, _horizontal, _vertical)

ALIGN_TOLERANCE = 1e-10
SEARCH_CHUNK = 2 ** 20
MAX_DWELL_STEPS = 10 ** 8
DWELL_INCREMENT = 2. * math.sqrt(2.) * math.pi

ControlResult = collections.namedtuple("ControlResult", ["phases", "steps", "final_distance", "target_tolerance",
                                                         "success", "metadata"])
AlignedPairTarget = collections.namedtuple("AlignedPairTarget", ["xbar1", "xbar2", "branch"])


@nb.njit(cache=True)
def _dwell(x1, x2, w1_values, K, target2):
    """Steps with prescribed w1 whose w2 returns the angle coordinate to target2."""
    n = w1_values.shape[0]
    phases = np.empty((n, 2))
    for i in range(n):
        h1, h2 = _horizontal(x1, x2, w1_values[i], K)
        w2 = _wrap(h2 + h1 - target2)
        x1, x2 = _vertical(h1, h2, w2, K, LINEAR_PROFILE)
        phases[i, 0] = w1_values[i]
        phases[i, 1] = w2
    return phases, x1, x2


@nb.njit(cache=True)
def _aligned_step(x1, x2, y1, y2, K, xbar2):
    """
    One dwell step on the aligned family with feedback from both points.
    w1 sets the next offset a' = xbar2 - b, so the gap b' = b + a' lands on xbar2; w2 returns x2 to 0.
    On the family itself a' = 0 and x1 rotates by -K cos(xbar2 / 2).
    """
    a = _wrap_centered(y1 - x1)
    b = _wrap(y2 - x2)
    c = (_wrap_centered(xbar2 - b) - a) / (2. * K * math.sin(b / 2.))
    c = min(1., max(-1., c))
    w1 = _wrap(x2 + b / 2. + math.acos(c))
    h1, h2 = _horizontal(x1, x2, w1, K)
    w2 = _wrap(x2 + h1)
    x1, x2 = _vertical(h1, h2, w2, K, LINEAR_PROFILE)
    g1, g2 = _horizontal(y1, y2, w1, K)
    y1, y2 = _vertical(g1, g2, w2, K, LINEAR_PROFILE)
    return w1, w2, x1, x2, y1, y2


@nb.njit(cache=True)
def _aligned_dwell_count(x1, x2, y1, y2, K, xbar2, goal1, half_width, limit):
    """Number of feedback dwell steps until x1 is within half_width of goal1, or -1 past limit."""
    for n in range(limit + 1):
        if abs(_wrap_centered(x1 - goal1)) < half_width:
            return n
        _, _, x1, x2, y1, y2 = _aligned_step(x1, x2, y1, y2, K, xbar2)
    return -1


@nb.njit(cache=True)
def _aligned_dwell_phases(x1, x2, y1, y2, K, xbar2, count):
    phases = np.empty((count, 2))
    for i in range(count):
        w1, w2, x1, x2, y1, y2 = _aligned_step(x1, x2, y1, y2, K, xbar2)
        phases[i, 0] = w1
        phases[i, 1] = w2
    return phases


def _result(phases, final_distance, tolerance, metadata):
    phases = as_phases(phases)
    success = final_distance < tolerance
    if not success:
        warnings.warn(RuntimeWarning("control did not reach tolerance {0:g}: final distance {1:.3e} after {2} "
                                     "steps".format(tolerance, final_distance, len(phases))))
    return ControlResult(phases, len(phases), final_distance, tolerance, success, metadata)


def _first_hit(mask, limit, start=0):
    """Smallest n in [start, limit] with mask(n) true, or None."""
    while start <= limit:
        n = np.arange(start, min(limit, start + SEARCH_CHUNK - 1) + 1)
        hits = np.nonzero(mask(n))[0]
        if hits.size:
            return int(n[hits[0]])
        start += SEARCH_CHUNK
    return None


def one_point_exact(x, y, K):
    """
    Phase pair moving x to y in one step.
    sin(x2 - w1) = (y1 - x1) / K picks the principal arcsine branch; w2 = x2 + x1' - y2.
    :raise ValueError: when the nearest-lift increment y1 - x1 exceeds K.
    """
    K = check_kick(K)
    x, y = TorusPoint(*x), TorusPoint(*y)
    increment = wrap_centered(y.x1 - x.x1)
    if abs(increment) > K:
        raise ValueError("one step moves x1 by at most K = {0}; requested {1}".format(K, increment))
    w1 = wrap(x.x2 - math.asin(max(-1., min(1., increment / K))))
    moved = horizontal_step(x, w1, K)
    return PhasePair(w1, x.x2 + moved.x1 - y.x2)


def reachability_bound(s, eps, K=None):
    """floor(pi / s) + floor(12 pi / eps) + 4 steps."""
    if not s > 0 or not eps > 0:
        raise ValueError("'s' and 'eps' must be positive; got s={0}, eps={1}".format(s, eps))
    return int(math.floor(math.pi / s)) + int(math.floor(12. * math.pi / eps)) + 4


def aligned_target(K, branch="upper", xbar1=0.):
    """
    Aligned pair family: equal first coordinates, second coordinates 0 and xbar2 with K cos(xbar2 / 2) = -2 sqrt(2) pi.
    :param branch: 'upper' takes the root in (pi, 2pi); 'lower' takes 2pi minus it, which solves the constraint
    for the half angle lifted by pi and turns the dwell rotation the other way.
    """
    K = check_kick(K)
    if K < DWELL_INCREMENT:
        raise ValueError("aligned pairs need K >= 2 sqrt(2) pi = {0:.6f}; got {1}".format(DWELL_INCREMENT, K))
    if branch not in ("upper", "lower"):
        raise ValueError("'branch' must be 'upper' or 'lower'; '{0}' is not recognized".format(branch))
    xbar2 = 2. * math.acos(-DWELL_INCREMENT / K)
    if branch == "lower":
        xbar2 = TWO_PI - xbar2
    return AlignedPairTarget(wrap(xbar1), xbar2, branch)


def constraint_residual(target, K):
    """|K cos(xbar2 / 2) + 2 sqrt(2) pi| with the half angle taken in the lift that belongs to the branch."""
    half = target.xbar2 / 2. + (math.pi if target.branch == "lower" else 0.)
    return abs(K * math.cos(half) + DWELL_INCREMENT)


def dense_rotation_net(eps):
    """True when {n sqrt(2) mod 1 : 1 <= n <= floor(3 / eps) + 1} is an eps-net of the circle [0, 1)."""
    if not eps > 0:
        raise ValueError("'eps' must be positive; got {0}".format(eps))
    n = np.arange(1, int(math.floor(3. / eps)) + 2)
    points = np.sort(np.mod(n * math.sqrt(2.), 1.))
    gaps = np.diff(np.concatenate([points, [points[0] + 1.]]))
    return bool(np.max(gaps) <= 2. * eps)


def two_point_distance(z, w):
    return math.hypot(torus_dist(z[0], w[0]), torus_dist(z[1], w[1]))


def _difference(x, y):
    return wrap_centered(y[0] - x[0]), wrap(y[1] - x[1])


def _gain(K, b):
    return 2. * K * math.sin(b / 2.)


def _rational_plan(a, gain, max_period):
    """First period l with an odd multiple (2k + 1) pi / l within reach of a."""
    for period in range(1, max_period + 1):
        k = round((a * period / math.pi - 1.) / 2.)
        level = (2 * k + 1) * math.pi / period
        if abs(wrap_centered(level - a)) <= gain:
            return level, period
    return None


def _forward_control(x, y, K, c):
    """Common step changing a = y1 - x1 by c * 2K sin(b / 2) and returning x2 to 0."""
    _, b = _difference(x, y)
    w1 = wrap(x[1] + b / 2. + math.acos(max(-1., min(1., c))))
    moved = horizontal_step(x, w1, K)
    w = PhasePair(w1, x[1] + moved.x1)
    return w, chirikov_step(x, w, K), chirikov_step(y, w, K)


def _backward_control(x, y, K, c):
    """Inverse step changing a by -c * 2K sin(b' / 2), b' = b - a, and placing x2 at 0."""
    w2 = wrap(x[0] - x[1])
    a, b = _difference(x, y)
    w1 = wrap(wrap(x[1] - x[0] + w2) + wrap(b - a) / 2. + math.acos(max(-1., min(1., c))))
    w = PhasePair(w1, w2)
    return w, chirikov_inverse(x, w, K), chirikov_inverse(y, w, K)


def _escape(x, y, K, budget, backward):
    """
    Steps until the controllable gain reaches pi.
    A neutral step (c = 0) shifts b by a; when that stops helping, a is set to an odd multiple (2k + 1) pi / l
    and l - 1 neutral steps carry b to b + pi.
    """
    phases = []
    remaining = 0
    control = _backward_control if backward else _forward_control
    while True:
        a, b = _difference(x, y)
        pivot = wrap(b - a) if backward else b
        gain = _gain(K, pivot)
        if gain >= math.pi:
            return phases, x, y, True
        if len(phases) >= budget:
            return phases, x, y, False
        following = wrap(pivot - a) if backward else wrap(b + a)
        if remaining > 0:
            c = 0.
            remaining -= 1
        elif gain < _gain(K, following):
            c = 0.
        elif gain == 0.:
            return phases, x, y, False
        else:
            plan = _rational_plan(a, gain, budget - len(phases))
            if plan is None:
                return phases, x, y, False
            level, period = plan
            c = wrap_centered(level - a) / gain
            if backward:
                c = -c
            remaining = period - 1
        w, x, y = control(x, y, K, c)
        phases.append(w)


def _align(x, y, K, target, budget, backward):
    phases, x, y, ok = _escape(x, y, K, budget, backward)
    escape_steps = len(phases)
    if not ok:
        return phases, x, y, escape_steps, False
    for stage in range(2):
        a, b = _difference(x, y)
        pivot = wrap(b - a) if backward else b
        if stage == 0:
            goal = wrap_centered(pivot - target.xbar2) if backward else wrap_centered(target.xbar2 - b)
        else:
            goal = 0.
        c = wrap_centered(goal - a) / _gain(K, pivot)
        w, x, y = (_backward_control if backward else _forward_control)(x, y, K, -c if backward else c)
        phases.append(w)
    return phases, x, y, escape_steps, True


def _alignment_residual(z, target):
    x, y = z
    return max(abs(wrap_centered(y[0] - x[0])), abs(wrap_centered(x[1])), abs(wrap_centered(y[1] - target.xbar2)))


def two_point_align(z, K, branch="upper", budget=None):
    """
    Drive a two-point state onto the aligned family a = 0, x2 = 0, y2 = xbar2.
    :param z: TwoPointState (or pair of points).
    :param K: kick strength, at least 4 pi.
    :return: ControlResult with metadata['state'] the aligned state and metadata['xbar2'].
    """
    K = check_kick(K)
    if K < 4. * math.pi:
        raise ValueError("two-point control needs K >= 4 pi; got {0}".format(K))
    z = TwoPointState(*z)
    target = aligned_target(K, branch)
    if budget is None:
        budget = 4 * (int(math.floor(math.pi / z.separation())) + 4)
    phases, x, y, escape_steps, ok = _align(z.x, z.y, K, target, budget, backward=False)
    state = propagate_two_point(z, phases, K)
    residual = _alignment_residual(state, target)
    if not ok:
        residual = max(residual, 1.)
    return _result(phases, residual, ALIGN_TOLERANCE, {"state": state, "xbar2": target.xbar2,
                                                       "escape_steps": escape_steps,
                                                       "direct": escape_steps == 0})


def _tail_lipschitz(tail, K, anchor):
    if len(tail) == 0:
        return 1.

    def function(flat):
        x, y = flat[:2], flat[2:]
        for w in tail:
            x = lifted_step(x, w, K)
            y = lifted_step(y, w, K)
        return np.concatenate([x, y])

    return max(1., lipschitz_probe(function, np.array([anchor[0][0], anchor[0][1], anchor[1][0], anchor[1][1]])))


def _two_point_dwell(state, goal_x1, K, target, eps0):
    """
    Dwell phases on the aligned family until x1 sits within eps0 / 2 of goal_x1.
    The family is hyperbolic transversally, so every step re-solves the alignment from the current pair; replaying
    the phases with propagate_two_point reproduces the same arithmetic.
    :return: (n, 2) phases, or None when more than 12 pi / eps0 steps would be needed.
    """
    limit = int(math.floor(12. * math.pi / eps0)) + 1
    if limit > MAX_DWELL_STEPS:
        return None
    (x1, x2), (y1, y2) = state
    args = (float(x1), float(x2), float(y1), float(y2), float(K), float(target.xbar2))
    count = _aligned_dwell_count(*(args + (float(goal_x1), eps0 / 2., limit)))
    if count < 0:
        return None
    return _aligned_dwell_phases(*(args + (count,)))


def two_point_reach(z, z_target, eps, K, branch="upper", refinements=4):
    """
    Steer a two-point state into the eps-ball of a target.
    Pipeline: forward alignment of z, dense-rotation dwell on the aligned family, then the target's own backward
    alignment replayed forward. The dwell sub-tolerance is eps0 = eps / (2 L') with L' the measured Lipschitz
    constant of that tail; it is quartered and the run repeated while the replayed distance misses eps.
    :return: ControlResult; on budget exhaustion the best attempt with success False.
    """
    K = check_kick(K)
    if K < 4. * math.pi:
        raise ValueError("two-point control needs K >= 4 pi; got {0}".format(K))
    if not eps > 0:
        raise ValueError("'eps' must be positive; got {0}".format(eps))
    z, z_target = TwoPointState(*z), TwoPointState(*z_target)
    if two_point_distance(z, z_target) < eps:
        return _result(np.zeros((0, 2)), two_point_distance(z, z_target), eps, {"eps0": None, "dwell_steps": 0})
    target = aligned_target(K, branch)
    separation = min(z.separation(), z_target.separation())
    align_budget = 4 * (int(math.floor(math.pi / separation)) + 4)

    back, xb, yb, _, ok_back = _align(z_target.x, z_target.y, K, target, align_budget, backward=True)
    forward, xf, yf, _, ok_forward = _align(z.x, z.y, K, target, align_budget, backward=False)
    if not ok_back or not ok_forward:
        phases = as_phases(forward)
        return _result(phases, two_point_distance(propagate_two_point(z, phases, K), z_target), eps,
                       {"eps0": None, "dwell_steps": 0, "stage": "alignment"})
    tail = as_phases(back[::-1])
    aligned = propagate_two_point(z, forward, K)
    anchor = TwoPointState._make((xb, yb))
    lipschitz = _tail_lipschitz(tail, K, anchor)
    eps0 = eps / (2. * lipschitz)
    best = None
    for _ in range(refinements):
        budget = 4 * reachability_bound(separation, eps0)
        dwell = _two_point_dwell(aligned, xb[0], K, target, eps0)
        if dwell is not None and len(forward) + len(dwell) + len(tail) <= budget:
            phases = np.concatenate([as_phases(forward), dwell, tail])
            distance = two_point_distance(propagate_two_point(z, phases, K), z_target)
            metadata = {"eps0": eps0, "dwell_steps": len(dwell), "lipschitz": lipschitz,
                        "dwell_bound": int(math.floor(12. * math.pi / eps0)) + 1, "budget": budget}
            if best is None or distance < best[1]:
                best = (phases, distance, metadata)
            if distance < eps:
                break
        eps0 /= 4.
    if best is None:
        phases = as_phases(forward)
        return _result(phases, two_point_distance(propagate_two_point(z, phases, K), z_target), eps,
                       {"eps0": eps0, "dwell_steps": 0, "stage": "dwell"})
    return _result(best[0], best[1], eps, best[2])


def projective_distance(s, t):
    """Torus distance of the base points plus the chordal distance of the unit directions."""
    return torus_dist(s[0], t[0]) + math.hypot(s[1][0] - t[1][0], s[1][1] - t[1][1])


def _normalized(v1, v2):
    norm = math.hypot(v1, v2)
    return TangentVector(v1 / norm, v2 / norm)


def tangent_alignment(x, v, K, budget=10 ** 6):
    """
    Inverse-dynamics steps turning a tangent direction to (0, +-1).
    Steps with cos(x2 - x1 + w2 - w1) = 0 act on the direction by [[1, 0], [-1, 1]]; once
    |w1| <= K |w2 - w1| the step with cos = w1 / (K (w2 - w1)) zeroes the first coordinate.
    :return: (phases in backward order, final TorusPoint, final unit TangentVector)
    """
    K = check_kick(K)
    x = TorusPoint(*x)
    v = _normalized(*v)
    phases = []
    while v.v1 != 0.:
        if len(phases) >= budget:
            raise ArithmeticError("tangent alignment did not terminate within {0} steps".format(budget))
        gap = K * (v.v2 - v.v1)
        c = v.v1 / gap if gap != 0. else math.inf
        solve = abs(c) <= 1.
        w1 = wrap(x.x2 - x.x1 - math.acos(c if solve else 0.))
        w = PhasePair(w1, 0.)
        cosine = math.cos(x.x2 - x.x1 + w.w2 - w.w1)
        moved = ((1. + K * cosine) * v.v1 - K * cosine * v.v2, v.v2 - v.v1)
        x = chirikov_inverse(x, w, K)
        v = TangentVector(0., math.copysign(1., moved[1])) if solve else _normalized(*moved)
        phases.append(w)
        if solve:
            break
    return phases, x, v


def _sine_step_phases(x, signs, K):
    """Dwell steps with sin(x2 - w1) = +-1 that keep x2 fixed."""
    w1_values = np.array([wrap(x[1] - sign * math.pi / 2.) for sign in signs])
    phases, x1, x2 = _dwell(x[0], x[1], w1_values, K, x[1])
    return phases, TorusPoint(x1, x2)


def _flip(x, v, K):
    """Step with cos(x2 - w1) = -1: x stays put and the direction maps by [[1, -K], [1, 1 - K]]."""
    w1 = wrap(x.x2 - math.pi)
    w = PhasePair(w1, horizontal_step(x, w1, K).x1)
    return w, chirikov_step(x, w, K), _normalized(*jacobian(x, w, K).apply(v))


def _flip_ready(v, K):
    return K * v.v2 < v.v1 - K * abs(v.v1)


def _forward_tangent(x, v, xbar, K, eps0, strategy, budget):
    """
    Forward steering of (x, v) to (xbar, (0, 1)) within eps0 / 2 in each component.
    An exact one-point step lands on xbar. A direction pointing the wrong way is pushed by parabolic steps
    (sin(x2 - w1) = +-1, acting by [[1, 0], [1, 1]]) until K v2 < v1 - K |v1| and then flipped into the open
    positive quadrant; parabolic dwell steps finally straighten it towards (0, 1).
    :return: (n, 2) phases, or None when the budget is exceeded.
    """
    phases = []
    w = one_point_exact(x, xbar, K)
    v = _normalized(*jacobian(x, w, K).apply(v))
    x = chirikov_step(x, w, K)
    phases.append(np.array([w]))
    if v.v1 < 0. < v.v2:
        w, x, v = _flip(x, v, K)
        phases.append(np.array([w]))
    if v.v1 < 0. or (v.v1 == 0. and v.v2 < 0.) or _flip_ready(v, K):
        if not _flip_ready(v, K):
            # (v1, v2 + n v1) after n parabolic steps, v1 < 0 here
            count = int(math.floor(((1. + 1. / K) * v.v1 - v.v2) / v.v1)) + 1
            if strategy == "alternating":
                count += count % 2
            if count > budget:
                return None
            signs = [1. if (strategy == "dense" or i % 2 == 0) else -1. for i in range(count)]
            dwell, x = _sine_step_phases(x, signs, K)
            v = _normalized(v.v1, v.v2 + count * v.v1)
            phases.append(dwell)
        w, x, v = _flip(x, v, K)
        phases.append(np.array([w]))

    def direction_error(n):
        tail = v.v2 + n * v.v1
        norm = np.hypot(v.v1, tail)
        return np.hypot(v.v1 / norm, tail / norm - 1.)

    limit = min(budget - sum(len(block) for block in phases), MAX_DWELL_STEPS)
    if strategy == "alternating":
        count = _first_hit(lambda n: (direction_error(n) < eps0 / 2.) & (n % 2 == 0), limit)
        signs = [1. if i % 2 == 0 else -1. for i in range(count or 0)]
    else:
        offset = x.x1 - xbar[0]
        count = _first_hit(lambda n: (direction_error(n) < eps0 / 2.)
                           & (np.abs(np.remainder(offset + n * K + math.pi, TWO_PI) - math.pi) < eps0 / 2.), limit)
        signs = [1.] * (count or 0)
    if count is None:
        return None
    if count:
        dwell, x = _sine_step_phases(x, signs, K)
        phases.append(dwell)
    return np.concatenate(phases)


def _projective_tail_lipschitz(tail, K, anchor):
    if len(tail) == 0:
        return 1.

    def function(flat):
        x, u = flat[:2], flat[2:]
        for w in tail:
            c = K * math.cos(x[1] - w[0])
            u = np.array([u[0] + c * u[1], u[0] + (1. + c) * u[1]])
            x = lifted_step(x, w, K)
        return np.concatenate([x, u / np.hypot(u[0], u[1])])

    return max(1., lipschitz_probe(function, np.array([anchor[0][0], anchor[0][1], anchor[1][0], anchor[1][1]])))


def projective_steer(s, target, eps, K, strategy="dense", refinements=4):
    """
    Steer a projective state (x, v) into the eps-ball of a target on the torus times the circle.
    The target is first walked backward until its direction is (0, sigma); the start is steered forward to that
    point with direction sigma * (0, 1) (linearity of the cocycle handles sigma), and the backward phases are
    replayed in reverse order.
    :param strategy: 'dense' (parabolic dwell at a single kick sign, relying on the rotation n K mod 2pi) or
    'alternating' (kicks of alternating sign, which return x1 exactly every two steps).
    :return: ControlResult
    """
    K = check_kick(K)
    if K < math.pi:
        raise ValueError("projective steering needs K >= pi; got {0}".format(K))
    if strategy not in ("dense", "alternating"):
        raise ValueError("'strategy' must be 'dense' or 'alternating'; '{0}' is not recognized".format(strategy))
    if not eps > 0:
        raise ValueError("'eps' must be positive; got {0}".format(eps))
    s, target = ProjectiveState(*s), ProjectiveState(*target)
    if projective_distance(s, target) < eps:
        return _result(np.zeros((0, 2)), projective_distance(s, target), eps, {"eps0": None, "strategy": strategy})
    back, xbar, direction = tangent_alignment(target.x, target.v, K)
    sigma = direction.v2
    tail = as_phases(back[::-1])
    eps0 = eps / (2. * _projective_tail_lipschitz(tail, K, (xbar, direction)))
    start_v = TangentVector(sigma * s.v.v1, sigma * s.v.v2)
    best = None
    for _ in range(refinements):
        budget = 4 * reachability_bound(math.pi, eps0)
        forward = _forward_tangent(s.x, start_v, xbar, K, eps0, strategy, budget)
        if forward is not None:
            phases = np.concatenate([forward, tail])
            state, _ = log_norm_growth(s.x, s.v, phases, K)
            distance = projective_distance(state, target)
            metadata = {"eps0": eps0, "strategy": strategy, "sigma": sigma, "tail_steps": len(tail),
                        "case": "irrational" if strategy == "dense" else "exact-return"}
            if best is None or distance < best[1]:
                best = (phases, distance, metadata)
            if distance < eps:
                break
        eps0 /= 4.
    if best is None:
        return _result(np.zeros((0, 2)), projective_distance(s, target), eps, {"eps0": eps0, "strategy": strategy})
    return _result(best[0], best[1], eps, best[2])
