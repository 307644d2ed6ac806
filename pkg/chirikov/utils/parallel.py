import os
import collections
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from tqdm import tqdm

Moments = collections.namedtuple("Moments", ["count", "mean", "m2"])


def default_workers():
    return max(1, int(os.environ.get("CHIRIKOV_WORKERS", "1")))


def fan_out(function, tasks, workers=None, verbose=False, desc=None):
    """
    Evaluate function on every task and return the results in task order.
    The order of the results never depends on the number of workers.
    :param function: picklable module-level callable (or functools.partial of one).
    :param tasks: list of arguments.
    :param workers: process count; 1 runs in-process. Defaults to $CHIRIKOV_WORKERS.
    """
    tasks = list(tasks)
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(tasks) <= 1:
        iterator = tqdm(tasks, desc=desc) if verbose else tasks
        return [function(task) for task in iterator]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = pool.map(function, tasks)
        if verbose:
            results = tqdm(results, total=len(tasks), desc=desc)
        return list(results)


def moments(values):
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        return Moments(0, 0., 0.)
    mean = values.mean()
    return Moments(values.size, mean, float(np.sum((values - mean) ** 2)))


def merge_moments(left, right):
    """Combine the count, mean and sum of squared deviations of two disjoint blocks."""
    if left.count == 0:
        return right
    if right.count == 0:
        return left
    count = left.count + right.count
    delta = right.mean - left.mean
    mean = left.mean + delta * right.count / count
    m2 = left.m2 + right.m2 + delta ** 2 * left.count * right.count / count
    return Moments(count, mean, m2)


def reduce_moments(blocks):
    """Pairwise merge in a fixed order."""
    blocks = list(blocks)
    if not blocks:
        return Moments(0, 0., 0.)
    while len(blocks) > 1:
        merged = [merge_moments(blocks[i], blocks[i + 1]) for i in range(0, len(blocks) - 1, 2)]
        if len(blocks) % 2:
            merged.append(blocks[-1])
        blocks = merged
    return blocks[0]
