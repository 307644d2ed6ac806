import collections

import numpy as np

from chirikov.torus import TWO_PI, wrap_array


class RngStreamSpec(collections.namedtuple("RngStreamSpec", ["seed", "stream_id", "path"])):
    """
    Key of a counter-based random stream.
    Streams with different (seed, stream_id, path) are independent, identical keys replay identical draws.
    """
    __slots__ = ()

    def __new__(cls, seed, stream_id=0, path=()):
        seed, stream_id = int(seed), int(stream_id)
        if not 0 <= seed < 2 ** 64:
            raise ValueError("'seed' must be a 64-bit unsigned integer; got {0}".format(seed))
        if not 0 <= stream_id < 2 ** 64:
            raise ValueError("'stream_id' must be a 64-bit unsigned integer; got {0}".format(stream_id))
        return super(RngStreamSpec, cls).__new__(cls, seed, stream_id, tuple(int(index) for index in path))

    def child(self, index):
        return RngStreamSpec(self.seed, self.stream_id, self.path + (index,))

    def generator(self):
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,) + self.path)
        return np.random.Generator(np.random.Philox(sequence))


def uniform_angles(generator, shape):
    return wrap_array(generator.uniform(0., TWO_PI, size=shape))


def sample_phases(stream, n):
    """
    Draw n i.i.d. phase pairs uniform on [0, 2pi)^2.
    :param stream: RngStreamSpec.
    :param n: number of periods.
    :return: (n, 2) float array; row i is the phase applied at step i.
    """
    if n < 0:
        raise ValueError("'n' must be non-negative; got {0}".format(n))
    return uniform_angles(stream.generator(), (int(n), 2))
