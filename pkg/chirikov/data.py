import os
import json
import hashlib

import numpy as np
import pandas as pd
import tables

from chirikov.transport import NORMALIZATION, GridSpec, SpectralField

SNAPSHOT_MAGIC = b"CHRKSNAP"
TAG_BYTES = 16


def file_digest(path, chunk=1 << 20):
    """sha256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as opened_file:
        for block in iter(lambda: opened_file.read(chunk), b""):
            digest.update(block)
    return digest.hexdigest()


def write_json(item, out_file):
    with open(out_file, "w") as opened_file:
        json.dump(item, opened_file, indent=2, sort_keys=True, default=_json_default)
    return out_file


def read_json(in_file):
    with open(in_file, "r") as opened_file:
        return json.load(opened_file)


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if hasattr(value, "_asdict"):
        return value._asdict()
    raise TypeError("object of type {0} is not JSON serializable".format(type(value).__name__))


def write_csv(frame, out_file):
    """CSV with a fixed float format so that equal tables give equal bytes."""
    frame.to_csv(out_file, index=False, float_format="%.17g")
    return out_file


def create_series_file(out_file, n_points, n_series):
    hdf5_file = tables.open_file(out_file, mode='w')
    filters = tables.Filters(complevel=5, complib='blosc')
    series_storage = hdf5_file.create_earray(hdf5_file.root, 'series', tables.Float64Atom(), shape=(0, n_points),
                                             filters=filters, expectedrows=n_series)
    return hdf5_file, series_storage


def write_series_to_file(series, out_file, labels=None, attributes=None):
    """
    Store equal-length series as rows of an extendable HDF5 array.
    :param series: iterable of 1-d arrays (e.g. one norm series per realization).
    :param out_file: Where the hdf5 file will be written to.
    :param labels: optional per-row integer labels (realization indices).
    :param attributes: optional scalars stamped on the root node (normalization tag, config digest, ...).
    :return: out_file
    """
    series = [np.asarray(row, dtype=np.float64) for row in series]
    try:
        hdf5_file, series_storage = create_series_file(out_file, n_points=series[0].size, n_series=len(series))
    except Exception as e:
        # If something goes wrong, delete the incomplete data file
        if os.path.exists(out_file):
            os.remove(out_file)
        raise e

    try:
        for row in series:
            series_storage.append(row[np.newaxis])
        if labels is not None:
            hdf5_file.create_array(hdf5_file.root, 'labels', obj=np.asarray(labels, dtype=np.int64))
        for key, value in (attributes or {}).items():
            hdf5_file.root._v_attrs[key] = value
    except Exception as e:
        hdf5_file.close()
        os.remove(out_file)
        raise e
    hdf5_file.close()
    return out_file


def open_data_file(filename, readwrite="r"):
    return tables.open_file(filename, readwrite)


def read_series_file(filename):
    """:return: (series array, labels or None, dict of root attributes)"""
    hdf5_file = open_data_file(filename)
    try:
        series = hdf5_file.root.series[:]
        labels = hdf5_file.root.labels[:] if "labels" in hdf5_file.root else None
        attrs = hdf5_file.root._v_attrs
        attributes = {key: attrs[key] for key in attrs._f_list("user")}
    finally:
        hdf5_file.close()
    return series, labels, attributes


def save_snapshot(field, out_file, metadata=None):
    """
    Flat binary snapshot of a spectral field: magic, little-endian uint32 n, a 16-byte normalization tag, then the
    n x n complex128 amplitudes row-major. A JSON sidecar (out_file + '.json') carries metadata and the digest.
    """
    tag = NORMALIZATION.encode("ascii").ljust(TAG_BYTES, b"\0")
    with open(out_file, "wb") as opened_file:
        opened_file.write(SNAPSHOT_MAGIC)
        opened_file.write(np.array([field.grid.n], dtype="<u4").tobytes())
        opened_file.write(tag)
        opened_file.write(np.ascontiguousarray(field.amplitudes, dtype="<c16").tobytes())
    sidecar = dict(metadata or {})
    sidecar.update({"n": field.grid.n, "normalization": NORMALIZATION, "mean_zero": bool(field.mean_zero),
                    "sha256": file_digest(out_file)})
    write_json(sidecar, out_file + ".json")
    return out_file


def load_snapshot(in_file, dealias=True):
    """:return: (SpectralField, sidecar metadata dict or {} when absent)"""
    with open(in_file, "rb") as opened_file:
        payload = opened_file.read()
    if payload[:len(SNAPSHOT_MAGIC)] != SNAPSHOT_MAGIC:
        raise ValueError("{0} is not a field snapshot".format(in_file))
    offset = len(SNAPSHOT_MAGIC)
    n = int(np.frombuffer(payload, dtype="<u4", count=1, offset=offset)[0])
    offset += 4
    tag = payload[offset:offset + TAG_BYTES].rstrip(b"\0").decode("ascii")
    if tag != NORMALIZATION:
        raise ValueError("snapshot normalization '{0}' differs from '{1}'".format(tag, NORMALIZATION))
    offset += TAG_BYTES
    amplitudes = np.frombuffer(payload, dtype="<c16", count=n * n, offset=offset).reshape(n, n)
    metadata = read_json(in_file + ".json") if os.path.exists(in_file + ".json") else {}
    mean_zero = metadata.get("mean_zero", abs(amplitudes[0, 0]) == 0.)
    return SpectralField(GridSpec(n, dealias), amplitudes.astype(np.complex128), mean_zero=mean_zero), metadata


def read_csv(in_file):
    return pd.read_csv(in_file)
