"""NPY v1.0 array files and small JSON/CSV helpers.

Only little-endian float32/float64/complex64/complex128 (plus uint8 for
sampling masks) C-ordered arrays are accepted. Header parsing and emission go
through :mod:`numpy.lib.format`, pinned to version 1.0.
"""

import json
import os

import numpy as np
from numpy.lib import format as npformat

from ._exceptions import NpyFormatError, UnsupportedDtypeError

SUPPORTED_DTYPES = (
    np.dtype("<f4"),
    np.dtype("<f8"),
    np.dtype("<c8"),
    np.dtype("<c16"),
    np.dtype("u1"),
)


def _check_dtype(dtype):
    dtype = np.dtype(dtype)
    if dtype not in SUPPORTED_DTYPES:
        raise UnsupportedDtypeError(f"unsupported dtype {dtype.str!r}")
    return dtype


def read_npy(path):
    """Read an NPY v1.0 file.

    Parameters
    ----------
    path : str or os.PathLike

    Returns
    -------
    numpy.ndarray
        Array with the stored dtype and shape.

    Raises
    ------
    NpyFormatError
        Bad magic string, wrong version, malformed header, fortran order or
        truncated data.
    UnsupportedDtypeError
        Big-endian or otherwise unsupported element type.
    """
    with open(path, "rb") as fh:
        try:
            version = npformat.read_magic(fh)
        except ValueError as exc:
            raise NpyFormatError(f"{path}: {exc}") from None
        if version != (1, 0):
            raise NpyFormatError(f"{path}: NPY version {version} not supported, need 1.0")
        try:
            shape, fortran_order, dtype = npformat.read_array_header_1_0(fh)
        except ValueError as exc:
            raise NpyFormatError(f"{path}: {exc}") from None
        if fortran_order:
            raise NpyFormatError(f"{path}: fortran-ordered arrays are not supported")
        dtype = _check_dtype(dtype)
        count = int(np.prod(shape, dtype=np.int64))
        data = fh.read(count * dtype.itemsize)
    if len(data) != count * dtype.itemsize:
        raise NpyFormatError(
            f"{path}: expected {count * dtype.itemsize} data bytes, found {len(data)}"
        )
    return np.frombuffer(data, dtype=dtype, count=count).reshape(shape).copy()


def write_npy(array, path):
    """Write ``array`` as an NPY v1.0 file with a 64-byte aligned header."""
    arr = np.asarray(array)
    if arr.dtype.byteorder == ">":
        raise UnsupportedDtypeError("big-endian arrays are not supported")
    _check_dtype(arr.dtype)
    if not arr.flags.c_contiguous:
        arr = arr.copy(order="C")
    with open(path, "wb") as fh:
        npformat.write_array(fh, arr, version=(1, 0), allow_pickle=False)


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
