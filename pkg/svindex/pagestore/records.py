import struct
from typing import List, Tuple

import numpy as np

from svindex.core.exceptions import FormatError
from svindex.core.geo_image import GeoDataset
from svindex.pagestore.record_file import RecordFile, RecordPointer
from svindex.pagestore.store import PageStore

SPATIAL_FILE = "spatial.data"
VISUAL_FILE = "visual.data"

SPATIAL_FMT = "<I2d"
SPATIAL_SIZE = struct.calcsize(SPATIAL_FMT)
ORDINAL_FMT = "<I"
ORDINAL_SIZE = struct.calcsize(ORDINAL_FMT)


def visual_record_size(dim: int) -> int:
    return ORDINAL_SIZE + 8 * dim


def encode_spatial(ordinal: int, s: np.ndarray) -> bytes:
    return struct.pack(SPATIAL_FMT, ordinal, float(s[0]), float(s[1]))


def decode_spatial(payload: bytes) -> Tuple[int, Tuple[float, float]]:
    if len(payload) != SPATIAL_SIZE:
        raise FormatError(f"decode_spatial: expected {SPATIAL_SIZE} bytes, got {len(payload)}")
    ordinal, x, y = struct.unpack(SPATIAL_FMT, payload)
    return ordinal, (x, y)


def encode_visual(ordinal: int, v: np.ndarray) -> bytes:
    return struct.pack(ORDINAL_FMT, ordinal) + np.asarray(v, dtype="<f8").tobytes()


def decode_visual(payload: bytes) -> Tuple[int, np.ndarray]:
    if len(payload) < ORDINAL_SIZE + 8 or (len(payload) - ORDINAL_SIZE) % 8:
        raise FormatError(f"decode_visual: malformed record of {len(payload)} bytes")
    (ordinal,) = struct.unpack_from(ORDINAL_FMT, payload, 0)
    return ordinal, np.frombuffer(payload, dtype="<f8", offset=ORDINAL_SIZE).astype(np.float64)


def write_data_files(store: PageStore, dataset: GeoDataset) -> Tuple[List[RecordPointer], List[RecordPointer]]:
    """
    Appends one spatial and one visual record per image, in dataset order.

    Returns:
    tuple: (spatial pointers, visual pointers), both indexed by ordinal.
    """
    spatial_file: RecordFile = store.create_file(SPATIAL_FILE)
    visual_file: RecordFile = store.create_file(VISUAL_FILE)
    spatial_ptrs = []
    visual_ptrs = []
    for ordinal, image in enumerate(dataset):
        spatial_ptrs.append(spatial_file.append(encode_spatial(ordinal, image.s)))
        visual_ptrs.append(visual_file.append(encode_visual(ordinal, image.v)))
    return spatial_ptrs, visual_ptrs
