"""Volume and lesion-mask I/O: single-file NIfTI-1 reading/writing, isotropic
resampling, and splitting a labelled mask into per-lesion voxel regions.

Volumes are held as (x, y, z)-indexed float64 arrays of Hounsfield units with
physical voxel spacing in mm.  Only the geometry-bearing header fields are
honoured (dim, pixdim, datatype, scl_slope/scl_inter, vox_offset, qoffset);
orientation matrices are ignored.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ClassMapError, GeometryError, MaskError, NiftiFormatError, UnsupportedDataTypeError

HEADER_SIZE = 348

# NIfTI-1 datatype code -> numpy dtype (unscaled on-disk type)
_DTYPES = {
    2: np.uint8,
    4: np.int16,
    8: np.int32,
    16: np.float32,
    64: np.float64,
}
_DTYPE_CODES = {np.dtype(v): k for k, v in _DTYPES.items()}


@dataclass
class VoxelVolume:
    """A 3D scalar grid (HU) with physical spacing and origin in mm."""

    data: np.ndarray
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 3:
            raise ValueError(f"volume data must be 3D, got shape {self.data.shape}")
        self.spacing = tuple(float(s) for s in self.spacing)
        self.origin = tuple(float(o) for o in self.origin)
        if any(s <= 0 for s in self.spacing):
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if not np.isfinite(self.data).all():
            raise ValueError("volume contains non-finite values")

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape


@dataclass
class LesionMask:
    """Integer-labelled grid aligned to a volume; label 0 is background."""

    labels: np.ndarray
    spacing: tuple[float, float, float]
    class_of_label: dict[int, int] = field(default_factory=dict)
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        self.labels = np.asarray(self.labels)
        if not np.issubdtype(self.labels.dtype, np.integer):
            raise MaskError(f"mask labels must be integers, got dtype {self.labels.dtype}")
        if self.labels.ndim != 3:
            raise ValueError(f"mask labels must be 3D, got shape {self.labels.shape}")
        if self.labels.min() < 0:
            raise MaskError("mask labels must be non-negative")
        self.spacing = tuple(float(s) for s in self.spacing)
        self.origin = tuple(float(o) for o in self.origin)
        if any(s <= 0 for s in self.spacing):
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        self.class_of_label = {int(k): int(v) for k, v in self.class_of_label.items()}
        for label, cls in self.class_of_label.items():
            if cls not in (1, 2, 3):
                raise ValueError(f"class id for label {label} must be 1, 2 or 3, got {cls}")
        present = {int(lbl) for lbl in np.unique(self.labels)} - {0}
        missing = sorted(present - set(self.class_of_label))
        if missing:
            raise ClassMapError(f"mask labels {missing} missing from the label-to-class map")

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.labels.shape


@dataclass
class LesionRegion:
    """Voxel coordinates and intensities of a single annotated lesion."""

    coordinates: np.ndarray  # (n, 3) integer voxel indices
    intensities: np.ndarray  # (n,) HU values at those voxels
    spacing: tuple[float, float, float]
    label: int = 0

    def __post_init__(self):
        self.coordinates = np.asarray(self.coordinates, dtype=np.intp)
        self.intensities = np.asarray(self.intensities, dtype=np.float64)
        if self.coordinates.ndim != 2 or self.coordinates.shape[1] != 3:
            raise ValueError("coordinates must be an (n, 3) index array")
        if len(self.coordinates) == 0:
            raise ValueError("a lesion region cannot be empty")
        if len(self.intensities) != len(self.coordinates):
            raise ValueError("coordinates and intensities length mismatch")
        self.spacing = tuple(float(s) for s in self.spacing)

    def __len__(self) -> int:
        return len(self.coordinates)


def _parse_header(raw: bytes, path) -> dict:
    if len(raw) < HEADER_SIZE:
        raise NiftiFormatError(f"{path}: file too short for a NIfTI-1 header")
    for order in ("<", ">"):
        (sizeof_hdr,) = struct.unpack(order + "i", raw[0:4])
        if sizeof_hdr == HEADER_SIZE:
            break
    else:
        raise NiftiFormatError(f"{path}: sizeof_hdr is not 348 in either byte order")
    magic = raw[344:348]
    if magic[:3] != b"n+1":
        raise NiftiFormatError(f"{path}: bad magic {magic!r}; only single-file NIfTI-1 ('n+1') is supported")
    dim = struct.unpack(order + "8h", raw[40:56])
    pixdim = struct.unpack(order + "8f", raw[76:108])
    (datatype,) = struct.unpack(order + "h", raw[70:72])
    (bitpix,) = struct.unpack(order + "h", raw[72:74])
    (vox_offset,) = struct.unpack(order + "f", raw[108:112])
    (scl_slope,) = struct.unpack(order + "f", raw[112:116])
    (scl_inter,) = struct.unpack(order + "f", raw[116:120])
    qoffset = struct.unpack(order + "3f", raw[268:280])

    ndim = dim[0]
    if ndim < 3 or ndim > 7:
        raise NiftiFormatError(f"{path}: dim[0]={ndim} outside 3..7")
    if any(d > 1 for d in dim[4 : 1 + ndim]):
        raise NiftiFormatError(f"{path}: only 3D images are supported, got dim={dim[: 1 + ndim]}")
    dims = dim[1:4]
    if any(d < 1 for d in dims):
        raise NiftiFormatError(f"{path}: non-positive dims {dims}")
    spacing = pixdim[1:4]
    if any(not np.isfinite(s) or s <= 0 for s in spacing):
        raise NiftiFormatError(f"{path}: non-positive pixdim {spacing}")
    if datatype not in _DTYPES:
        raise UnsupportedDataTypeError(f"{path}: unsupported NIfTI datatype code {datatype}")
    expected_bitpix = np.dtype(_DTYPES[datatype]).itemsize * 8
    if bitpix != expected_bitpix:
        raise NiftiFormatError(f"{path}: bitpix {bitpix} inconsistent with datatype {datatype}")
    offset = int(vox_offset)
    if offset < HEADER_SIZE:
        raise NiftiFormatError(f"{path}: vox_offset {vox_offset} below header size")
    return {
        "order": order,
        "dims": tuple(int(d) for d in dims),
        "spacing": tuple(float(s) for s in spacing),
        "origin": tuple(float(q) for q in qoffset),
        "datatype": datatype,
        "vox_offset": offset,
        "scl_slope": float(scl_slope),
        "scl_inter": float(scl_inter),
    }


def _read_nifti(path) -> tuple[dict, np.ndarray]:
    """Read a single-file NIfTI-1 image into an (x, y, z) array, rescale applied."""
    with open(path, "rb") as fh:
        raw = fh.read()
    hdr = _parse_header(raw, path)
    dims = hdr["dims"]
    dtype = np.dtype(_DTYPES[hdr["datatype"]]).newbyteorder(hdr["order"])
    n_voxels = dims[0] * dims[1] * dims[2]
    start = hdr["vox_offset"]
    end = start + n_voxels * dtype.itemsize
    if len(raw) < end:
        raise NiftiFormatError(
            f"{path}: payload truncated ({len(raw) - start} bytes, need {n_voxels * dtype.itemsize})"
        )
    flat = np.frombuffer(raw, dtype=dtype, count=n_voxels, offset=start)
    data = flat.reshape(dims, order="F").astype(np.float64)
    slope = hdr["scl_slope"] if hdr["scl_slope"] != 0.0 else 1.0
    if slope != 1.0 or hdr["scl_inter"] != 0.0:
        data = data * slope + hdr["scl_inter"]
    return hdr, data


def read_volume(path) -> VoxelVolume:
    """Read a CT volume from a single-file NIfTI-1 image.

    The header's linear rescale (scl_slope/scl_inter, slope 0 treated as 1)
    is applied so the returned data is in Hounsfield units.
    """
    hdr, data = _read_nifti(path)
    if not np.isfinite(data).all():
        raise NiftiFormatError(f"{path}: volume contains non-finite voxel values")
    return VoxelVolume(data=data, spacing=hdr["spacing"], origin=hdr["origin"])


def read_mask(path, class_map: dict[int, int]) -> LesionMask:
    """Read an integer-labelled lesion mask and attach class ids.

    ``class_map`` maps mask labels to class ids; it may cover labels absent
    from this particular file (e.g. one shared map for a whole cohort), but
    every nonzero label present in the file must have an entry.
    """
    hdr, data = _read_nifti(path)
    rounded = np.rint(data)
    if not np.array_equal(data, rounded):
        raise MaskError(f"{path}: mask contains non-integer voxel values")
    labels = rounded.astype(np.int32)
    if labels.min() < 0:
        raise MaskError(f"{path}: mask contains negative labels")
    present = sorted(int(lbl) for lbl in set(np.unique(labels)) - {0})
    missing = [lbl for lbl in present if lbl not in class_map]
    if missing:
        raise ClassMapError(f"{path}: labels {missing} missing from the label-to-class map")
    class_of_label = {lbl: int(class_map[lbl]) for lbl in present}
    return LesionMask(labels=labels, spacing=hdr["spacing"], class_of_label=class_of_label, origin=hdr["origin"])


def write_nifti(path, data: np.ndarray, spacing, origin=(0.0, 0.0, 0.0)) -> None:
    """Write an (x, y, z) array as an uncompressed single-file NIfTI-1 image.

    The array dtype must be one of the supported on-disk types; no rescaling
    is applied (scl_slope=1, scl_inter=0).
    """
    data = np.ascontiguousarray(data)
    if data.ndim != 3:
        raise ValueError("only 3D arrays can be written")
    if data.dtype not in _DTYPE_CODES:
        raise ValueError(f"unsupported dtype {data.dtype}; use one of {sorted(_DTYPES.values(), key=str)}")
    code = _DTYPE_CODES[data.dtype]
    bitpix = data.dtype.itemsize * 8
    hdr = bytearray(352)
    struct.pack_into("<i", hdr, 0, HEADER_SIZE)
    struct.pack_into("<8h", hdr, 40, 3, data.shape[0], data.shape[1], data.shape[2], 1, 1, 1, 1)
    struct.pack_into("<h", hdr, 70, code)
    struct.pack_into("<h", hdr, 72, bitpix)
    struct.pack_into("<8f", hdr, 76, 0.0, spacing[0], spacing[1], spacing[2], 0.0, 0.0, 0.0, 0.0)
    struct.pack_into("<f", hdr, 108, 352.0)  # vox_offset
    struct.pack_into("<f", hdr, 112, 1.0)  # scl_slope
    struct.pack_into("<f", hdr, 116, 0.0)  # scl_inter
    struct.pack_into("<h", hdr, 252, 1)  # qform_code
    struct.pack_into("<3f", hdr, 268, origin[0], origin[1], origin[2])
    hdr[344:348] = b"n+1\x00"
    with open(path, "wb") as fh:
        fh.write(bytes(hdr))
        fh.write(data.flatten(order="F").tobytes())


def check_geometry(vol: VoxelVolume, mask: LesionMask) -> None:
    """Raise GeometryError unless volume and mask share dims, spacing and origin."""
    if vol.dims != mask.dims:
        raise GeometryError(f"dims mismatch: volume {vol.dims} vs mask {mask.dims}")
    if not np.allclose(vol.spacing, mask.spacing, rtol=1e-6, atol=0.0):
        raise GeometryError(f"spacing mismatch: volume {vol.spacing} vs mask {mask.spacing}")
    if not np.allclose(vol.origin, mask.origin, rtol=0.0, atol=1e-6):
        raise GeometryError(f"origin mismatch: volume {vol.origin} vs mask {mask.origin}")


def _output_grid(dims, spacing, target):
    """Per-axis output length and input-space sample positions (clamped)."""
    axes = []
    for d, s in zip(dims, spacing):
        ratio = s / target
        n_out = int(np.ceil(d * ratio))
        # sample o maps to input index o * target / spacing; clamp to the border voxel
        x = np.arange(n_out, dtype=np.float64) * (target / s)
        np.clip(x, 0.0, d - 1, out=x)
        axes.append(x)
    return axes


def resample_isotropic(vol: VoxelVolume, mask: LesionMask, target: float) -> tuple[VoxelVolume, LesionMask]:
    """Resample a volume/mask pair to isotropic ``target`` mm spacing.

    Intensities are trilinearly interpolated; labels use nearest-neighbour
    so they stay crisp.  Output dims are ceil(dims * spacing / target) and
    samples beyond the last voxel centre clamp to the border voxel, so no
    lesion voxel is lost at the boundary.  Origins are preserved.
    """
    if target <= 0:
        raise ValueError(f"target spacing must be positive, got {target}")
    check_geometry(vol, mask)

    xs, ys, zs = _output_grid(vol.dims, vol.spacing, float(target))
    new_spacing = (float(target),) * 3

    i0 = [np.floor(x).astype(np.intp) for x in (xs, ys, zs)]
    frac = [x - f for x, f in zip((xs, ys, zs), i0)]
    i1 = [np.minimum(f + 1, d - 1) for f, d in zip(i0, vol.dims)]

    out = np.zeros((len(xs), len(ys), len(zs)), dtype=np.float64)
    for bx in (0, 1):
        wx = (frac[0] if bx else 1.0 - frac[0])[:, None, None]
        ix = i1[0] if bx else i0[0]
        for by in (0, 1):
            wy = (frac[1] if by else 1.0 - frac[1])[None, :, None]
            iy = i1[1] if by else i0[1]
            for bz in (0, 1):
                wz = (frac[2] if bz else 1.0 - frac[2])[None, None, :]
                iz = i1[2] if bz else i0[2]
                out += (wx * wy * wz) * vol.data[np.ix_(ix, iy, iz)]

    nearest = [np.clip(np.floor(x + 0.5).astype(np.intp), 0, d - 1) for x, d in zip((xs, ys, zs), vol.dims)]
    new_labels = mask.labels[np.ix_(*nearest)]

    new_vol = VoxelVolume(data=out, spacing=new_spacing, origin=vol.origin)
    new_mask = LesionMask(
        labels=new_labels,
        spacing=new_spacing,
        class_of_label=dict(mask.class_of_label),
        origin=mask.origin,
    )
    return new_vol, new_mask


def extract_lesions(vol: VoxelVolume, mask: LesionMask) -> list[tuple[LesionRegion, int]]:
    """Split a mask into per-lesion regions, ordered by ascending label.

    A label that carries a class mapping but no voxels (e.g. a tiny lesion
    erased by nearest-neighbour resampling) is dropped with a warning.
    """
    check_geometry(vol, mask)
    regions = []
    for label in sorted(mask.class_of_label):
        coords = np.argwhere(mask.labels == label)
        if len(coords) == 0:
            warnings.warn(f"label {label} has no voxels and was dropped", stacklevel=2)
            continue
        intensities = vol.data[coords[:, 0], coords[:, 1], coords[:, 2]]
        region = LesionRegion(
            coordinates=coords,
            intensities=intensities,
            spacing=vol.spacing,
            label=label,
        )
        regions.append((region, mask.class_of_label[label]))
    return regions
