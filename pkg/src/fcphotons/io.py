"""File formats: two-column curve text, PTAG binary tag files, CSV, summaries."""

import json
import struct

import numpy as np

from .simkit import TagStream
from .spectral import Spectrum

PTAG_MAGIC = b"PTAG"
PTAG_VERSION = 1
_RECORD_DTYPE = np.dtype([("channel", "u1"), ("timestamp_ps", "<u8")])


class FileFormatError(ValueError):
    pass


def load_spectrum(path, center_wavelength_nm: float = 0.0) -> Spectrum:
    """Read a "nu_GHz,intensity" text file; '#' lines are comments."""
    nu, inten = load_curve(path)
    return Spectrum(nu, inten, center_wavelength_nm)


def save_spectrum(path, s: Spectrum) -> None:
    save_curve(path, s.nu_grid, s.intensity, ("nu_GHz", "intensity"),
               comment=f"center_wavelength_nm={s.center_wavelength_nm}")


def save_curve(path, x, y, names=("x", "y"), comment: str = "", sigma=None) -> None:
    """Two- or three-column UTF-8 CSV with an optional '#' comment header."""
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        cols = [np.asarray(x, dtype=float), np.asarray(y, dtype=float)]
        header = list(names[:2])
        if sigma is not None:
            cols.append(np.asarray(sigma, dtype=float))
            header.append(names[2] if len(names) > 2 else "sigma")
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_curve(path):
    """Read the first two numeric columns of a curve CSV."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                rows.append([float(p) for p in parts[:2]])
            except ValueError:
                continue  # header line
    if not rows:
        raise FileFormatError(f"{path}: no numeric rows")
    data = np.asarray(rows, dtype=float)
    return data[:, 0], data[:, 1]


def write_ptag(path, streams, duration_ps: int | None = None) -> None:
    """Write tag streams to the PTAG binary format.

    Header: magic "PTAG", u16 version, u64 duration_ps (little endian), then
    9-byte records of u8 channel + u64 timestamp_ps, time ordered.
    """
    if isinstance(streams, TagStream):
        streams = [streams]
    if duration_ps is None:
        duration_ps = max((s.duration_ps for s in streams), default=0)
    records = np.empty(sum(s.tags.size for s in streams), dtype=_RECORD_DTYPE)
    pos = 0
    for s in streams:
        records["channel"][pos:pos + s.tags.size] = s.channel
        records["timestamp_ps"][pos:pos + s.tags.size] = s.tags
        pos += s.tags.size
    records = records[np.argsort(records["timestamp_ps"], kind="stable")]
    with open(path, "wb") as fh:
        fh.write(PTAG_MAGIC)
        fh.write(struct.pack("<HQ", PTAG_VERSION, duration_ps))
        records.tofile(fh)


def read_ptag(path) -> list[TagStream]:
    """Read a PTAG file back into one TagStream per channel present."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != PTAG_MAGIC:
            raise FileFormatError(f"{path}: bad magic {magic!r}")
        version, duration_ps = struct.unpack("<HQ", fh.read(10))
        if version != PTAG_VERSION:
            raise FileFormatError(f"{path}: unsupported version {version}")
        records = np.fromfile(fh, dtype=_RECORD_DTYPE)
    streams = []
    for ch in np.unique(records["channel"]):
        tags = np.sort(records["timestamp_ps"][records["channel"] == ch]).astype(np.int64)
        streams.append(TagStream(int(ch), tags, int(duration_ps)))
    return streams


def write_tags_csv(path, streams) -> None:
    """Debug format: "channel,timestamp_ps" rows, time ordered per channel."""
    if isinstance(streams, TagStream):
        streams = [streams]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("channel,timestamp_ps\n")
        for s in streams:
            for t in s.tags:
                fh.write(f"{s.channel},{t}\n")


def read_tags_csv(path, duration_ps: int) -> list[TagStream]:
    channels, times = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("channel"):
                continue
            ch, t = line.split(",")
            channels.append(int(ch))
            times.append(int(t))
    channels = np.asarray(channels)
    times = np.asarray(times, dtype=np.int64)
    return [TagStream(int(ch), np.sort(times[channels == ch]), duration_ps)
            for ch in np.unique(channels)]


def write_summary(path, data: dict) -> None:
    """Machine-parseable run summary, stable key order."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_summary(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
