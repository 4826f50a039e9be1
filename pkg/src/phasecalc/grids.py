"""Uniform truncated grids, sampled symbols, and their on-disk format.

A grid symbol is stored as a JSON header plus a companion raw file of
little-endian float64 (re, im) pairs in row-major order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [-L, L) with N points, spacing h = 2L/N."""

    L: float
    N: int

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError("extent L must be positive and finite")
        if self.N <= 0 or self.N % 2:
            raise ValueError("N must be a positive even integer")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def points(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    @property
    def nyquist(self) -> float:
        return np.pi / self.h

    def dual(self) -> "GridSpec":
        """Frequency grid of the discrete Fourier transform on this grid."""
        return GridSpec(self.nyquist, self.N)

    @classmethod
    def balanced(cls, N: int) -> "GridSpec":
        """Grid whose dual grid is itself: L = sqrt(pi N / 2)."""
        return cls(float(np.sqrt(np.pi * N / 2.0)), N)

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """"N,L" or just "N" for the balanced grid."""
        if "," not in text:
            return cls.balanced(int(text))
        n, L = text.split(",")
        return cls(float(L), int(n))

    def to_json(self) -> dict:
        return {"L": self.L, "N": self.N}


@dataclass
class GridSymbol:
    """Complex samples of a function on a product of uniform grids.

    ``values`` has shape ``tuple(ax.N for ax in axes)``; axis order follows
    ``axes``. ``domain`` is a free tag ("E", "ExE*", "F", ...).
    """

    axes: tuple
    values: np.ndarray
    domain: str = "E"

    def __post_init__(self):
        self.axes = tuple(self.axes)
        self.values = np.asarray(self.values, dtype=complex)
        shape = tuple(ax.N for ax in self.axes)
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid symbol has non-finite samples")

    @classmethod
    def from_function(cls, func, axes, domain: str = "E") -> "GridSymbol":
        mesh = np.meshgrid(*[ax.points for ax in axes], indexing="ij")
        vals = np.broadcast_to(func(*mesh), mesh[0].shape)
        return cls(tuple(axes), np.array(vals, dtype=complex), domain)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def cell_volume(self) -> float:
        return float(np.prod([ax.h for ax in self.axes]))

    def mesh(self):
        return np.meshgrid(*[ax.points for ax in self.axes], indexing="ij")

    def same_grid(self, other: "GridSymbol") -> bool:
        return self.axes == other.axes

    def boundary_ratio(self) -> float:
        """Largest boundary sample relative to the peak (0 for a zero symbol)."""
        peak = np.abs(self.values).max(initial=0.0)
        if peak == 0:
            return 0.0
        edge = 0.0
        for k in range(self.ndim):
            sl = np.take(self.values, [0, -1], axis=k)
            edge = max(edge, np.abs(sl).max())
        return float(edge / peak)


def write_grid_symbol(sym: GridSymbol, header_path, extra: dict | None = None) -> Path:
    """Write ``sym`` as ``header_path`` (JSON) plus ``<stem>.bin`` next to it."""
    header_path = Path(header_path)
    raw_path = header_path.with_suffix(".bin")
    n_phase = sym.ndim // 2 if sym.ndim % 2 == 0 else sym.ndim
    header = {
        "n": n_phase,
        "axes": [ax.to_json() for ax in sym.axes],
        "domain": sym.domain,
        "raw": raw_path.name,
    }
    if extra:
        header.update(extra)
    interleaved = np.empty(sym.values.size * 2, dtype="<f8")
    flat = sym.values.ravel(order="C")
    interleaved[0::2] = flat.real
    interleaved[1::2] = flat.imag
    raw_path.write_bytes(interleaved.tobytes())
    header_path.write_text(json.dumps(header, indent=2, sort_keys=True))
    return raw_path


def read_grid_symbol(header_path) -> GridSymbol:
    header_path = Path(header_path)
    header = json.loads(header_path.read_text())
    axes = tuple(GridSpec(float(a["L"]), int(a["N"])) for a in header["axes"])
    raw_path = header_path.parent / header.get("raw", header_path.with_suffix(".bin").name)
    data = np.frombuffer(raw_path.read_bytes(), dtype="<f8")
    shape = tuple(ax.N for ax in axes)
    if data.size != 2 * int(np.prod(shape)):
        raise ValueError(f"raw file holds {data.size // 2} samples, header expects {np.prod(shape)}")
    vals = (data[0::2] + 1j * data[1::2]).reshape(shape)
    return GridSymbol(axes, vals, header.get("domain", "E"))


def write_matrix(mat: np.ndarray, header_path, grid: GridSpec | None = None,
                 kind: str = "operator") -> Path:
    """Square (or rectangular) complex matrix in the grid-symbol raw format."""
    header_path = Path(header_path)
    raw_path = header_path.with_suffix(".bin")
    mat = np.asarray(mat, dtype=complex)
    header = {"kind": kind, "shape": list(mat.shape), "raw": raw_path.name}
    if grid is not None:
        header["grid"] = grid.to_json()
    inter = np.empty(mat.size * 2, dtype="<f8")
    inter[0::2] = mat.ravel().real
    inter[1::2] = mat.ravel().imag
    raw_path.write_bytes(inter.tobytes())
    header_path.write_text(json.dumps(header, indent=2, sort_keys=True))
    return raw_path


def read_matrix(header_path) -> np.ndarray:
    header_path = Path(header_path)
    header = json.loads(header_path.read_text())
    data = np.frombuffer((header_path.parent / header["raw"]).read_bytes(), dtype="<f8")
    return (data[0::2] + 1j * data[1::2]).reshape(header["shape"])
