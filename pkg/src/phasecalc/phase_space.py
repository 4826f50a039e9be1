"""Symplectic geometry of E = T*R^n and lattice enumeration."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


def hamilton_matrix(n: int) -> np.ndarray:
    """Block matrix J = (0, I; -I, 0) of size 2n x 2n."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class SymplecticSpace:
    """Phase space E = R^n x (R^n)* with its Hamilton map.

    Attributes
    ----------
    n : int
        Spatial dimension; E has dimension d = 2n.
    """

    n: int = 1
    J: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        object.__setattr__(self, "J", hamilton_matrix(self.n))

    @property
    def d(self) -> int:
        return 2 * self.n

    @property
    def J_inv(self) -> np.ndarray:
        # J^2 = -1
        return -self.J

    def _check(self, *vecs):
        out = []
        for v in vecs:
            v = np.asarray(v, dtype=float)
            if v.shape[-1] != self.d:
                raise ValueError(
                    f"expected vectors of length {self.d}, got shape {v.shape}")
            out.append(v)
        return out


def symplectic_form(space: SymplecticSpace, u, v):
    """sigma(u, v) = (J u) . v; broadcasts over leading axes."""
    u, v = space._check(u, v)
    return np.einsum("...i,...i->...", u @ space.J.T, v)


def chord_map(space: SymplecticSpace, x, y):
    """Midpoint and rotated chord q(x, y) = ((x + y)/2, J^{-1}(y - x))."""
    x, y = space._check(x, y)
    return 0.5 * (x + y), (y - x) @ space.J_inv.T


def chord_map_inverse(space: SymplecticSpace, mid, chord):
    """Inverse of :func:`chord_map`: returns (x, y)."""
    mid, chord = space._check(mid, chord)
    half = 0.5 * (chord @ space.J.T)
    return mid - half, mid + half


@dataclass(frozen=True)
class Lattice:
    """Lattice origin + Z e_1 + ... + Z e_k; columns of ``basis`` are the e_i."""

    basis: np.ndarray
    origin: np.ndarray | None = None

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if b.shape[0] != b.shape[1]:
            raise ValueError("lattice basis must be square")
        if abs(np.linalg.det(b)) <= 1e-14:
            raise ValueError("lattice basis is singular")
        object.__setattr__(self, "basis", b)
        o = np.zeros(b.shape[0]) if self.origin is None else np.asarray(self.origin, float)
        if o.shape != (b.shape[0],):
            raise ValueError("origin has the wrong length")
        object.__setattr__(self, "origin", o)

    @classmethod
    def scaled(cls, dim: int, scale: float = 1.0) -> "Lattice":
        return cls(scale * np.eye(dim))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def covolume(self) -> float:
        return float(abs(np.linalg.det(self.basis)))

    @property
    def is_diagonal(self) -> bool:
        return bool(np.allclose(self.basis, np.diag(np.diag(self.basis))))

    def point(self, k) -> np.ndarray:
        return self.origin + self.basis @ np.asarray(k, dtype=float)

    def to_json(self) -> dict:
        return {"basis": self.basis.tolist(), "origin": self.origin.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "Lattice":
        return cls(np.asarray(obj["basis"], float), np.asarray(obj.get("origin"), float)
                   if obj.get("origin") is not None else None)


def lattice_points(lat: Lattice, lower, upper, return_indices: bool = False):
    """All lattice points inside the closed box [lower, upper].

    The integer preimage of the box is bounded through the inverse basis,
    then filtered. Points come out in lexicographic order of their integer
    coordinates.
    """
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (lat.dim,))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (lat.dim,))
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise ValueError("box must be bounded")
    if np.any(upper < lower):
        raise ValueError("empty box: upper < lower")
    inv = np.linalg.inv(lat.basis)
    corners = np.array(list(itertools.product(*zip(lower, upper)))) - lat.origin
    coords = corners @ inv.T
    kmin = np.floor(coords.min(axis=0) - 1e-9).astype(int)
    kmax = np.ceil(coords.max(axis=0) + 1e-9).astype(int)
    axes = [np.arange(a, b + 1) for a, b in zip(kmin, kmax)]
    ks = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, lat.dim)
    pts = lat.origin + ks @ lat.basis.T
    tol = 1e-12 * (1.0 + np.abs(pts).max(initial=0.0))
    keep = np.all((pts >= lower - tol) & (pts <= upper + tol), axis=1)
    if return_indices:
        return pts[keep], ks[keep]
    return pts[keep]
