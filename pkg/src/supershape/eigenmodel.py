"""Eigenface basis over information maps.

Training maps are flattened row-major, centered on their mean, and the
principal directions are found from the small count x count inner-product
matrix rather than the full pixel covariance.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateTrainingError,
    DimensionError,
    FormatError,
    InsufficientTrainingError,
    InvalidParameterError,
)
from .infomap import GridSpec, InfoMap

EIGEN_CUTOFF = 1e-10  # relative to the largest eigenvalue
MODEL_MAGIC = "EIGMODEL 1"


def flatten(info: InfoMap | np.ndarray) -> np.ndarray:
    values = info.values if isinstance(info, InfoMap) else np.asarray(info, dtype=float)
    return np.ascontiguousarray(values, dtype=float).reshape(-1)


def unflatten(vector, width: int, height: int) -> np.ndarray:
    vector = np.asarray(vector, dtype=float)
    if vector.size != width * height:
        raise DimensionError(f"vector of length {vector.size} cannot fill {height}x{width}")
    return vector.reshape(height, width).copy()


@dataclass(frozen=True)
class FaceClass:
    name: str
    interest: float
    omega: np.ndarray


@dataclass(frozen=True, eq=False)
class EigenModel:
    width: int
    height: int
    mean: np.ndarray  # (width*height,)
    eigenfaces: np.ndarray  # (K, width*height), orthonormal rows
    eigenvalues: np.ndarray  # (K,), descending
    classes: tuple[FaceClass, ...]

    @property
    def n_eigen(self) -> int:
        return len(self.eigenvalues)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.classes]

    @property
    def omegas(self) -> np.ndarray:
        return np.array([c.omega for c in self.classes]).reshape(len(self.classes), self.n_eigen)

    def index(self, name: str) -> int:
        for i, c in enumerate(self.classes):
            if c.name == name:
                return i
        raise KeyError(name)

    def _vector(self, info) -> np.ndarray:
        if isinstance(info, InfoMap):
            if info.values.shape != (self.height, self.width):
                raise DimensionError(
                    f"map is {info.values.shape[0]}x{info.values.shape[1]}, "
                    f"model expects {self.height}x{self.width}"
                )
        vec = flatten(info)
        if vec.size != self.mean.size:
            raise DimensionError(f"vector length {vec.size} != {self.mean.size}")
        return vec

    def project(self, info) -> np.ndarray:
        """Face-space coordinates of a map: u_k . (map - mean) for every k."""
        return self.eigenfaces @ (self._vector(info) - self.mean)

    def class_distance(self, omega, k: int) -> float:
        omega = np.asarray(omega, dtype=float)
        if omega.shape != (self.n_eigen,):
            raise DimensionError(f"omega must have length {self.n_eigen}")
        if not 0 <= k < len(self.classes):
            raise IndexError(f"class index {k} out of range")
        return float(np.linalg.norm(omega - self.classes[k].omega))

    def reconstruct(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        if omega.shape != (self.n_eigen,):
            raise DimensionError(f"omega must have length {self.n_eigen}")
        return unflatten(self.mean + omega @ self.eigenfaces, self.width, self.height)


def _fix_sign(vectors: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude component is positive."""
    idx = np.argmax(np.abs(vectors), axis=1)
    signs = np.sign(vectors[np.arange(len(vectors)), idx])
    signs[signs == 0] = 1.0
    return vectors * signs[:, None]


def train(maps, names, interests=None) -> EigenModel:
    maps = list(maps)
    names = list(names)
    if len(maps) < 2:
        raise InsufficientTrainingError(f"need at least 2 training maps, got {len(maps)}")
    if len(names) != len(maps):
        raise InvalidParameterError("one name per training map is required")
    if len(set(names)) != len(names):
        raise InvalidParameterError("class names must be unique")
    interests = [1.0] * len(maps) if interests is None else [float(v) for v in interests]
    if len(interests) != len(maps):
        raise InvalidParameterError("one interest value per training map is required")

    shape = np.shape(maps[0].values if isinstance(maps[0], InfoMap) else maps[0])
    for m in maps:
        if np.shape(m.values if isinstance(m, InfoMap) else m) != shape:
            raise DimensionError("all training maps must share the same dimensions")
    height, width = shape

    data = np.array([flatten(m) for m in maps])
    mean = data.mean(axis=0)
    centered = data - mean
    count = len(maps)
    scale = float(np.abs(data).max())
    if float(np.abs(centered).max()) <= 1e-12 * scale:
        raise DegenerateTrainingError("training maps are identical; no non-zero eigenvalues")

    # small inner-product system: eigenvectors v of A A^T / P give
    # eigenfaces A^T v of the covariance A^T A / P with the same eigenvalues
    gram = centered @ centered.T / count
    evals, evecs = np.linalg.eigh(gram)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    lam_max = evals[0]
    if not lam_max > 0:
        raise DegenerateTrainingError("training maps are identical; no non-zero eigenvalues")
    keep = evals > EIGEN_CUTOFF * lam_max
    evals, evecs = evals[keep], evecs[:, keep]

    faces = evecs.T @ centered
    faces /= np.linalg.norm(faces, axis=1, keepdims=True)
    # one Gram-Schmidt pass tightens orthonormality lost to cancellation
    faces, _ = np.linalg.qr(faces.T)
    faces = _fix_sign(faces.T)

    omegas = centered @ faces.T
    classes = tuple(FaceClass(n, i, o) for n, i, o in zip(names, interests, omegas))
    return EigenModel(width, height, mean, faces, evals, classes)


def project(model: EigenModel, info) -> np.ndarray:
    return model.project(info)


def class_distance(omega, model: EigenModel, k: int) -> float:
    return model.class_distance(omega, k)


def reconstruct(model: EigenModel, omega, spec: GridSpec | None = None) -> InfoMap:
    values = model.reconstruct(omega)
    if spec is None:
        spec = GridSpec(width=model.width, height=model.height)
    return InfoMap(values, spec)


# ---------------------------------------------------------------------------
# Model file
# ---------------------------------------------------------------------------

def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def save_model(model: EigenModel, path) -> None:
    for c in model.classes:
        if not c.name or any(ch.isspace() for ch in c.name):
            raise InvalidParameterError(f"class name {c.name!r} cannot be stored (whitespace)")
    lines = [
        MODEL_MAGIC,
        f"grid {model.width} {model.height}",
        f"eigen {model.n_eigen}",
        f"classes {len(model.classes)}",
        _fmt(model.mean),
    ]
    lines.extend(_fmt(face) for face in model.eigenfaces)
    for c in model.classes:
        lines.append(f"class {c.name} {float(c.interest)!r}")
        lines.append(_fmt(c.omega))
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path) -> EigenModel:
    path = Path(path)
    lines = path.read_text().splitlines()
    pos = 0

    def take(expect=None):
        nonlocal pos
        if pos >= len(lines):
            raise FormatError("unexpected end of model file", path, pos + 1)
        line = lines[pos]
        pos += 1
        if expect is not None:
            parts = line.split()
            if not parts or parts[0] != expect:
                raise FormatError(f"expected {expect!r} record", path, pos)
            return parts[1:]
        return line

    def floats(n):
        line = take()
        try:
            vals = np.array([float(t) for t in line.split()])
        except ValueError:
            raise FormatError("non-numeric value", path, pos) from None
        if vals.size != n:
            raise FormatError(f"expected {n} values, got {vals.size}", path, pos)
        return vals

    if take() != MODEL_MAGIC:
        raise FormatError(f"missing {MODEL_MAGIC!r} header", path, 1)
    try:
        width, height = (int(v) for v in take("grid"))
        (k,) = (int(v) for v in take("eigen"))
        (c,) = (int(v) for v in take("classes"))
    except ValueError:
        raise FormatError("bad header record", path, pos) from None
    size = width * height
    mean = floats(size)
    faces = np.array([floats(size) for _ in range(k)]).reshape(k, size)
    classes = []
    for _ in range(c):
        parts = take("class")
        if len(parts) != 2:
            raise FormatError("class record must be 'class <name> <interest>'", path, pos)
        name, interest = parts[0], float(parts[1])
        classes.append(FaceClass(name, interest, floats(k)))
    # the training projections determine the eigenvalues: lambda_k = mean(omega_k^2)
    omegas = np.array([cl.omega for cl in classes]).reshape(c, k)
    evals = np.mean(omegas**2, axis=0) if c else np.zeros(k)
    return EigenModel(width, height, mean, faces, evals, tuple(classes))
