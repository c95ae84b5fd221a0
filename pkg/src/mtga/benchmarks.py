"""Shifted/rotated test functions and the two-task benchmark registry.

Every function is written for a batch ``z`` of shape ``(n, d)`` and has its
global minimum 0 at ``z = 0``. A :class:`ComposedTask` evaluates
``f(M (x - o))`` so its optimum sits at the shift vector ``o``.

The registry mirrors the nine-pair layout of the usual single-objective
multitasking suite (complete / partial / no intersection of the optima,
crossed with high / medium / low landscape similarity). The official shift
and rotation data are not bundled; registry pairs use seeded synthetic shifts
and rotations unless data files are supplied.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .core import ConfigError, TaskDefinition

WEIERSTRASS_A = 0.5
WEIERSTRASS_B = 3.0
WEIERSTRASS_KMAX = 20
SCHWEFEL_PEAK = 420.9687462275036
# per-dimension value of z*sin(sqrt|z|) at the peak, ~418.9829
SCHWEFEL_OFFSET = SCHWEFEL_PEAK * np.sin(np.sqrt(SCHWEFEL_PEAK))


class BenchmarkFileError(ValueError):
    pass


def sphere(z):
    return np.sum(z * z, axis=-1)


def ackley(z):
    d = z.shape[-1]
    a = -20.0 * np.exp(-0.2 * np.sqrt(np.sum(z * z, axis=-1) / d))
    b = -np.exp(np.sum(np.cos(2.0 * np.pi * z), axis=-1) / d)
    return a + b + 20.0 + np.e


def rastrigin(z):
    return np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z) + 10.0, axis=-1)


def rosenbrock(z):
    # shifted by +1 so the minimum is at z = 0
    y = z + 1.0
    return np.sum(100.0 * (y[..., 1:] - y[..., :-1] ** 2) ** 2 + (y[..., :-1] - 1.0) ** 2, axis=-1)


def griewank(z):
    i = np.arange(1, z.shape[-1] + 1)
    return 1.0 + np.sum(z * z, axis=-1) / 4000.0 - np.prod(np.cos(z / np.sqrt(i)), axis=-1)


def weierstrass(z):
    k = np.arange(WEIERSTRASS_KMAX + 1)
    ak = WEIERSTRASS_A ** k
    bk = WEIERSTRASS_B ** k
    terms = ak * np.cos(2.0 * np.pi * bk * (z[..., None] + 0.5))
    const = z.shape[-1] * np.sum(ak * np.cos(np.pi * bk))
    return np.sum(terms, axis=(-1, -2)) - const


def schwefel(z):
    d = z.shape[-1]
    y = z + SCHWEFEL_PEAK
    # outside [-500, 500]: fold back into the box and add a quadratic penalty
    a = 500.0 - np.fmod(np.abs(y), 500.0)
    above = a * np.sin(np.sqrt(a)) - ((y - 500.0) / 100.0) ** 2 / d
    below = -a * np.sin(np.sqrt(a)) - ((y + 500.0) / 100.0) ** 2 / d
    inner = np.where(y > 500.0, above, np.where(y < -500.0, below, y * np.sin(np.sqrt(np.abs(y)))))
    return SCHWEFEL_OFFSET * d - np.sum(inner, axis=-1)


FUNCTIONS = {
    "sphere": sphere,
    "ackley": ackley,
    "rastrigin": rastrigin,
    "rosenbrock": rosenbrock,
    "griewank": griewank,
    "weierstrass": weierstrass,
    "schwefel": schwefel,
}

DEFAULT_RANGES = {
    "sphere": (-100.0, 100.0),
    "ackley": (-50.0, 50.0),
    "rastrigin": (-50.0, 50.0),
    "rosenbrock": (-50.0, 50.0),
    "griewank": (-100.0, 100.0),
    "weierstrass": (-0.5, 0.5),
    "schwefel": (-500.0, 500.0),
}


def check_rotation(rotation: np.ndarray, tol: float = 1e-9):
    rotation = np.asarray(rotation, dtype=float)
    if rotation.ndim != 2 or rotation.shape[0] != rotation.shape[1]:
        raise ConfigError(f"rotation must be square, got shape {rotation.shape}")
    err = np.max(np.abs(rotation @ rotation.T - np.eye(rotation.shape[0])))
    if err >= tol:
        raise ConfigError(f"rotation matrix is not orthogonal (max |M M^T - I| = {err:.3g})")
    return rotation


def random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed)."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


@dataclass
class ComposedTask:
    kind: str
    shift: np.ndarray
    rotation: Optional[np.ndarray] = None
    lower: float = None
    upper: float = None

    def __post_init__(self):
        if self.kind not in FUNCTIONS:
            raise ConfigError(f"unknown function kind {self.kind!r}")
        self.shift = np.atleast_1d(np.asarray(self.shift, dtype=float))
        if self.rotation is not None:
            self.rotation = check_rotation(self.rotation)
            if self.rotation.shape[0] != self.dim:
                raise ConfigError(f"rotation is {self.rotation.shape[0]}-D but shift is {self.dim}-D")
        lo, hi = DEFAULT_RANGES[self.kind]
        self.lower = lo if self.lower is None else float(self.lower)
        self.upper = hi if self.upper is None else float(self.upper)
        if not self.lower < self.upper:
            raise ConfigError("range lower bound must be below upper bound")

    @property
    def dim(self) -> int:
        return self.shift.shape[0]

    def __call__(self, x):
        return eval_function(self, x)

    def task(self, task_id: str) -> TaskDefinition:
        return TaskDefinition(task_id, np.full(self.dim, self.lower), np.full(self.dim, self.upper), self)


def eval_function(f: ComposedTask, x) -> np.ndarray:
    """``f(M (x - o))`` for one point or a batch of points."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != f.dim:
        raise ConfigError(f"{f.kind}: point has {x.shape[-1]} coordinates, expected {f.dim}")
    z = x - f.shift
    if f.rotation is not None:
        z = z @ f.rotation.T
    return FUNCTIONS[f.kind](z)


# --- registry ---------------------------------------------------------------

# (intersection, similarity, (kind, dim, rotated) for T1, same for T2)
REGISTRY = {
    "B1": ("CI", "HS", ("griewank", 50, True), ("rastrigin", 50, True)),
    "B2": ("CI", "MS", ("ackley", 50, True), ("rastrigin", 50, True)),
    "B3": ("CI", "LS", ("ackley", 50, True), ("schwefel", 50, False)),
    "B4": ("PI", "HS", ("rastrigin", 50, True), ("sphere", 50, False)),
    "B5": ("PI", "MS", ("ackley", 50, True), ("rosenbrock", 50, False)),
    "B6": ("PI", "LS", ("ackley", 50, False), ("weierstrass", 25, True)),
    "B7": ("NI", "HS", ("rosenbrock", 50, False), ("rastrigin", 50, True)),
    "B8": ("NI", "MS", ("griewank", 50, True), ("weierstrass", 50, False)),
    "B9": ("NI", "LS", ("rastrigin", 50, True), ("schwefel", 50, False)),
}

REGISTRY_SEED = 20190


def _middle_half(lo, hi, u):
    """Map ``u`` in [0, 1] into the middle half of ``[lo, hi]``."""
    return lo + (hi - lo) * (0.25 + 0.5 * u)


def registry_pair(name: str, seed: int = REGISTRY_SEED, dim: Optional[int] = None):
    """Build the two :class:`ComposedTask` objects of registry entry ``name``.

    Synthetic optima are drawn in normalized coordinates ``u`` (middle half
    of each range): for complete intersection both tasks share ``u``; for
    partial intersection they share it on the first half of the common
    coordinates; otherwise each task draws its own. ``dim`` overrides every
    task's dimensionality (keeping the ratio for the 25-D Weierstrass task).
    """
    if name not in REGISTRY:
        raise ConfigError(f"unknown benchmark {name!r}; known: {sorted(REGISTRY)}")
    inter, _, spec1, spec2 = REGISTRY[name]
    rng = np.random.default_rng([seed, int(name[1:])])
    dims = [s[1] for s in (spec1, spec2)]
    if dim is not None:
        dims = [max(1, dim * d // 50) for d in dims]
    u1 = rng.random(dims[0])
    u2 = rng.random(dims[1])
    common = min(dims)
    if inter == "CI":
        u2[:common] = u1[:common]
    elif inter == "PI":
        u2[: common // 2] = u1[: common // 2]
    out = []
    for (kind, _, rotated), d, u in zip((spec1, spec2), dims, (u1, u2)):
        lo, hi = DEFAULT_RANGES[kind]
        rot = random_rotation(d, rng) if rotated else None
        out.append(ComposedTask(kind, _middle_half(lo, hi, u), rot, lo, hi))
    return tuple(out)


def synthetic_pair(kinds=("sphere", "ackley"), dim: int = 30, seed: int = 0, rotate: bool = False):
    """Two shifted tasks with independent seeded optima in the middle half of their ranges."""
    rng = np.random.default_rng(seed)
    out = []
    for kind in kinds:
        lo, hi = DEFAULT_RANGES[kind]
        shift = _middle_half(lo, hi, rng.random(dim))
        out.append(ComposedTask(kind, shift, random_rotation(dim, rng) if rotate else None, lo, hi))
    return tuple(out)


# --- data files ---------------------------------------------------------------
#
# One block per task:
#   dim range_lo range_hi kind
#   o_1 o_2 ... o_dim
#   [dim rows of the rotation matrix]
# A pair file holds two blocks back to back. Blank lines and '#' comments are
# ignored.


def _read_lines(path: Path):
    out = []
    for no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((no, line.split()))
    return out


def _floats(tokens, no, path):
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise BenchmarkFileError(f"{path}:{no}: {exc}") from None


def _is_header(tokens):
    return len(tokens) == 4 and tokens[3] in FUNCTIONS


def parse_task_file(path) -> list:
    """Parse every task block in ``path`` into :class:`ComposedTask` objects."""
    path = Path(path)
    lines = _read_lines(path)
    tasks, i = [], 0
    while i < len(lines):
        no, tokens = lines[i]
        if not _is_header(tokens):
            raise BenchmarkFileError(f"{path}:{no}: expected header 'dim range_lo range_hi kind', got {' '.join(tokens)!r}")
        try:
            d = int(tokens[0])
        except ValueError:
            raise BenchmarkFileError(f"{path}:{no}: dimension {tokens[0]!r} is not an integer") from None
        lo, hi = _floats(tokens[1:3], no, path)
        if i + 1 >= len(lines):
            raise BenchmarkFileError(f"{path}:{no}: missing shift vector after header")
        sno, stoks = lines[i + 1]
        shift = _floats(stoks, sno, path)
        if len(shift) != d:
            raise BenchmarkFileError(f"{path}:{sno}: shift has {len(shift)} entries, expected {d}")
        i += 2
        rotation = None
        if i < len(lines) and not _is_header(lines[i][1]):
            rows = []
            for _ in range(d):
                if i >= len(lines) or _is_header(lines[i][1]):
                    last = lines[i - 1][0]
                    raise BenchmarkFileError(f"{path}:{last}: rotation has {len(rows)} rows, expected {d}")
                rno, rtoks = lines[i]
                row = _floats(rtoks, rno, path)
                if len(row) != d:
                    raise BenchmarkFileError(f"{path}:{rno}: rotation row has {len(row)} entries, expected {d}")
                rows.append(row)
                i += 1
            rotation = np.array(rows)
            try:
                check_rotation(rotation)
            except ConfigError as exc:
                raise ConfigError(f"{path}:{no}: {exc}") from None
        tasks.append(ComposedTask(tokens[3], shift, rotation, lo, hi))
    return tasks


def write_task_file(path, tasks):
    with open(path, "w") as fh:
        for t in tasks:
            fh.write(f"{t.dim} {t.lower!r} {t.upper!r} {t.kind}\n")
            fh.write(" ".join(repr(float(v)) for v in t.shift) + "\n")
            if t.rotation is not None:
                for row in t.rotation:
                    fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_task_pair(spec: Union[str, Path, tuple, list], seed: int = REGISTRY_SEED):
    """Two :class:`TaskDefinition` objects from a registry id or data file(s).

    ``spec`` is a registry id such as ``"B1"``, one file with two task
    blocks, or a pair of single-task files.
    """
    if isinstance(spec, (tuple, list)):
        if len(spec) != 2:
            raise ConfigError("expected two task files")
        composed = [t for p in spec for t in parse_task_file(p)]
        names = [Path(p).stem for p in spec]
    elif isinstance(spec, str) and spec in REGISTRY:
        composed = list(registry_pair(spec, seed))
        names = [f"{spec}-T1", f"{spec}-T2"]
    else:
        path = Path(spec)
        if not path.exists():
            raise ConfigError(f"{spec!r} is neither a registry benchmark nor an existing file")
        composed = parse_task_file(path)
        names = [f"{path.stem}-T1", f"{path.stem}-T2"]
    if len(composed) != 2:
        raise BenchmarkFileError(f"{spec}: expected 2 task blocks, found {len(composed)}")
    return tuple(c.task(n) for c, n in zip(composed, names))
