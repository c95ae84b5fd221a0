"""Coupled-tank water-level plant and ITAE fitness for fuzzy PI controllers.

Pump 1 feeds tank 1, water flows through the baffle into tank 2, and the
controller regulates the level ``H2``. Levels are in cm, flows in cm^3/s.

Closed loop, once per sample ``t = 0 .. N_p - 1``::

    e   = setpoint[t] - H2
    de  = (e - e_prev) / T_s            (0 on the first sample)
    y   = flc(e * e_gain / error_scale, de * de_gain / rate_scale)   in [0, 1]
    u  += 2 du_max * (y - y_hold) * T_s  clamped to u_limits
    Q1  = output_gain * u, applied after the input delay
    integrate the plant over one sample (fixed-step RK4, ``substeps``)

Consequents live in [0, 1], so the output is re-centred around a hold value
``y_hold``. By default ``y_hold = flc(0, 0)``: every controller then holds the
pump still at zero error and zero error rate, which keeps the integral action
of the velocity-form PI law exact. ``centre="half"`` uses the fixed
``y_hold = 0.5`` instead.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numba
import numpy as np

from .core import MAXIMIZE, TaskDefinition
from .fuzzy import IT2, MIN_STD, N_GENES, T1, it2_kernel, packed_batch, repair_genes, t1_kernel

EPSILON = 1e-9
LARGE = 1e12
DEFAULT_WEIGHTS = (1.0, 1.0, 1.0 / 3.0, 1.0)


@dataclass
class PlantConfig:
    A1: float = 36.52
    A2: float = 36.52
    alpha1: float = 5.6186
    alpha2: float = 5.6186
    alpha3: float = 10.0
    outlet1_open: bool = False
    # (first sample index, level) pairs; the level holds until the next switch
    setpoints: tuple = ((0, 15.0),)
    delay: float = 0.0
    horizon: int = 200
    Ts: float = 1.0
    substeps: int = 10
    H0: tuple = (0.0, 0.0)

    def __post_init__(self):
        self.setpoints = tuple((int(k), float(v)) for k, v in self.setpoints)
        self.H0 = tuple(float(h) for h in self.H0)
        consts = (self.A1, self.A2, self.alpha1, self.alpha2, self.alpha3, self.delay)
        if min(consts) < 0:
            raise ValueError("plant constants must be non-negative")
        if self.A1 <= 0 or self.A2 <= 0:
            raise ValueError("tank areas must be positive")
        if self.horizon < 1 or self.Ts <= 0 or self.substeps < 1:
            raise ValueError("need horizon >= 1, Ts > 0 and substeps >= 1")

    @property
    def delay_samples(self) -> int:
        return int(math.ceil(self.delay / self.Ts - 1e-12))

    def setpoint_signal(self) -> np.ndarray:
        sp = np.zeros(self.horizon)
        for start, level in sorted(self.setpoints):
            sp[start:] = level
        return sp

    def to_dict(self):
        return asdict(self)


def plant_configs(switch: int = 100, **overrides) -> list:
    """The four evaluation plants: nominal, 2 s delay, two-step setpoint, weaker baffle."""
    return [
        PlantConfig(**overrides),
        PlantConfig(delay=2.0, **overrides),
        PlantConfig(setpoints=((0, 22.5), (switch, 7.5)), **overrides),
        PlantConfig(alpha3=8.0, **overrides),
    ]


@dataclass
class ControllerConfig:
    """Scaling between plant signals and the normalized fuzzy controller."""

    error_scale: float = 15.0
    rate_scale: float = 1.0
    e_gain: float = 1.0
    de_gain: float = 1.0
    du_max: float = 0.5
    # "origin": hold where the controller outputs at e = de = 0; "half": hold at y = 0.5
    centre: str = "origin"
    u_limits: tuple = (0.0, 1.0)
    output_gain: float = 50.0

    def __post_init__(self):
        if self.centre not in ("origin", "half"):
            raise ValueError(f"centre must be 'origin' or 'half', got {self.centre!r}")
        if self.error_scale <= 0 or self.rate_scale <= 0 or self.du_max <= 0:
            raise ValueError("error_scale, rate_scale and du_max must be positive")
        self.u_limits = tuple(float(v) for v in self.u_limits)

    def to_dict(self):
        return asdict(self)


@dataclass
class SimTrace:
    time: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    setpoint: np.ndarray
    e: np.ndarray
    de: np.ndarray
    u: np.ndarray
    Q1: np.ndarray
    ok: bool = True

    def itae(self) -> float:
        return itae(self.e) if self.ok else LARGE

    def to_csv(self, path):
        cols = ["time", "H1", "H2", "setpoint", "e", "de", "u", "Q1"]
        data = np.column_stack([getattr(self, c) for c in cols])
        np.savetxt(path, data, delimiter=",", header=",".join(cols), comments="", fmt="%.10g")


# --- plant -------------------------------------------------------------------


@numba.njit(cache=True)
def _ssqrt(x):
    return math.sqrt(x) if x >= 0.0 else -math.sqrt(-x)


@numba.njit(cache=True)
def _derivs(H1, H2, Q1, Q2, A1, A2, a1, a2, a3, outlet1):
    H1 = max(H1, 0.0)
    H2 = max(H2, 0.0)
    between = a3 * _ssqrt(H1 - H2)
    out1 = a1 * math.sqrt(H1) if outlet1 else 0.0
    return (Q1 - out1 - between) / A1, (Q2 - a2 * math.sqrt(H2) + between) / A2


def plant_derivatives(H1, H2, Q1, Q2, config: PlantConfig) -> tuple:
    """``(dH1/dt, dH2/dt)``; negative levels count as empty."""
    return _derivs(float(H1), float(H2), float(Q1), float(Q2), config.A1, config.A2,
                   config.alpha1, config.alpha2, config.alpha3, config.outlet1_open)


@numba.njit(cache=True)
def _advance(H1, H2, Q1, h, steps, A1, A2, a1, a2, a3, outlet1):
    for _ in range(steps):
        k1a, k1b = _derivs(H1, H2, Q1, 0.0, A1, A2, a1, a2, a3, outlet1)
        k2a, k2b = _derivs(H1 + 0.5 * h * k1a, H2 + 0.5 * h * k1b, Q1, 0.0, A1, A2, a1, a2, a3, outlet1)
        k3a, k3b = _derivs(H1 + 0.5 * h * k2a, H2 + 0.5 * h * k2b, Q1, 0.0, A1, A2, a1, a2, a3, outlet1)
        k4a, k4b = _derivs(H1 + h * k3a, H2 + h * k3b, Q1, 0.0, A1, A2, a1, a2, a3, outlet1)
        H1 = max(H1 + h * (k1a + 2.0 * k2a + 2.0 * k3a + k4a) / 6.0, 0.0)
        H2 = max(H2 + h * (k1b + 2.0 * k2b + 2.0 * k3b + k4b) / 6.0, 0.0)
    return H1, H2


# kernel layout: A1, A2, alpha1, alpha2, alpha3, outlet1, Ts, substeps, delay samples, H1(0), H2(0)
def _plant_vector(c: PlantConfig) -> np.ndarray:
    return np.array([c.A1, c.A2, c.alpha1, c.alpha2, c.alpha3, float(c.outlet1_open), c.Ts,
                     c.substeps, c.delay_samples, c.H0[0], c.H0[1]])


def _ctrl_vector(c: ControllerConfig) -> np.ndarray:
    return np.array([c.e_gain / c.error_scale, c.de_gain / c.rate_scale, c.du_max,
                     c.u_limits[0], c.u_limits[1], c.output_gain, float(c.centre == "origin")])


@numba.njit(cache=True)
def _run(p, it2, pv, cv, sp, u_given, open_loop, rec):
    """Simulate one plant. Fills ``rec`` (N_p, 8) if given; returns (ITAE, ok)."""
    A1, A2, a1, a2, a3 = pv[0], pv[1], pv[2], pv[3], pv[4]
    outlet1 = pv[5] > 0.5
    Ts = pv[6]
    steps = int(pv[7])
    delay = int(pv[8])
    H1, H2 = pv[9], pv[10]
    h = Ts / steps
    n = sp.shape[0]
    issued = np.zeros(n)
    u = 0.0
    e_prev = 0.0
    total = 0.0
    hold = 0.5
    if not open_loop and cv[6] > 0.5:
        hold = it2_kernel(p, 0.0, 0.0) if it2 else t1_kernel(p, 0.0, 0.0)
    for t in range(n):
        e = sp[t] - H2
        de = 0.0 if t == 0 else (e - e_prev) / Ts
        e_prev = e
        if open_loop:
            u = u_given[t]
        else:
            if it2:
                y = it2_kernel(p, e * cv[0], de * cv[1])
            else:
                y = t1_kernel(p, e * cv[0], de * cv[1])
            u += 2.0 * cv[2] * (y - hold) * Ts
            u = min(max(u, cv[3]), cv[4])
        issued[t] = cv[5] * u
        q = issued[t - delay] if t >= delay else 0.0
        if rec.shape[0] > 0:
            rec[t, 0] = t * Ts
            rec[t, 1] = H1
            rec[t, 2] = H2
            rec[t, 3] = sp[t]
            rec[t, 4] = e
            rec[t, 5] = de
            rec[t, 6] = u
            rec[t, 7] = q
        total += (t + 1) * abs(e)
        H1, H2 = _advance(H1, H2, q, h, steps, A1, A2, a1, a2, a3, outlet1)
        if not (math.isfinite(H1) and math.isfinite(H2)):
            return LARGE, False
    return total, True


@numba.njit(cache=True)
def _batch_itae(P, it2, plants, cv, sps, weights):
    out = np.empty(P.shape[0])
    empty = np.zeros((0, 8))
    dummy = np.zeros(1)
    for i in range(P.shape[0]):
        s = 0.0
        for k in range(plants.shape[0]):
            val, ok = _run(P[i], it2, plants[k], cv, sps[k], dummy, False, empty)
            s += weights[k] * (val if ok else LARGE)
        out[i] = s
    return out


def itae(errors) -> float:
    """``sum_t t * |e(t)|`` with ``t`` counted from 1."""
    e = np.abs(np.asarray(errors, dtype=float))
    return float(np.sum(np.arange(1, e.size + 1) * e))


def _trace(rec, ok) -> SimTrace:
    return SimTrace(*(rec[:, i].copy() for i in range(8)), ok=ok)


def simulate_closed_loop(flc, config: PlantConfig, controller: ControllerConfig = None) -> SimTrace:
    """Run one plant under a fuzzy controller (an :class:`FlcGenome`)."""
    controller = controller or ControllerConfig()
    rec = np.zeros((config.horizon, 8))
    _, ok = _run(flc.packed(), flc.kind == IT2, _plant_vector(config), _ctrl_vector(controller),
                 config.setpoint_signal(), np.zeros(1), False, rec)
    return _trace(rec, ok)


def simulate_open_loop(u, config: PlantConfig, controller: ControllerConfig = None) -> SimTrace:
    """Run one plant with a prescribed control sequence ``u`` (one value per sample)."""
    controller = controller or ControllerConfig()
    u = np.asarray(u, dtype=float)
    if u.shape != (config.horizon,):
        raise ValueError(f"need {config.horizon} control values, got {u.shape}")
    rec = np.zeros((config.horizon, 8))
    _, ok = _run(np.zeros(23), False, _plant_vector(config), _ctrl_vector(controller),
                 config.setpoint_signal(), u, True, rec)
    return _trace(rec, ok)


def weighted_itae(genomes, kind: str, configs=None, weights=DEFAULT_WEIGHTS,
                  controller: ControllerConfig = None) -> np.ndarray:
    """Weighted ITAE sum for a batch of raw task-space genomes."""
    configs = configs if configs is not None else plant_configs()
    controller = controller or ControllerConfig()
    if len(weights) != len(configs):
        raise ValueError("one weight per plant configuration is required")
    horizon = {c.horizon for c in configs}
    if len(horizon) != 1:
        raise ValueError("all plant configurations must share the horizon")
    P = packed_batch(genomes, kind)
    plants = np.array([_plant_vector(c) for c in configs])
    sps = np.array([c.setpoint_signal() for c in configs])
    return _batch_itae(P, kind == IT2, plants, _ctrl_vector(controller), sps, np.asarray(weights, float))


def fitness_from_itae(total) -> np.ndarray:
    return 1.0 / (np.asarray(total, dtype=float) + EPSILON)


def itae_fitness(genome, configs=None, weights=DEFAULT_WEIGHTS, controller: ControllerConfig = None) -> float:
    """Controller fitness ``1 / (sum_p w_p ITAE_p + eps)``; larger is better."""
    total = weighted_itae(genome.genes(), genome.kind, configs, weights, controller)[0]
    return float(fitness_from_itae(total))


@dataclass
class FlcBounds:
    """Task-space gene ranges for the controller chromosomes (normalized inputs)."""

    mean: tuple = (-1.5, 1.5)
    std: tuple = (MIN_STD, 2.0)
    consequent: tuple = (0.0, 1.0)

    def vectors(self, kind: str):
        n_std = 3 if kind == T1 else 6
        block = [self.mean] * 3 + [self.std] * n_std
        rows = block + block + [self.consequent] * 5
        lo, hi = np.array(rows).T
        return lo, hi


def flc_task(kind: str, configs=None, weights=DEFAULT_WEIGHTS, controller: ControllerConfig = None,
             bounds: FlcBounds = None) -> TaskDefinition:
    """Controller design task for MTGA/SOEA/MFEA (maximize the ITAE fitness)."""
    bounds = bounds or FlcBounds()
    lo, hi = bounds.vectors(kind)
    assert lo.shape[0] == N_GENES[kind]

    def objective(x):
        return fitness_from_itae(weighted_itae(x, kind, configs, weights, controller))

    return TaskDefinition(f"flc-{kind}", lo, hi, objective, direction=MAXIMIZE,
                          repair=lambda g: repair_genes(g, kind))


def flc_tasks(**kwargs) -> tuple:
    """``(T1 task, IT2 task)`` sharing plant, weight and scaling settings."""
    return flc_task(T1, **kwargs), flc_task(IT2, **kwargs)
