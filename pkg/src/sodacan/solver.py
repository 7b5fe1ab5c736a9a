"""Radial moving-boundary solver for u_t = Delta_p u, and probes built on it.

The scheme is conservative on a uniform radial grid: face fluxes
(g^2 + s^2)^((p-2)/2) s of the one-sided slopes s, weighted by r^(n-1).
Explicit Euler steps are taken with dt = safety / (largest coefficient sum),
which makes every update a convex combination of neighbouring values, so the
discrete maximum and comparison principles hold.

Results are numerical evidence only. Nothing here proves convergence of the
regularized scheme to the Perron solution.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import kernels
from .geometry import Params
from .report import csv_text

# nodes closer than this fraction of a cell to the moving boundary are held at the boundary value
FREEZE_FRACTION = 0.5
GEOMETRIES = ("soda_can", "punctured_cylinder", "cylinder")


class SolverError(RuntimeError):
    pass


@dataclass
class SolveConfig:
    params: Params
    boundary_data: Callable
    grid_points: int = 256
    dt_safety: float = 0.9
    g_reg: Optional[float] = None
    probe_radius: float = 0.05
    t_end: Optional[float] = None
    geometry: str = "soda_can"
    # (r_in, r_out, t_start, t_end) for the fixed annulus used in validation runs
    cylinder: Optional[Tuple[float, float, float, float]] = None
    initial_data: Optional[Callable] = None
    origin_value: Optional[float] = None
    record_points: int = 1000
    snapshots: int = 40
    dt_min: float = 1e-14
    # update the solution range after every step instead of at snapshots only
    track_extrema: bool = False

    def __post_init__(self):
        if self.grid_points < 64:
            raise ValueError("grid_points must be at least 64")
        if not 0 < self.dt_safety <= 1:
            raise ValueError("dt_safety must lie in (0, 1]")
        if self.g_reg is None:
            # for p < 2 the regularization also caps the diffusivity, which sets the step size
            self.g_reg = 1e-4 if self.params.p >= 2 else 1e-2
        if not self.g_reg > 0:
            raise ValueError("g_reg must be positive")
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"geometry must be one of {GEOMETRIES}")
        if self.geometry == "cylinder" and self.cylinder is None:
            raise ValueError("cylinder geometry needs (r_in, r_out, t_start, t_end)")

    # geometry helpers -----------------------------------------------------

    def grid(self) -> np.ndarray:
        a, b = self.radial_span()
        return np.linspace(a, b, self.grid_points + 1)

    def radial_span(self) -> Tuple[float, float]:
        if self.geometry == "cylinder":
            return float(self.cylinder[0]), float(self.cylinder[1])
        return 0.0, 1.0

    def inner_radius(self, t: float) -> float:
        """Position of the left Dirichlet boundary at time t."""
        if self.geometry == "soda_can":
            th, l = self.params.theta, self.params.l
            return (max(-t, 0.0) / th) ** (1.0 / l)
        if self.geometry == "cylinder":
            return float(self.cylinder[0])
        return 0.0

    def time_span(self) -> Tuple[float, float]:
        if self.geometry == "cylinder":
            return float(self.cylinder[2]), float(self.cylinder[3])
        if self.geometry == "soda_can":
            th, l = self.params.theta, self.params.l
            start = -th * (1 - 1.0 / self.grid_points)
            # stop once the boundary is well inside the probe, and no later than the parabolic time -r^2
            default = -min(th * (self.probe_radius / 4) ** l, self.probe_radius ** 2)
            end = self.t_end if self.t_end is not None else default
        else:
            start = -1.0
            end = self.t_end if self.t_end is not None else -1e-4
        if not start < end:
            raise ValueError("t_end must come after the start time")
        if self.geometry != "cylinder" and not end < 0:
            raise ValueError("t_end must be negative")
        return start, end

    def f0(self) -> float:
        if self.origin_value is not None:
            return float(self.origin_value)
        return float(self.boundary_data(0.0, 0.0))


@dataclass
class SolveResult:
    config: SolveConfig
    t: np.ndarray
    u_probe: np.ndarray
    inner_radius: np.ndarray
    dt: np.ndarray
    r: np.ndarray
    final_profile: np.ndarray
    final_active: np.ndarray
    snapshots: List[Tuple[float, np.ndarray, np.ndarray]]
    attained_gap: float
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def to_csv(self) -> str:
        return csv_text(["t", "u_probe", "inner_radius", "dt"],
                        zip(self.t, self.u_probe, self.inner_radius, self.dt))

    def summary(self) -> dict:
        return {
            "attained_gap": self.attained_gap,
            "final_u_probe": float(self.u_probe[-1]),
            "t_end": float(self.t[-1]),
            "grid_points": self.config.grid_points,
            "diagnostics": dict(self.diagnostics),
            "evidence_only": True,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


class _Run:
    """State of one solve; several runs can be stepped in lockstep with a shared dt."""

    def __init__(self, cfg: SolveConfig):
        self.cfg = cfg
        self.r = cfg.grid()
        self.dr = self.r[1] - self.r[0]
        self.n = cfg.params.n
        self.p = cfg.params.p
        self.t, self.t_end = cfg.time_span()
        init = cfg.initial_data or cfg.boundary_data
        self.u = np.array(np.broadcast_to(np.asarray(init(self.r, np.full_like(self.r, self.t)), dtype=float),
                                          self.r.shape))
        self.du = np.zeros_like(self.u)
        self.active = np.zeros(self.r.size, dtype=bool)
        self.vmin = math.inf
        self.vmax = -math.inf
        self.clamps = 0
        self.steps = 0
        self.rows: List[Tuple[float, float, float, float]] = []
        self.snaps: List[Tuple[float, np.ndarray, np.ndarray]] = []
        self.next_record = self.t
        self.record_dt = (self.t_end - self.t) / cfg.record_points
        self.next_snap = self.t
        self.snap_dt = (self.t_end - self.t) / max(cfg.snapshots, 1)
        self.dts: List[float] = []
        self.umin = math.inf
        self.umax = -math.inf
        self.lo = self.hi = -1
        self.axis = cfg.geometry == "punctured_cylinder" and self.n >= 2
        self._layout()
        self._seen_data(self.u[self.lo:self.hi])

    def _layout(self):
        """Active index range [lo, hi) and the boundary values at the current time."""
        cfg, t = self.cfg, self.t
        N = self.r.size - 1
        if self.axis:
            lo = 0
            self.rL, self.uL = 0.0, 0.0
        else:
            rb = cfg.inner_radius(t)
            if cfg.geometry == "cylinder":
                lo = 1
            else:
                lo = int(np.searchsorted(self.r, rb + FREEZE_FRACTION * self.dr, side="left"))
            self.rL = rb
            self.uL = float(cfg.boundary_data(rb, t))
            self._seen(self.uL)
        self.rR = self.r[N]
        self.uR = float(cfg.boundary_data(self.r[N], t))
        self._seen(self.uR)
        hi = max(N, lo)
        if lo != self.lo:
            if self.lo >= 0 and lo < self.lo and cfg.geometry == "soda_can":
                # points entering the domain start from the boundary datum at their activation time
                self.u[lo:self.lo] = self.uL
            self.active[:] = False
            self.active[lo:hi] = True
        self.lo, self.hi = lo, hi

    def _seen(self, v: float):
        if v < self.vmin:
            self.vmin = v
        if v > self.vmax:
            self.vmax = v

    def _seen_data(self, vals):
        if vals.size:
            self._seen(float(np.min(vals)))
            self._seen(float(np.max(vals)))

    def next_activation_time(self) -> float:
        """When the moving boundary uncovers the next grid node (soda can only)."""
        cfg = self.cfg
        if cfg.geometry != "soda_can":
            return self.t_end
        j = self.lo - 1
        if j < 1:
            return self.t_end
        th, l = cfg.params.theta, cfg.params.l
        pos = self.r[j] - FREEZE_FRACTION * self.dr
        if pos <= 0:
            return self.t_end
        return min(self.t_end, -th * pos ** l)

    def rate(self) -> float:
        if self.hi <= self.lo:
            return 0.0
        cmax, clamps = kernels.rates(self.u, self.r, self.lo, self.hi, self.rL, self.uL, self.rR, self.uR,
                                     self.axis, float(self.n), float(self.p), float(self.cfg.g_reg), self.du)
        self.clamps += int(clamps)
        return float(cmax)

    def probe(self) -> float:
        rp = self.cfg.probe_radius
        if self.hi <= self.lo or rp < self.rL or rp > self.rR:
            return math.nan
        xs = np.concatenate([[self.rL] if not self.axis else [], self.r[self.lo:self.hi], [self.rR]])
        ys = np.concatenate([[self.uL] if not self.axis else [], self.u[self.lo:self.hi], [self.uR]])
        return float(np.interp(rp, xs, ys))

    def record(self, dt: float, force: bool = False):
        if force or self.t >= self.next_record:
            self.rows.append((self.t, self.probe(), self.rL, dt))
            self.next_record += self.record_dt
        if force or self.t >= self.next_snap:
            sl = slice(self.lo, self.hi)
            self.snaps.append((self.t, self.r[sl].copy(), self.u[sl].copy()))
            self.next_snap += self.snap_dt
            if self.hi > self.lo:
                self.umin = min(self.umin, float(np.min(self.u[sl])))
                self.umax = max(self.umax, float(np.max(self.u[sl])))

    def advance(self, dt: float):
        sl = slice(self.lo, self.hi)
        self.u[sl] += dt * self.du[sl]
        self.t += dt
        self.steps += 1
        self.dts.append(dt)
        self._layout()
        if self.cfg.track_extrema and self.hi > self.lo:
            seg = self.u[self.lo:self.hi]
            self.umin = min(self.umin, float(seg.min()))
            self.umax = max(self.umax, float(seg.max()))

    def result(self) -> SolveResult:
        cfg = self.cfg
        self.record(self.dts[-1] if self.dts else 0.0, force=True)
        rows = np.array(self.rows, dtype=float)
        last_probe = rows[-1, 1]
        gap = abs(last_probe - cfg.f0()) if cfg.geometry != "cylinder" else math.nan
        dts = np.array(self.dts) if self.dts else np.array([0.0])
        diag = {
            "steps": float(self.steps),
            "dt_min": float(np.min(dts)),
            "dt_max": float(np.max(dts)),
            "clamp_activations": float(self.clamps),
            "data_min": self.vmin,
            "data_max": self.vmax,
            "solution_min": self.umin,
            "solution_max": self.umax,
            "backend": kernels.BACKEND,
        }
        return SolveResult(cfg, rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], self.r.copy(), self.u.copy(),
                           self.active.copy(), self.snaps, float(gap), diag)


def _step_all(runs: Sequence[_Run]) -> bool:
    """One lockstep explicit step for every run; returns False when all are done."""
    t = runs[0].t
    t_end = runs[0].t_end
    if t >= t_end - 1e-15 * max(1.0, abs(t_end)):
        return False
    cmax = max(run.rate() for run in runs)
    if cmax == 0.0:
        dt = min(run.next_activation_time() for run in runs) - t
        dt = max(dt, 0.0)
        if dt == 0.0:
            dt = min(t_end - t, 1e-3 * abs(t_end - runs[0].cfg.time_span()[0]))
    else:
        dt = min(run.cfg.dt_safety for run in runs) / cmax
    dt = min(dt, t_end - t)
    if dt < runs[0].cfg.dt_min and t_end - t > runs[0].cfg.dt_min:
        raise SolverError(f"time step underflow at t = {t}: dt = {dt}")
    for run in runs:
        run.record(dt)
        run.advance(dt)
    return True


def solve(config: SolveConfig) -> SolveResult:
    """Integrate from the first time the slice is nonempty to t_end."""
    return solve_lockstep([config])[0]


def solve_lockstep(configs: Sequence[SolveConfig]) -> List[SolveResult]:
    """Solve several problems on the same grid and time span with a common dt.

    A shared time step keeps each update monotone in the union of the states,
    which is what the discrete comparison principle between runs needs.
    """
    runs = [_Run(c) for c in configs]
    ref = runs[0]
    for run in runs[1:]:
        if run.r.size != ref.r.size or run.t != ref.t or run.t_end != ref.t_end or run.p != ref.p:
            raise ValueError("lockstep runs must share grid, time span and p")
    while _step_all(runs):
        pass
    return [run.result() for run in runs]


# probes ----------------------------------------------------------------------

@dataclass(frozen=True)
class NamedProfile:
    """Boundary data 1 - |x| ("one_minus_r", alias "linear") or 0 ("zero")."""

    name: str

    def __post_init__(self):
        if self.name not in ("one_minus_r", "linear", "zero"):
            raise ValueError(f"unknown data profile {self.name!r}")

    def __call__(self, r, t):
        r = np.asarray(r, dtype=float)
        base = 0.0 * r + 0.0 * np.asarray(t, dtype=float)
        return base if self.name == "zero" else base + 1.0 - r


def named_profile(name: str) -> Callable:
    return NamedProfile(name)


def _solve_named(name: str, kw: dict) -> SolveResult:
    return solve(SolveConfig(boundary_data=NamedProfile(name), **kw))


@dataclass
class ProbeReport:
    params: Params
    ladder: Tuple[int, ...]
    gaps: Tuple[float, ...]
    verdict: str
    attain_below: float
    fail_above: float
    finest: Optional[SolveResult] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(), "ladder": list(self.ladder), "gaps": list(self.gaps),
            "verdict": self.verdict, "attain_below": self.attain_below, "fail_above": self.fail_above,
            "note": "numerical evidence from a regularized explicit scheme, not a proof",
        }


def probe_verdict(gaps: Sequence[float], attain_below: float = 0.2, fail_above: float = 0.4) -> str:
    """AttainsData if the finest gap is small and gaps never grow under refinement,
    FailsToAttain if every gap is large and they never shrink."""
    g = np.asarray(gaps, dtype=float)
    diffs = np.diff(g)
    if g[-1] < attain_below and np.all(diffs <= 0):
        return "AttainsData"
    if np.all(g > fail_above) and np.all(diffs >= 0):
        return "FailsToAttain"
    return "Inconclusive"


def regularity_probe(params: Params, data: Union[str, Callable] = "one_minus_r",
                     ladder: Sequence[int] = (64, 128, 256), probe_cells: float = 8.0,
                     attain_below: float = 0.2, fail_above: float = 0.4, workers: int = 1,
                     **solve_kw) -> ProbeReport:
    """Run the solver at several resolutions and judge whether data are attained at the origin.

    The probe sits probe_cells grid cells from the axis, so finer grids look
    closer to the origin; each run stops when the moving boundary reaches a
    quarter of the probe radius. With workers > 1 and a named profile the
    resolutions run in separate processes.
    """
    configs = [dict(params=params, grid_points=int(N), probe_radius=probe_cells / N, **solve_kw)
               for N in ladder]
    if workers > 1 and isinstance(data, str):
        with ProcessPoolExecutor(max_workers=min(workers, len(configs))) as ex:
            results = list(ex.map(_solve_named, [data] * len(configs), configs))
    else:
        f = named_profile(data) if isinstance(data, str) else data
        results = [solve(SolveConfig(boundary_data=f, **c)) for c in configs]
    gaps = [res.attained_gap for res in results]
    verdict = probe_verdict(gaps, attain_below, fail_above)
    return ProbeReport(params, tuple(int(x) for x in ladder), tuple(float(x) for x in gaps), verdict,
                       attain_below, fail_above, results[-1])


@dataclass
class DominationReport:
    precondition_margin: float
    worst_margin: float
    slack: float
    points: int

    @property
    def passed(self) -> bool:
        return self.precondition_margin >= -self.slack and self.worst_margin >= -self.slack

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


class PreconditionError(ValueError):
    pass


def barrier_domination_check(result: SolveResult, barrier: Callable, offset: float,
                             slack: float = 1e-3, boundary_samples: int = 400) -> DominationReport:
    """Check offset - barrier <= u <= offset + barrier on every recorded profile.

    The data must first satisfy |f - offset| <= barrier on the sampled
    lateral boundary and outer wall; otherwise PreconditionError.
    """
    cfg = result.config
    f = cfg.boundary_data
    t0, t1 = cfg.time_span()
    ts = np.linspace(t0, t1, boundary_samples)
    rb = np.array([cfg.inner_radius(t) for t in ts])
    keep = rb > 0
    br = np.concatenate([rb[keep], np.full(ts.size, cfg.grid()[-1])])
    bt = np.concatenate([ts[keep], ts])
    bval = np.asarray(f(br, bt), dtype=float)
    pre = float(np.min(np.asarray(barrier(br, bt), dtype=float) - np.abs(bval - offset)))
    if pre < -slack:
        raise PreconditionError(f"boundary data exceed the barrier by {-pre:g}")
    worst = math.inf
    count = 0
    for t, r, u in result.snapshots:
        if r.size == 0:
            continue
        b = np.asarray(barrier(r, np.full_like(r, t)), dtype=float)
        worst = min(worst, float(np.min(b - np.abs(u - offset))))
        count += r.size
    return DominationReport(pre, worst if count else 0.0, slack, count)
