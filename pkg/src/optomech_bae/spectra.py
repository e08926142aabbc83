"""Collective quadrature spectra, homodyne output spectra and the Duan test.

Spectra are symmetrised densities against ``d omega / 2 pi``.  The homodyne
quadrature of a field ``a`` at local-oscillator angle theta is

    X^theta = (i a e^{-i theta} - i a^+ e^{i theta}) / sqrt2,

which puts the Sigma block of the first-order cavity field at ``theta = 0``
and the Delta block at ``theta = pi/2``.
"""
from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ExtractionIllConditioned, NotConverged, PhaseConditionViolated, ValidationError,
)
from .linfield import (
    Bath, FieldFn, LinearField, bogolyubov_bath_correlators, combine, dagger_of,
    original_correlators, shifted, symmetrized_spectrum, to_original_basis,
)
from .model import (
    ProbeParams, SystemParams, bogolyubov, chi_cavity, effective_probe,
)
from .perturb import (
    cavity_transfer, mechanical_fields, quadrature_coefficients, solve_orders,
)

DEFAULT_GRID_POINTS = 4001
WINDOW_FACTOR = 50.0
INTEGRATION_TOL = 1e-8
EXTRACTION_FLOOR = 1e-12


class QuadratureSelector(enum.Enum):
    X_SIGMA = ("Sigma", 0)
    Y_SIGMA = ("Sigma", 1)
    X_DELTA = ("Delta", 0)
    Y_DELTA = ("Delta", 1)

    @property
    def collective(self) -> str:
        return self.value[0]

    @property
    def theta_q(self) -> float:
        return 0.0 if self.value[1] == 0 else math.pi / 2

    @property
    def short(self) -> str:
        return ("X" if self.value[1] == 0 else "Y") + self.collective


class Method(enum.Enum):
    DIRECT = "DirectQuadrature"
    OUTPUT = "OutputExtraction"


# --------------------------------------------------------------------------
# result containers

def fingerprint(params: SystemParams, probe: ProbeParams | None = None, **extra) -> dict:
    meta = {"params": asdict(params), "probe": asdict(probe) if probe else None, **extra}
    blob = json.dumps(meta, sort_keys=True, default=str).encode()
    meta["sha256"] = hashlib.sha256(blob).hexdigest()
    return meta


@dataclass
class SpectrumCurve:
    grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)
    # named additive components evaluated on the grid (e.g. background, mechanical)
    parts: dict[str, np.ndarray] = field(default_factory=dict)
    # omega -> values, for adaptive integration off the grid
    evaluator: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    part_evaluators: dict[str, Callable] = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, grid, values, meta=None, parts=None, evaluator=None,
              part_evaluators=None) -> "SpectrumCurve":
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ValidationError("grid and values must be 1-d arrays of equal length")
        if grid.size > 1 and np.any(np.diff(grid) <= 0):
            raise ValidationError("grid must be strictly increasing")
        if np.any(values < -1e-12 * max(1.0, float(np.max(np.abs(values), initial=0.0)))):
            raise ValidationError(f"negative spectral density {np.min(values):.3e}")
        return cls(grid, np.clip(values, 0.0, None), dict(meta or {}), dict(parts or {}),
                   evaluator, dict(part_evaluators or {}))


@dataclass(frozen=True)
class DuanResult:
    varXSigma: float
    varYDelta: float
    duan_sum: float
    violated: bool
    method: Method

    @classmethod
    def from_variances(cls, vx: float, vy: float, method: Method) -> "DuanResult":
        if not (vx > 0 and vy > 0):
            raise ValidationError(f"variances must be positive, got {vx!r}, {vy!r}")
        s = vx + vy
        return cls(vx, vy, s, bool(s < 1.0), method)


@dataclass(frozen=True)
class ReadoutSetting:
    theta: float
    phi_p: float
    phi_q: float
    selector: QuadratureSelector


#: homodyne angle and probe phases giving access to each shifted quadrature
READOUT_TABLE = (
    ReadoutSetting(0.0, 0.0, 0.0, QuadratureSelector.X_SIGMA),
    ReadoutSetting(0.0, math.pi / 2, math.pi / 2, QuadratureSelector.Y_SIGMA),
    ReadoutSetting(math.pi / 2, 0.0, math.pi, QuadratureSelector.Y_DELTA),
    ReadoutSetting(math.pi / 2, math.pi / 2, -math.pi / 2, QuadratureSelector.X_DELTA),
)


def protected_pair(sel: QuadratureSelector) -> tuple[QuadratureSelector, QuadratureSelector]:
    """The commuting pair containing ``sel``."""
    if sel in (QuadratureSelector.X_SIGMA, QuadratureSelector.Y_DELTA):
        return QuadratureSelector.X_SIGMA, QuadratureSelector.Y_DELTA
    return QuadratureSelector.X_DELTA, QuadratureSelector.Y_SIGMA


# --------------------------------------------------------------------------
# fields

_R2 = math.sqrt(2.0)


def _quadratures(b1: FieldFn, b2: FieldFn, d: float, shift: bool) -> dict:
    k = 1 if shift else 0
    b1p, b1dm = shifted(b1, k, d), shifted(dagger_of(b1), -k, d)
    b2m, b2dp = shifted(b2, -k, d), shifted(dagger_of(b2), k, d)
    X1 = combine((1 / _R2, b1p), (1 / _R2, b1dm))
    X2 = combine((1 / _R2, b2m), (1 / _R2, b2dp))
    Y1 = combine((-1j / _R2, b1p), (1j / _R2, b1dm))
    Y2 = combine((-1j / _R2, b2m), (1j / _R2, b2dp))
    S = QuadratureSelector
    return {S.X_SIGMA: combine((1, X1), (1, X2)), S.X_DELTA: combine((1, X1), (-1, X2)),
            S.Y_SIGMA: combine((1, Y1), (1, Y2)), S.Y_DELTA: combine((1, Y1), (-1, Y2))}


def shifted_quadrature_field(sel: QuadratureSelector, order: int, params: SystemParams,
                             probe: ProbeParams | None = None,
                             exact: bool | None = None) -> FieldFn:
    """Order-``order`` part of a frequency-shifted collective quadrature.

    X_1 = (b_1(w+d) + b_1^+(w-d))/sqrt2, X_2 = (b_2(w-d) + b_2^+(w+d))/sqrt2,
    Y likewise with -i(b - b^+); Sigma = 1 + 2, Delta = 1 - 2.
    """
    if order < 0:
        raise ValidationError("order must be >= 0")
    if order > 0 and probe is None:
        raise ValidationError("probe parameters are required for order > 0")
    sol = solve_orders(params, probe or ProbeParams(), order, exact)[order]
    return mechanical_fields_quadratures(params, sol)[sel]


def mechanical_fields_quadratures(params: SystemParams, sol) -> dict:
    """All four shifted collective quadratures of an ``OrderedSolution``."""
    b1, b2 = mechanical_fields(params, sol)
    return _quadratures(b1, b2, params.delta, shift=True)


def unshifted_quadrature_field(sel: QuadratureSelector, params: SystemParams) -> FieldFn:
    """Order-0 collective quadrature built from b_j(w) without frequency shifts."""
    sol = solve_orders(params, ProbeParams(), 0)[0]
    b1, b2 = mechanical_fields(params, sol)
    return _quadratures(b1, b2, params.delta, shift=False)[sel]


def field_spectrum(F: FieldFn, omega, params: SystemParams, basis: str = "original") -> np.ndarray:
    """Symmetrised spectrum of a field carrying Bogolyubov or original labels."""
    omega = np.asarray(omega, dtype=float)
    f = F(omega)
    if basis == "original":
        return symmetrized_spectrum(to_original_basis(f, params), None, original_correlators(params))
    if basis == "bogolyubov":
        return symmetrized_spectrum(f, None, bogolyubov_bath_correlators(params))
    raise ValueError(f"unknown basis {basis!r}")


def default_window(params: SystemParams) -> float:
    """Half-width ``50 Gamma_eff`` with Gamma_eff = gamma + 4 calG^2 Re chi_a(delta)."""
    calG = bogolyubov(params).calG
    gamma_eff = params.gamma + 4 * calG**2 * float(np.real(chi_cavity(params.delta, params)))
    return WINDOW_FACTOR * gamma_eff


def default_grid(params: SystemParams, points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    if points < 2:
        raise ValidationError("grid points must be >= 2")
    W = default_window(params)
    return np.linspace(-W, W, points)


def quadrature_spectrum(sel: QuadratureSelector, params: SystemParams, grid=None,
                        basis: str = "original") -> SpectrumCurve:
    """Spectrum of an order-0 shifted collective quadrature."""
    grid = default_grid(params) if grid is None else np.asarray(grid, dtype=float)
    F = shifted_quadrature_field(sel, 0, params)

    def ev(w):
        return field_spectrum(F, w, params, basis)

    return SpectrumCurve.build(grid, ev(grid), fingerprint(params, None, kind="quadrature",
                                                           selector=sel.short),
                               evaluator=ev)


# --------------------------------------------------------------------------
# output field

def homodyne_field(a: FieldFn, theta: float, params: SystemParams) -> FieldFn:
    """Output quadrature ``X^theta`` of ``a_out = sqrt(kappa_E) a - a_E^in``."""
    def a_in(omega):
        return LinearField.noise(omega, Bath.EXT)

    a_out = combine((math.sqrt(params.kappa_E), a), (-1, a_in))
    ph = complex(math.cos(theta), -math.sin(theta))
    return combine((1j * ph / _R2, a_out), (-1j * ph.conjugate() / _R2, dagger_of(a_out)))


def background_spectrum(theta: float, params: SystemParams, grid) -> np.ndarray:
    """Reflected cavity-bath noise ``|kappa_E chi_a - 1|^2 (n_E + 1/2)`` by contraction."""
    def reflected(omega):
        r = params.kappa_E * chi_cavity(omega, params) - 1
        return LinearField.noise(omega, Bath.EXT, coeff=r)

    ph = complex(math.cos(theta), -math.sin(theta))
    X = combine((1j * ph / _R2, reflected), (-1j * ph.conjugate() / _R2, dagger_of(reflected)))
    return symmetrized_spectrum(X(np.asarray(grid, dtype=float)), None, original_correlators(params))


def _probe_on(probe: ProbeParams | None) -> bool:
    return probe is not None and probe.lam * probe.scale > 0


def mechanical_output_density(theta: float, params: SystemParams, probe: ProbeParams) -> Callable:
    """omega -> S^(1): first-order mechanical contribution to the homodyne spectrum."""
    k = quadrature_coefficients(probe)
    c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
    S = QuadratureSelector
    weights = ((S.X_SIGMA, c2 * k.A_plus**2), (S.Y_SIGMA, c2 * k.B_plus**2),
               (S.X_DELTA, s2 * k.B_minus**2), (S.Y_DELTA, s2 * k.A_minus**2))
    fields = [(shifted_quadrature_field(sel, 0, params), w) for sel, w in weights if w != 0.0]

    def dens(omega):
        omega = np.asarray(omega, dtype=float)
        acc = np.zeros(omega.shape)
        for F, w in fields:
            acc = acc + w * field_spectrum(F, omega, params)
        return np.abs(cavity_transfer(omega, params)) ** 2 * acc
    return dens


def output_spectrum(theta: float, params: SystemParams, probe: ProbeParams | None,
                    grid=None) -> SpectrumCurve:
    """Homodyne output spectrum ``S_bg + kappa_E S^(1)`` to first order in the probes."""
    probe_on = _probe_on(probe)
    if grid is None:
        grid = default_grid(params) if params.G_minus > params.G_plus else np.linspace(-1, 1, 401)
    grid = np.asarray(grid, dtype=float)
    if probe_on:
        ep = effective_probe(params, probe)
        if not ep.bae_phase_ok:
            raise PhaseConditionViolated(
                f"phi_1 - phi_2 = {ep.phase_difference:.6g} is not 0 or pi")
        dens = mechanical_output_density(theta, params, probe)

        def mech(w):
            return params.kappa_E * dens(w)
    else:
        def mech(w):
            return np.zeros(np.shape(w))

    def ev(w):
        return background_spectrum(theta, params, w) + mech(w)

    bg, mc = background_spectrum(theta, params, grid), mech(grid)
    return SpectrumCurve.build(grid, bg + mc,
                               fingerprint(params, probe, kind="output", theta=theta),
                               parts={"background": bg, "mechanical": mc}, evaluator=ev,
                               part_evaluators={"background": lambda w: background_spectrum(
                                   theta, params, w), "mechanical": mech})


def _extraction_target(theta: float, params: SystemParams, probe: ProbeParams):
    k = quadrature_coefficients(probe)
    S = QuadratureSelector
    if math.isclose(math.cos(theta) ** 2, 1.0, abs_tol=1e-12):
        cands = ((S.X_SIGMA, k.A_plus**2), (S.Y_SIGMA, k.B_plus**2))
    elif math.isclose(math.sin(theta) ** 2, 1.0, abs_tol=1e-12):
        cands = ((S.X_DELTA, k.B_minus**2), (S.Y_DELTA, k.A_minus**2))
    else:
        raise ExtractionIllConditioned(f"theta={theta!r} mixes quadrature blocks")
    (s0, w0), (s1, w1) = cands
    top = max(w0, w1)
    if top == 0.0 or min(w0, w1) > EXTRACTION_FLOOR * top:
        raise ExtractionIllConditioned(
            "probe phases do not isolate a single quadrature at this homodyne angle")
    return (s0, w0) if w0 >= w1 else (s1, w1)


def extract_quadrature_spectrum(curve: SpectrumCurve, theta: float, params: SystemParams,
                                probe: ProbeParams) -> SpectrumCurve:
    """Invert the output spectrum for the shifted quadrature selected by (theta, phases)."""
    sel, coef2 = _extraction_target(theta, params, probe)
    window = curve.grid

    def transfer(w):
        return params.kappa_E * np.abs(cavity_transfer(w, params)) ** 2 * coef2

    T = transfer(window)
    if np.min(T) < EXTRACTION_FLOOR * np.max(T):
        raise ExtractionIllConditioned("output transfer prefactor vanishes inside the window")
    if "mechanical" in curve.parts:
        mech = curve.parts["mechanical"]
    else:
        mech = curve.values - background_spectrum(theta, params, window)
    evaluator = None
    if "mechanical" in curve.part_evaluators:
        def evaluator(w):
            return curve.part_evaluators["mechanical"](w) / transfer(w)
    elif curve.evaluator is not None:
        def evaluator(w):
            return (curve.evaluator(w) - background_spectrum(theta, params, w)) / transfer(w)
    meta = dict(curve.meta, kind="extracted", selector=sel.short)
    return SpectrumCurve.build(window, mech / T, meta, evaluator=evaluator)


# --------------------------------------------------------------------------
# integration

# Gauss-Kronrod 7/15 nodes and weights on [-1, 1]
_XGK = np.array([0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                 0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                 0.207784955007898467600689403773245, 0.000000000000000000000000000000000])
_WGK = np.array([0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                 0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                 0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def adaptive_gk(f: Callable[[np.ndarray], np.ndarray], edges: Sequence[float],
                tol: float = INTEGRATION_TOL, max_depth: int = 48,
                max_intervals: int = 100_000) -> float:
    """Globally adaptive G7/K15 quadrature of a vectorised integrand.

    ``edges`` gives the initial partition.  Each interval is bisected until its
    Kronrod-Gauss difference falls below its share of ``tol`` (absolute).
    """
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    depth = np.zeros(lo.shape, dtype=int)
    total_len = float(edges[-1] - edges[0])
    result = 0.0
    while lo.size:
        c, h = (lo + hi) / 2, (hi - lo) / 2
        x = c[:, None] + h[:, None] * _NODES[None, :]
        y = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
        if not np.all(np.isfinite(y)):
            raise NotConverged("integrand is not finite")
        k = h * (y @ _WK)
        g = h * (y @ _WG15)
        err = np.abs(k - g)
        ok = err <= tol * (hi - lo) / total_len
        result += float(np.sum(k[ok]))
        lo, hi, c, depth = lo[~ok], hi[~ok], c[~ok], depth[~ok] + 1
        if np.any(depth > max_depth):
            raise NotConverged(f"adaptive quadrature exceeded depth {max_depth}")
        if 2 * lo.size > max_intervals:
            raise NotConverged(f"adaptive quadrature needs more than {max_intervals} intervals; "
                               "tolerance is below the integrand's rounding noise")
        lo, hi, depth = (np.concatenate([lo, c]), np.concatenate([c, hi]),
                         np.concatenate([depth, depth]))
    return result


def _tail(f: Callable, W: float, sign: int) -> float:
    """Integral of f over |omega| > W on one side from a Lorentzian fit."""
    s1, s2 = (float(v) for v in f(np.array([sign * W, sign * 2 * W])))
    if s1 <= 0.0:
        if s2 <= 0.0:
            return 0.0
        raise NotConverged("spectrum grows outside the integration window")
    if s2 / s1 > 0.5:
        raise NotConverged("spectrum does not decay outside the integration window; "
                           "no tail model applies")
    c2 = (4 * W * W * s2 - W * W * s1) / (s1 - s2)
    if c2 <= 0.0:
        return s1 * W
    c = math.sqrt(c2)
    A = s1 * (W * W + c2)
    return A / c * (math.pi / 2 - math.atan(W / c))


def integrate_variance(curve: SpectrumCurve | Callable, window: float | None = None,
                       tol: float = INTEGRATION_TOL, tails: bool = True,
                       points: Sequence[float] = (0.0,)) -> float:
    """``int d omega / 2 pi`` of a spectrum over ``|omega| <= window`` plus Lorentzian tails.

    Adaptive when the curve (or callable) can be evaluated off-grid; otherwise a
    composite Simpson rule on the stored grid with a Richardson error check.
    """
    f = curve if callable(curve) else curve.evaluator
    if f is None:
        return _integrate_sampled(curve, tol)
    if window is None:
        if callable(curve):
            raise ValidationError("window is required for a bare callable")
        window = float(max(abs(curve.grid[0]), abs(curve.grid[-1])))
    W = float(window)
    inner = sorted({-W, W, *(p for p in points if -W < p < W)})
    edges = []
    for a, b in zip(inner[:-1], inner[1:]):
        edges.extend(np.linspace(a, b, 33)[:-1])
    edges.append(W)
    total = adaptive_gk(f, edges, tol * 2 * math.pi)
    if tails:
        total += _tail(f, W, +1) + _tail(f, W, -1)
    return total / (2 * math.pi)


def _integrate_sampled(curve: SpectrumCurve, tol: float) -> float:
    from scipy.integrate import simpson

    g, v = curve.grid, curve.values
    full = simpson(v, x=g)
    if g.size >= 5:
        half = simpson(v[::2], x=g[::2])
        if abs(full - half) / 15 > tol * 2 * math.pi:
            raise NotConverged("sampled grid too coarse for the requested tolerance")
    return float(full) / (2 * math.pi)


def integrate_whole_line(f: Callable, points: Sequence[float], scale: float,
                         tol: float = 1e-10) -> float:
    """``int_R f d omega / 2 pi`` with the outer half-lines mapped by omega = p +- s tan t."""
    pts = sorted(points)
    lo, hi = pts[0], pts[-1]
    total = 0.0
    if len(pts) > 1:
        edges = []
        for a, b in zip(pts[:-1], pts[1:]):
            edges.extend(np.linspace(a, b, 17)[:-1])
        edges.append(hi)
        total += adaptive_gk(f, edges, tol)
    for p, sgn in ((hi, 1.0), (lo, -1.0)):
        def g(t, p=p, sgn=sgn):
            return f(p + sgn * scale * np.tan(t)) * scale / np.cos(t) ** 2
        total += adaptive_gk(g, np.linspace(0.0, math.pi / 2, 33), tol)
    return total / (2 * math.pi)


# --------------------------------------------------------------------------
# Duan

def _direct_variances(params: SystemParams, window: float, tol: float):
    S = QuadratureSelector
    out = []
    for sel in (S.X_SIGMA, S.Y_DELTA):
        F = shifted_quadrature_field(sel, 0, params)
        out.append(integrate_variance(lambda w, F=F: field_spectrum(F, w, params),
                                      window, tol))
    return out


def _extracted_variances(params: SystemParams, probe: ProbeParams, window: float, tol: float):
    out = []
    for row in (READOUT_TABLE[0], READOUT_TABLE[2]):
        pr = probe.replace(phi_p=row.phi_p, phi_q=row.phi_q)
        ep = effective_probe(params, pr)
        if not ep.bae_phase_ok:
            raise PhaseConditionViolated("readout table phases violate the BAE condition")
        grid = np.linspace(-window, window, 257)
        curve = output_spectrum(row.theta, params, pr, grid)
        ext = extract_quadrature_spectrum(curve, row.theta, params, pr)
        out.append(integrate_variance(ext, window, tol))
    return out


def duan_quantity(params: SystemParams, probe: ProbeParams | None = None,
                  method: Method | str = Method.DIRECT, window: float | None = None,
                  tol: float = INTEGRATION_TOL) -> DuanResult:
    """Integrated ``<dX_Sigma^2> + <dY_Delta^2>`` of the shifted quadratures."""
    method = Method(method) if not isinstance(method, Method) else method
    W = default_window(params) if window is None else window
    if method is Method.DIRECT:
        vx, vy = _direct_variances(params, W, tol)
    else:
        if not _probe_on(probe):
            raise ValidationError("OutputExtraction needs nonzero probe amplitudes")
        vx, vy = _extracted_variances(params, probe, W, tol)
    return DuanResult.from_variances(vx, vy, method)


def sweep_duan(params: SystemParams, probe: ProbeParams | None, ratios: Sequence[float],
               method: Method | str = Method.DIRECT, threads: int = 1) -> list[tuple[float, DuanResult]]:
    """Duan quantity at each G_+/G_- with G_- fixed; results in input order."""
    for r in ratios:
        if not 0.0 <= r < 1.0:
            raise ValidationError(f"ratio {r!r} must lie in [0, 1)")

    def one(r):
        return r, duan_quantity(params.replace(G_plus=r * params.G_minus), probe, method)

    if threads <= 1:
        return [one(r) for r in ratios]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(one, ratios))
