"""Edge transmission models.

Each model describes the random waiting time for an infection to cross a
single edge once the upstream endpoint is infected. Models expose the
density, survival, hazard, and an exact quantile so that sampling always
consumes exactly one uniform per draw (inverse transform). That discipline
is what makes draws reproducible independently of how work is scheduled.

The kernelized model is parameterized by its hazard, a positive mixture of
Gaussian bumps. Its cumulative hazard has a closed form in erf, but the
quantile does not, so inversion goes through a tabulated monotone grid
refined to a fixed interpolation tolerance. The law is defective: the
cumulative hazard saturates, so a draw can come back +inf, meaning the
edge never transmits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import ParseError, ValidationError

_SQRT2 = math.sqrt(2.0)
_SQRT_HALF_PI = math.sqrt(math.pi / 2.0)

# grid controls for inverting the kernelized cumulative hazard
_GRID_START = 1025
_GRID_MAX = 1 << 22
_GRID_TOL = 1e-8
_HORIZON_BANDWIDTHS = 64.0


def _clip_unit(u):
    u = np.asarray(u, dtype=np.float64)
    if np.any((u < 0.0) | (u >= 1.0)):
        raise ValidationError("quantile argument must lie in [0, 1)")
    return u


@dataclass(frozen=True)
class Exponential:
    """Memoryless waiting time with constant hazard `rate`."""

    rate: float
    tag = "exp"

    def __post_init__(self):
        if not (self.rate > 0.0 and math.isfinite(self.rate)):
            raise ValidationError(f"exponential rate must be positive, got {self.rate}")

    def pdf(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(t >= 0.0, self.rate * np.exp(-self.rate * t), 0.0)

    def cdf(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(t >= 0.0, -np.expm1(-self.rate * t), 0.0)

    def survival(self, t):
        return 1.0 - self.cdf(t)

    def hazard(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(t > 0.0, self.rate, 0.0)

    def quantile(self, u):
        return -np.log1p(-_clip_unit(u)) / self.rate

    def sample(self, rng, size=None):
        return self.quantile(rng.random(size))

    def mean(self) -> float:
        return 1.0 / self.rate

    def params(self) -> tuple[float, ...]:
        return (self.rate,)


@dataclass(frozen=True)
class Rayleigh:
    """Waiting time with linearly growing hazard `scale * t` (pdf scale*t*exp(-scale*t^2/2))."""

    scale: float
    tag = "rayleigh"

    def __post_init__(self):
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValidationError(f"rayleigh scale must be positive, got {self.scale}")

    def pdf(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(t >= 0.0, self.scale * t * np.exp(-0.5 * self.scale * t * t), 0.0)

    def cdf(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(t >= 0.0, -np.expm1(-0.5 * self.scale * t * t), 0.0)

    def survival(self, t):
        return 1.0 - self.cdf(t)

    def hazard(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(t > 0.0, self.scale * t, 0.0)

    def quantile(self, u):
        return np.sqrt(-2.0 * np.log1p(-_clip_unit(u)) / self.scale)

    def sample(self, rng, size=None):
        return self.quantile(rng.random(size))

    def mean(self) -> float:
        return math.sqrt(math.pi / (2.0 * self.scale))

    def params(self) -> tuple[float, ...]:
        return (self.scale,)


@dataclass(frozen=True)
class Weibull:
    """Waiting time with power-law hazard; shape < 1 decays, > 1 grows."""

    scale: float
    shape: float
    tag = "weibull"

    def __post_init__(self):
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValidationError(f"weibull scale must be positive, got {self.scale}")
        if not (self.shape > 0.0 and math.isfinite(self.shape)):
            raise ValidationError(f"weibull shape must be positive, got {self.shape}")

    def pdf(self, t):
        t = np.asarray(t, dtype=np.float64)
        # at t=0 the density is 0 for shape>1, shape/scale for shape=1, +inf for shape<1
        pos = t > 0.0
        ratio = np.where(pos, t, 0.0) / self.scale
        with np.errstate(divide="ignore"):
            dens = (self.shape / self.scale) * ratio ** (self.shape - 1.0) * np.exp(-(ratio**self.shape))
        return np.where(t >= 0.0, dens, 0.0)

    def cdf(self, t):
        t = np.asarray(t, dtype=np.float64)
        pos = t > 0.0
        ratio = np.where(pos, t, 0.0) / self.scale
        return np.where(pos, -np.expm1(-(ratio**self.shape)), 0.0)

    def survival(self, t):
        return 1.0 - self.cdf(t)

    def hazard(self, t):
        t = np.asarray(t, dtype=np.float64)
        pos = t > 0.0
        ratio = np.where(pos, t, 1.0) / self.scale
        return np.where(pos, (self.shape / self.scale) * ratio ** (self.shape - 1.0), 0.0)

    def quantile(self, u):
        return self.scale * (-np.log1p(-_clip_unit(u))) ** (1.0 / self.shape)

    def sample(self, rng, size=None):
        return self.quantile(rng.random(size))

    def mean(self) -> float:
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)

    def params(self) -> tuple[float, ...]:
        return (self.scale, self.shape)


@dataclass(frozen=True)
class KernelHazard:
    """Waiting time whose hazard is a Gaussian-bump mixture.

    hazard(t) = sum_l weights[l] * exp(-(t - centers[l])^2 / (2 bandwidth^2))
    for t > 0, and 0 otherwise. The cumulative hazard is closed-form in erf
    and saturates as t grows, so the law keeps positive mass at +inf.

    `spec_path` remembers the file the parameters were read from, so a
    network referencing this model can be written back out; it does not
    participate in equality.
    """

    centers: tuple[float, ...]
    weights: tuple[float, ...]
    bandwidth: float
    spec_path: str | None = field(default=None, compare=False)
    tag = "kernelhazard"

    def __post_init__(self):
        if len(self.centers) == 0:
            raise ValidationError("kernel hazard needs at least one center")
        if len(self.centers) != len(self.weights):
            raise ValidationError("kernel centers and weights must pair up")
        if not all(math.isfinite(c) for c in self.centers):
            raise ValidationError("kernel centers must be finite")
        if not all(w > 0.0 and math.isfinite(w) for w in self.weights):
            raise ValidationError("kernel weights must be positive")
        if not (self.bandwidth > 0.0 and math.isfinite(self.bandwidth)):
            raise ValidationError(f"kernel bandwidth must be positive, got {self.bandwidth}")

    @property
    def horizon(self) -> float:
        """Time beyond which remaining transmission mass is treated as never."""
        return max(self.centers) + _HORIZON_BANDWIDTHS * self.bandwidth

    def hazard(self, t):
        t = np.asarray(t, dtype=np.float64)
        acc = np.zeros_like(t)
        inv = 1.0 / (2.0 * self.bandwidth * self.bandwidth)
        for c, w in zip(self.centers, self.weights):
            acc = acc + w * np.exp(-((t - c) ** 2) * inv)
        return np.where(t > 0.0, acc, 0.0)

    def cumulative_hazard(self, t):
        """Integral of the hazard from 0 to t, exact via erf."""
        t = np.asarray(t, dtype=np.float64)
        tt = np.maximum(t, 0.0)
        acc = np.zeros_like(tt)
        denom = self.bandwidth * _SQRT2
        for c, w in zip(self.centers, self.weights):
            acc = acc + w * (special.erf((tt - c) / denom) + special.erf(c / denom))
        return acc * (self.bandwidth * _SQRT_HALF_PI)

    def survival(self, t):
        return np.exp(-self.cumulative_hazard(t))

    def cdf(self, t):
        return -np.expm1(-self.cumulative_hazard(t))

    def pdf(self, t):
        return self.hazard(t) * self.survival(t)

    def defect(self) -> float:
        """Probability the edge never transmits."""
        return float(np.exp(-self.cumulative_hazard(self.horizon)))

    def _grid(self):
        cached = self.__dict__.get("_grid_cache")
        if cached is not None:
            return cached
        npts = _GRID_START
        while True:
            ts = np.linspace(0.0, self.horizon, npts)
            hs = self.cumulative_hazard(ts)
            mids = 0.5 * (ts[:-1] + ts[1:])
            err = np.max(np.abs(0.5 * (hs[:-1] + hs[1:]) - self.cumulative_hazard(mids)))
            if err < _GRID_TOL or npts >= _GRID_MAX:
                break
            npts = 2 * npts - 1
        self.__dict__["_grid_cache"] = (ts, hs)
        return ts, hs

    def quantile(self, u):
        """Invert the cdf; draws past the saturation point come back +inf."""
        target = -np.log1p(-_clip_unit(u))
        ts, hs = self._grid()
        out = np.interp(target, hs, ts)
        return np.where(target >= hs[-1], np.inf, out)

    def sample(self, rng, size=None):
        return self.quantile(rng.random(size))

    def mean(self) -> float:
        return math.inf

    def params(self) -> tuple[float, ...]:
        raise ValidationError("kernel hazard parameters live in a spec file, not inline")


TransmissionModel = Exponential | Rayleigh | Weibull | KernelHazard

_TAGS = {
    Exponential.tag: (Exponential, 1),
    Rayleigh.tag: (Rayleigh, 1),
    Weibull.tag: (Weibull, 2),
    KernelHazard.tag: (KernelHazard, 1),
}


def load_kernel_spec(path: str) -> KernelHazard:
    """Read a kernel-hazard parameter file.

    Line 1 is `bandwidth <s>`; every further non-empty line is
    `<center> <weight>`.
    """
    centers: list[float] = []
    weights: list[float] = []
    bandwidth = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            parts = raw.split()
            if not parts:
                continue
            if bandwidth is None:
                if len(parts) != 2 or parts[0] != "bandwidth":
                    raise ParseError("expected `bandwidth <s>` on the first line", str(path), lineno)
                try:
                    bandwidth = float(parts[1])
                except ValueError:
                    raise ParseError(f"bad bandwidth {parts[1]!r}", str(path), lineno) from None
                continue
            if len(parts) != 2:
                raise ParseError("expected `<center> <weight>`", str(path), lineno)
            try:
                centers.append(float(parts[0]))
                weights.append(float(parts[1]))
            except ValueError:
                raise ParseError(f"bad kernel line {raw.strip()!r}", str(path), lineno) from None
    if bandwidth is None:
        raise ParseError("empty kernel spec", str(path))
    try:
        return KernelHazard(tuple(centers), tuple(weights), bandwidth, spec_path=str(path))
    except ValidationError as exc:
        raise ParseError(str(exc), str(path)) from None


def save_kernel_spec(model: KernelHazard, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"bandwidth {model.bandwidth!r}\n")
        for c, w in zip(model.centers, model.weights):
            fh.write(f"{c!r} {w!r}\n")


def model_from_fields(tag: str, fields: list[str], base_dir: str = ".") -> TransmissionModel:
    """Build a model from the tag + parameter fields of a network-file edge line."""
    import os

    if tag not in _TAGS:
        raise ValidationError(f"unknown transmission model {tag!r}")
    cls, arity = _TAGS[tag]
    if len(fields) != arity:
        raise ValidationError(f"model {tag!r} takes {arity} parameter(s), got {len(fields)}")
    if cls is KernelHazard:
        ref = fields[0]
        resolved = ref if os.path.isabs(ref) else os.path.join(base_dir, ref)
        model = load_kernel_spec(resolved)
        # keep the reference as written so saving reproduces the original line
        object.__setattr__(model, "spec_path", ref)
        return model
    try:
        values = [float(f) for f in fields]
    except ValueError:
        raise ValidationError(f"non-numeric parameter for model {tag!r}: {fields}") from None
    return cls(*values)


def model_to_fields(model: TransmissionModel) -> tuple[str, list[str]]:
    """Inverse of model_from_fields, used when writing a network back out."""
    if isinstance(model, KernelHazard):
        if model.spec_path is None:
            raise ValidationError("kernel hazard has no spec file to reference")
        return model.tag, [model.spec_path]
    return model.tag, [repr(v) for v in model.params()]
