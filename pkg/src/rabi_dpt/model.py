"""Model parameters, dimensionless rescaling, coupling-sign canonicalization.

Single qubit coupled to one lossy cavity mode, with independent co-rotating
(lambda_minus) and counter-rotating (lambda_plus) coupling strengths:

    H = omega_c a^dag a + (Omega/2) sigma_z
        - lambda_minus (a sigma_+ + a^dag sigma_-)
        - lambda_plus  (a sigma_- + a^dag sigma_+)

with single rate kappa of cavity decay.  All frequencies are angular, hbar = 1.

The natural coupling scale is lambda_c = sqrt(omega_c |Omega|) / 2, and the
dimensionless set used throughout is

    eta = Omega / omega_c,   lam_{m,p} = lambda_{-,+} / lambda_c,
    kappa_ratio = kappa / omega_c,   r = lam_p / lam_m,
    lam_x = (lam_p + lam_m)/2,   lam_y = (lam_p - lam_m)/2.

Canonical region: Omega > 0, lambda_minus >= 0, lambda_plus >= 0.  Three sign
maps, each implemented by a unitary on the system and hence a symmetry of the
full master equation, move any parameter set into this region:

    U1: lambda_plus -> -lambda_plus
    U2: (lambda_minus, lambda_plus) -> -(lambda_minus, lambda_plus)
    U3: Omega -> -Omega, lambda_minus <-> lambda_plus   (sigma_z changes sign)

Steady-state photon observables are invariant under all three maps; spin
observables built from sigma_z flip sign under U3.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace


class ParameterError(ValueError):
    """Raised for invalid or inconsistent model parameters."""


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the open anisotropic Rabi model."""

    omega_c: float
    Omega: float
    lambda_minus: float
    lambda_plus: float
    kappa: float

    def __post_init__(self):
        if not self.omega_c > 0:
            raise ParameterError(f"omega_c must be positive, got {self.omega_c}")
        if self.kappa < 0:
            raise ParameterError(f"kappa must be non-negative, got {self.kappa}")
        for name in ("omega_c", "Omega", "lambda_minus", "lambda_plus", "kappa"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v}")

    @property
    def lambda_c(self) -> float:
        """Coupling scale sqrt(omega_c |Omega|)/2 (zero when Omega = 0)."""
        return math.sqrt(self.omega_c * abs(self.Omega)) / 2.0


@dataclass(frozen=True)
class DimlessParams:
    """Dimensionless parameter set; see module docstring for definitions.

    r is None when lam_m = 0 (the ratio lam_p/lam_m is undefined there).
    """

    eta: float
    lam_m: float
    lam_p: float
    kappa_ratio: float
    lam_x: float
    lam_y: float
    r: float | None

    @classmethod
    def from_couplings(cls, eta, lam_m, lam_p, kappa_ratio) -> "DimlessParams":
        if eta == 0 or not math.isfinite(eta):
            raise ParameterError(f"eta must be finite and nonzero, got {eta}")
        if kappa_ratio < 0:
            raise ParameterError(f"kappa_ratio must be non-negative, got {kappa_ratio}")
        lam_x = 0.5 * lam_p + 0.5 * lam_m
        lam_y = 0.5 * lam_p - 0.5 * lam_m
        r = lam_p / lam_m if lam_m != 0 else None
        return cls(eta=eta, lam_m=lam_m, lam_p=lam_p, kappa_ratio=kappa_ratio,
                   lam_x=lam_x, lam_y=lam_y, r=r)

    def to_model_params(self, omega_c: float = 1.0) -> ModelParams:
        """Physical parameters with the stated omega_c (default: unit cavity frequency)."""
        lc = math.sqrt(omega_c * abs(self.eta * omega_c)) / 2.0
        return ModelParams(omega_c=omega_c, Omega=self.eta * omega_c,
                           lambda_minus=self.lam_m * lc, lambda_plus=self.lam_p * lc,
                           kappa=self.kappa_ratio * omega_c)


def to_dimensionless(p: ModelParams) -> DimlessParams:
    """Rescale physical parameters by lambda_c and omega_c.

    Requires Omega != 0 (the coupling scale vanishes at Omega = 0).
    """
    if p.Omega == 0:
        raise ParameterError("Omega = 0 has no dimensionless coupling scale")
    lc = p.lambda_c
    return DimlessParams.from_couplings(
        eta=p.Omega / p.omega_c,
        lam_m=p.lambda_minus / lc,
        lam_p=p.lambda_plus / lc,
        kappa_ratio=p.kappa / p.omega_c,
    )


# Sign maps, each its own inverse at the parameter level.
_MAPS = ("U1", "U2", "U3")


def _apply_map(p: ModelParams, name: str) -> ModelParams:
    if name == "U1":
        return replace(p, lambda_plus=-p.lambda_plus)
    if name == "U2":
        return replace(p, lambda_minus=-p.lambda_minus, lambda_plus=-p.lambda_plus)
    if name == "U3":
        return replace(p, Omega=-p.Omega,
                       lambda_minus=p.lambda_plus, lambda_plus=p.lambda_minus)
    raise ValueError(f"unknown sign map {name!r}")


@dataclass(frozen=True)
class SignTransform:
    """Record of the sign maps used to reach the canonical region.

    applied_maps lists map names in application order.  sigma_z_sign_flip is
    True exactly when U3 is involved: expectation values of sigma_z computed
    in the canonical frame must then be negated to refer to the original one.
    """

    applied_maps: tuple[str, ...]
    sigma_z_sign_flip: bool

    def apply(self, p: ModelParams) -> ModelParams:
        for name in self.applied_maps:
            p = _apply_map(p, name)
        return p


def canonicalize(p: ModelParams) -> tuple[ModelParams, SignTransform]:
    """Map parameters into Omega > 0, lambda_pm >= 0 and record the maps used.

    Omega = 0 is left untouched (no sign to fix); coupling signs are still
    canonicalized in that case.
    """
    maps = []
    q = p
    if q.Omega < 0:
        q = _apply_map(q, "U3")
        maps.append("U3")
    if q.lambda_minus < 0 and q.lambda_plus < 0:
        q = _apply_map(q, "U2")
        maps.append("U2")
    elif q.lambda_minus < 0:
        # U2 flips both, then U1 restores the sign of lambda_plus.
        q = _apply_map(q, "U2")
        q = _apply_map(q, "U1")
        maps += ["U2", "U1"]
    elif q.lambda_plus < 0:
        q = _apply_map(q, "U1")
        maps.append("U1")
    t = SignTransform(applied_maps=tuple(maps), sigma_z_sign_flip="U3" in maps)
    return q, t


_PHYSICAL_KEYS = {"omega_c", "Omega", "lambda_minus", "lambda_plus", "kappa"}
_DIMLESS_KEYS = {"eta", "lam_m", "lam_p", "kappa_ratio"}


def params_from_dict(cfg: dict) -> ModelParams:
    """Build ModelParams from a config mapping.

    Exactly one of the two key sets must be present: the physical set
    {omega_c, Omega, lambda_minus, lambda_plus, kappa} or the dimensionless
    set {eta, lam_m, lam_p, kappa_ratio}.  Unknown keys are rejected.
    """
    keys = set(cfg)
    extra = keys - _PHYSICAL_KEYS - _DIMLESS_KEYS
    if extra:
        raise ParameterError(f"unknown parameter keys: {sorted(extra)}")
    has_phys = bool(keys & _PHYSICAL_KEYS)
    has_dimless = bool(keys & _DIMLESS_KEYS)
    if has_phys and has_dimless:
        raise ParameterError("mixed physical and dimensionless parameter keys")
    if has_phys:
        missing = _PHYSICAL_KEYS - keys
        if missing:
            raise ParameterError(f"missing physical keys: {sorted(missing)}")
        return ModelParams(**{k: float(cfg[k]) for k in _PHYSICAL_KEYS})
    if has_dimless:
        missing = _DIMLESS_KEYS - keys
        if missing:
            raise ParameterError(f"missing dimensionless keys: {sorted(missing)}")
        d = DimlessParams.from_couplings(**{k: float(cfg[k]) for k in _DIMLESS_KEYS})
        return d.to_model_params()
    raise ParameterError("empty parameter config")


def params_from_json(text: str) -> ModelParams:
    """Parse a JSON object into ModelParams (see params_from_dict)."""
    obj = json.loads(text)
    if not isinstance(obj, dict):
        raise ParameterError("parameter config must be a JSON object")
    return params_from_dict(obj)
