"""Default numerical tolerances.

Every tolerance can be overridden through the ``THIMC_TOL`` environment
variable, either with a JSON object mapping names to values or with a
single number that multiplies all defaults.
"""
import json
import os

DEFAULTS = {
    "det": 1e-10,             # SL2 elements
    "quadric": 1e-8,          # ambient points on S31 / H31
    "hermitian": 1e-12,
    "frame_det": 1e-8,        # integrated frames after renormalisation
    "immersion_det": 1e-6,
    "splitting": 1e-10,       # |1/H - (f+g)|
    "isothermic": 1e-10,
    "H_floor": 1e-12,         # |H| below this is treated as zero
    "residual_floor": 1e-6,   # residuals below this count as exact
    "residual_h2": 50.0,      # residual gate C in C*h^2
    "min_order": 1.5,         # observed convergence order gate
    "path_h2": 50.0,          # path-independence gate C in C*h^2
    "zero_curvature_h2": 50.0,
    "realization": 1e-8,
}

RENORM_EVERY = 16


def tolerances():
    """Return the active tolerance table (defaults merged with ``THIMC_TOL``)."""
    tol = dict(DEFAULTS)
    raw = os.environ.get("THIMC_TOL")
    if not raw:
        return tol
    try:
        value = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValueError(f"THIMC_TOL is not valid JSON or a number: {raw!r}") from exc
    if isinstance(value, (int, float)):
        return {k: v * float(value) if k != "min_order" else v for k, v in tol.items()}
    if not isinstance(value, dict):
        raise ValueError("THIMC_TOL must be a number or a JSON object")
    unknown = set(value) - set(tol)
    if unknown:
        raise ValueError(f"unknown tolerance names in THIMC_TOL: {sorted(unknown)}")
    tol.update({k: float(v) for k, v in value.items()})
    return tol


def tol(name):
    return tolerances()[name]
