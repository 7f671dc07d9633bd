"""Numeric hot kernels with two interchangeable backends.

The numba backend compiles the per-point loops with @njit; the numpy backend
is a vectorized re-implementation of the same contracts. Selection:

    SLIDENAV_BACKEND=numba   (default; falls back to numpy if numba is absent)
    SLIDENAV_BACKEND=numpy

Both backends expose:

    eval_positions(pack, s, t)  -> (n,2) boundary points
    eval_bundle(pack, s, t)     -> p, p_s, p_ss, p_t, p_tt, p_st  (each (n,2))
    nearest_param(pack, rx, ry, t, n_scan, max_iter, tol)
                                -> (s_star, dist, converged, ambiguous, s_second)
    nearest_fields(pack, rx, ry, t, n_scan, max_iter, tol)
                                -> fused nearest_param + frame/motion fields (flat floats)
    omega_sweep_max(fields..., d_lo, d_hi, v, half_axle, z) -> float

`pack` is an ObstacleModel.kernel_pack() tuple of plain arrays; see
slidenav.obstacle for the encoding.
"""

import os as _os

BACKEND = _os.environ.get("SLIDENAV_BACKEND", "numba").strip().lower()

if BACKEND not in ("numba", "numpy"):
    raise ValueError(f"SLIDENAV_BACKEND must be 'numba' or 'numpy', got {BACKEND!r}")

if BACKEND == "numba":
    try:
        from . import _numba_ops as _impl
    except ImportError:  # numba missing or broken: degrade quietly
        from . import _numpy_ops as _impl
        BACKEND = "numpy"
else:
    from . import _numpy_ops as _impl

eval_positions = _impl.eval_positions
eval_bundle = _impl.eval_bundle
nearest_param = _impl.nearest_param
nearest_fields = _impl.nearest_fields
omega_sweep_max = _impl.omega_sweep_max

# curve kind codes shared by the encoders and both backends
CURVE_CIRCLE = 0
CURVE_ELLIPSE = 1
CURVE_SPLINE = 2
CURVE_ROUNDRECT = 3  # rounded polygon

# motion primitive kind codes
PRIM_TRANSLATE = 0
PRIM_ROTATE = 1
PRIM_SCALE = 2
PRIM_SHEAR = 3
PRIM_WARP = 4

PRIM_ROW = 24  # floats per primitive row in the parameter table
