"""Compiled inner loop for hierarchy propagation.

The hierarchy is evolved in the pointer basis, where both coupling operators
are diagonal (+1/-1 signs), so commutators and anticommutators with them are
elementwise masks and only the system commutator needs 4x4 matrix products.
ADOs are stored stacked as (n_ados + 1, 4, 4); the trailing slot is kept zero
and up-neighbor indices of out-of-range hierarchy members point at it, which
implements the hard truncation without branches on the hot path (down
neighbors use a -1 sentinel instead).

Coefficient arrays encode the scaled or unscaled convention; the kernel is
agnostic. No fastmath: evaluation order is fixed, runs are bit-reproducible.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_ARGS_PLAN = (
    "complex128[:,::1], float64[:,::1],"
    " float64[::1], int64[::1], int64[::1], int64[::1], int64[::1],"
    " complex128[::1], complex128[::1], complex128[::1], complex128[::1],"
    " complex128[::1], complex128[::1], float64[:,::1], float64[:,::1],"
    " float64[:,::1], float64[:,::1]"
)


@njit("void(complex128[:,:,::1], complex128[:,:,::1], " + _ARGS_PLAN + ")", cache=True)
def hierarchy_rhs(
    out, v, hp, ew, damp,
    up1, up2, dn1, dn2,
    upc1, upc2, dc1, da1, dc2, da2,
    d1, a1, d2, a2,
):
    n = v.shape[0] - 1  # last slot is the zero pad
    for i in range(n):
        t = v[i]
        o = out[i]
        # -i [H, t] with H dense in the pointer basis
        for r in range(4):
            for c in range(4):
                acc = 0.0 + 0.0j
                for k in range(4):
                    acc += hp[r, k] * t[k, c] - t[r, k] * hp[k, c]
                o[r, c] = -1j * acc
        # local damping: level decay plus the white-noise double commutator
        dmp = damp[i]
        for r in range(4):
            for c in range(4):
                o[r, c] -= (dmp + ew[r, c]) * t[r, c]
        # bath 1 neighbors
        j = up1[i]
        cu = upc1[i]
        if cu != 0.0:
            w = v[j]
            for r in range(4):
                for c in range(4):
                    o[r, c] += cu * d1[r, c] * w[r, c]
        j = dn1[i]
        if j >= 0:
            w = v[j]
            cc = dc1[i]
            ca = da1[i]
            for r in range(4):
                for c in range(4):
                    o[r, c] += (cc * d1[r, c] + ca * a1[r, c]) * w[r, c]
        # bath 2 neighbors
        j = up2[i]
        cu = upc2[i]
        if cu != 0.0:
            w = v[j]
            for r in range(4):
                for c in range(4):
                    o[r, c] += cu * d2[r, c] * w[r, c]
        j = dn2[i]
        if j >= 0:
            w = v[j]
            cc = dc2[i]
            ca = da2[i]
            for r in range(4):
                for c in range(4):
                    o[r, c] += (cc * d2[r, c] + ca * a2[r, c]) * w[r, c]


@njit(
    "float64(complex128[:,:,::1], " + _ARGS_PLAN + ", float64, int64,"
    " complex128[:,:,::1], complex128[:,:,::1], complex128[:,:,::1],"
    " complex128[:,:,::1], complex128[:,:,::1])",
    cache=True,
)
def rk4_steps(
    v, hp, ew, damp,
    up1, up2, dn1, dn2,
    upc1, upc2, dc1, da1, dc2, da2,
    d1, a1, d2, a2,
    dt, nsteps,
    k1, k2, k3, k4, work,
):
    """Advance ``v`` in place by ``nsteps`` classic RK4 steps; returns max |v|."""
    n = v.shape[0] - 1
    half = 0.5 * dt
    sixth = dt / 6.0
    for _ in range(nsteps):
        hierarchy_rhs(k1, v, hp, ew, damp, up1, up2, dn1, dn2,
                      upc1, upc2, dc1, da1, dc2, da2, d1, a1, d2, a2)
        for i in range(n):
            for r in range(4):
                for c in range(4):
                    work[i, r, c] = v[i, r, c] + half * k1[i, r, c]
        hierarchy_rhs(k2, work, hp, ew, damp, up1, up2, dn1, dn2,
                      upc1, upc2, dc1, da1, dc2, da2, d1, a1, d2, a2)
        for i in range(n):
            for r in range(4):
                for c in range(4):
                    work[i, r, c] = v[i, r, c] + half * k2[i, r, c]
        hierarchy_rhs(k3, work, hp, ew, damp, up1, up2, dn1, dn2,
                      upc1, upc2, dc1, da1, dc2, da2, d1, a1, d2, a2)
        for i in range(n):
            for r in range(4):
                for c in range(4):
                    work[i, r, c] = v[i, r, c] + dt * k3[i, r, c]
        hierarchy_rhs(k4, work, hp, ew, damp, up1, up2, dn1, dn2,
                      upc1, upc2, dc1, da1, dc2, da2, d1, a1, d2, a2)
        for i in range(n):
            for r in range(4):
                for c in range(4):
                    v[i, r, c] += sixth * (
                        k1[i, r, c]
                        + 2.0 * (k2[i, r, c] + k3[i, r, c])
                        + k4[i, r, c]
                    )
    mx = 0.0
    for i in range(n):
        for r in range(4):
            for c in range(4):
                m = abs(v[i, r, c])
                if m != m:  # NaN never compares greater; surface it directly
                    return m
                if m > mx:
                    mx = m
    return mx
