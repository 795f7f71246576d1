"""Compiled inner loops of the backward solver.

Values live on *active cells* (node, ask label, bid label) with a contiguous
inventory axis.  Neighbour cells for the second difference are precomputed,
so a step is a flat loop over cells with no branch bookkeeping.
"""

from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True, inline="always")
def _segment_positive(g0, g1):
    # share of [0, 1] where the linear interpolant from g0 to g1 is > 0
    if g0 > 0.0 and g1 > 0.0:
        return 1.0
    if g0 <= 0.0 and g1 <= 0.0:
        return 0.0
    x = g0 / (g0 - g1)
    return x if g0 > 0.0 else 1.0 - x


@nb.njit(cache=True, inline="always")
def cell_fraction(g, g_up, g_down, h_minus, h_plus):
    """Share of the control cell ``[s - h_minus/2, s + h_plus/2]`` with positive gain."""
    left = _segment_positive(0.5 * (g + g_down), g)
    right = _segment_positive(g, 0.5 * (g + g_up))
    return (h_minus * left + h_plus * right) / (h_minus + h_plus)


@nb.njit(cache=True)
def gains(w, off_a, off_b, ga, gb):
    """Ask and bid gains of every active cell; -inf where the side is cut off."""
    n_cell, Q = w.shape
    for i in range(n_cell):
        oa = off_a[i]
        ob = off_b[i]
        ga[i, 0] = -np.inf
        for k in range(1, Q):
            ga[i, k] = oa + w[i, k - 1] - w[i, k]
        for k in range(Q - 1):
            gb[i, k] = -ob + w[i, k + 1] - w[i, k]
        gb[i, Q - 1] = -np.inf


@nb.njit(cache=True)
def value_step(w, wn, ga, gb, up, down, cu, cd, off_a, off_b, la, lb, pen_dt):
    """One explicit step of the value; also leaves the gains of ``w`` in ``ga``/``gb``."""
    n_cell, Q = w.shape
    for i in range(n_cell):
        iu = up[i]
        idn = down[i]
        pu = cu[i]
        pd = cd[i]
        p0 = 1.0 - pu - pd
        oa = off_a[i]
        ob = off_b[i]
        ga[i, 0] = -np.inf
        for k in range(1, Q):
            ga[i, k] = oa + w[i, k - 1] - w[i, k]
        for k in range(Q - 1):
            gb[i, k] = w[i, k + 1] - w[i, k] - ob
        gb[i, Q - 1] = -np.inf
        for k in range(Q):
            wn[i, k] = (p0 * w[i, k] + pu * w[iu, k] + pd * w[idn, k] + pen_dt[k]
                        + la * max(ga[i, k], 0.0) + lb * max(gb[i, k], 0.0))


@nb.njit(cache=True)
def flow_step(ua, ub, una, unb, ga, gb, up, down, cu, cd, hm, hp, la, lb, frac):
    """Expected ask and bid fill counts under the controls implied by ``ga``/``gb``."""
    n_cell, Q = ua.shape
    for i in range(n_cell):
        iu = up[i]
        idn = down[i]
        pu = cu[i]
        pd = cd[i]
        p0 = 1.0 - pu - pd
        smooth = frac and (pu > 0.0 or pd > 0.0)
        for k in range(Q):
            a0 = ua[i, k]
            b0 = ub[i, k]
            ra = p0 * a0 + pu * ua[iu, k] + pd * ua[idn, k]
            rb = p0 * b0 + pu * ub[iu, k] + pd * ub[idn, k]
            if k > 0:
                g = ga[i, k]
                if smooth:
                    f = cell_fraction(g, ga[iu, k], ga[idn, k], hm[i], hp[i])
                else:
                    f = 1.0 if g > 0.0 else 0.0
                f *= la
                ra += f * (1.0 + ua[i, k - 1] - a0)
                rb += f * (ub[i, k - 1] - b0)
            if k < Q - 1:
                g = gb[i, k]
                if smooth:
                    f = cell_fraction(g, gb[iu, k], gb[idn, k], hm[i], hp[i])
                else:
                    f = 1.0 if g > 0.0 else 0.0
                f *= lb
                ra += f * (ua[i, k + 1] - a0)
                rb += f * (1.0 + ub[i, k + 1] - b0)
            una[i, k] = ra
            unb[i, k] = rb


@nb.njit(cache=True)
def backward(w, ua, ub, up, down, cu, cd, hm, hp, off_a, off_b, la, lb, pen_dt,
             n_steps, stride, with_flow, frac, w_saved, ua_saved, ub_saved):
    """Run ``n_steps`` explicit steps from the terminal slice held in ``w``.

    Slice ``j`` of the saved arrays holds time index ``n_steps - j * stride``
    (the terminal slice first); the last saved slice is time zero.
    """
    wn = np.empty_like(w)
    una = np.empty_like(ua)
    unb = np.empty_like(ub)
    ga = np.empty_like(w)
    gb = np.empty_like(w)
    w_saved[0] = w
    if with_flow:
        ua_saved[0] = ua
        ub_saved[0] = ub
    j = 1
    for m in range(n_steps):
        value_step(w, wn, ga, gb, up, down, cu, cd, off_a, off_b, la, lb, pen_dt)
        if with_flow:
            flow_step(ua, ub, una, unb, ga, gb, up, down, cu, cd, hm, hp, la, lb, frac)
            ua, una = una, ua
            ub, unb = unb, ub
        w, wn = wn, w
        done = m + 1
        if done % stride == 0 or done == n_steps:
            w_saved[j] = w
            if with_flow:
                ua_saved[j] = ua
                ub_saved[j] = ub
            j += 1
    return w
