"""Pure numpy version of the explicit-step kernel in _kernels.pyx."""

import numpy as np


def rates(u, r, lo, hi, rL, uL, rR, uR, axis_left, n, p, g, du):
    """Write d/dt u on nodes lo..hi-1 into du[lo:hi].

    Node lo sees the boundary value uL at position rL (or the symmetry axis
    when axis_left is set and r[lo] == 0); node hi-1 sees uR at rR. Returns
    (largest coefficient sum, number of faces where the regularization
    dominates). A step dt is monotone when dt * coefficient sum <= 1.
    """
    m = hi - lo
    if m <= 0:
        return 0.0, 0
    ua = u[lo:hi]
    ra = r[lo:hi]
    lpos = np.empty(m)
    lval = np.empty(m)
    rpos = np.empty(m)
    rval = np.empty(m)
    lpos[1:] = ra[:-1]
    lval[1:] = ua[:-1]
    rpos[:-1] = ra[1:]
    rval[:-1] = ua[1:]
    lpos[0] = rL
    lval[0] = uL
    rpos[-1] = rR
    rval[-1] = uR
    hR = rpos - ra
    sR = (rval - ua) / hR
    aR = (g * g + sR * sR) ** ((p - 2) / 2)
    fR = aR * sR
    if p >= 2:
        dR = (p - 1) * aR
    else:
        dR = np.full(m, g ** (p - 2))
    clamps = int(np.count_nonzero(np.abs(sR) < g))

    axis = bool(axis_left) and ra[0] == 0.0
    start = 1 if axis else 0
    hL = ra - lpos
    if axis:
        hL[0] = 1.0
    sL = (ua - lval) / hL
    aL = (g * g + sL * sL) ** ((p - 2) / 2)
    fL = aL * sL
    if p >= 2:
        dL = (p - 1) * aL
    else:
        dL = np.full(m, g ** (p - 2))
    clamps += int(np.count_nonzero(np.abs(sL[start:]) < g))

    out = np.empty(m)
    coef = np.empty(m)
    rr = ra[start:]
    hl, hr = hL[start:], hR[start:]
    wL = ((rr - hl / 2) / rr) ** (n - 1)
    wR = ((rr + hr / 2) / rr) ** (n - 1)
    half = (hl + hr) / 2
    out[start:] = (wR * fR[start:] - wL * fL[start:]) / half
    coef[start:] = (wR * dR[start:] / hr + wL * dL[start:] / hl) / half
    if axis:
        # flux balance over the ball of radius h/2 around the axis node
        out[0] = n * fR[0] / (hR[0] / 2)
        coef[0] = n * dR[0] / (hR[0] * hR[0] / 2)
    du[lo:hi] = out
    return float(np.max(coef)), clamps
