"""Compiled inner loops for the stochastic Heun LLG integrator.

Spins are stored as an (N, 3) float64 array. The dipole coupling is a dense
(3N, 3N) matrix already scaled to tesla per unit magnetisation direction, so
the kernel never needs the cell geometry.
"""

import numpy as np
from numba import njit

TINY = 1e-100


@njit(cache=True, fastmath=True)
def _dipole(m, dip, out):
    n3 = dip.shape[0]
    flat = m.reshape(n3)
    res = out.reshape(n3)
    for r in range(n3):
        acc = 0.0
        for c in range(n3):
            acc += dip[r, c] * flat[c]
        res[r] = acc


@njit(cache=True)
def _field(m, applied, noise, ani, ex, neighbours, dip, out):
    n = m.shape[0]
    if dip.shape[0] > 0:
        _dipole(m, dip, out)
    else:
        out[:] = 0.0
    for i in range(n):
        hx = out[i, 0] + applied[i, 0] + noise[i, 0]
        hy = out[i, 1] + applied[i, 1] + noise[i, 1]
        hz = out[i, 2] + applied[i, 2] + noise[i, 2] + ani * m[i, 2]
        for k in range(neighbours.shape[1]):
            j = neighbours[i, k]
            if j < 0:
                break
            hx += ex * (m[j, 0] - m[i, 0])
            hy += ex * (m[j, 1] - m[i, 1])
            hz += ex * (m[j, 2] - m[i, 2])
        out[i, 0] = hx
        out[i, 1] = hy
        out[i, 2] = hz


@njit(cache=True)
def effective_field_kernel(m, applied, noise, ani, ex, neighbours, dip):
    out = np.empty_like(m)
    _field(m, applied, noise, ani, ex, neighbours, dip, out)
    return out


@njit(cache=True)
def _rhs(m, h, pref, alpha, out):
    for i in range(m.shape[0]):
        mx, my, mz = m[i, 0], m[i, 1], m[i, 2]
        hx, hy, hz = h[i, 0], h[i, 1], h[i, 2]
        cx = my * hz - mz * hy
        cy = mz * hx - mx * hz
        cz = mx * hy - my * hx
        dx = my * cz - mz * cy
        dy = mz * cx - mx * cz
        dz = mx * cy - my * cx
        out[i, 0] = pref * (cx + alpha * dx)
        out[i, 1] = pref * (cy + alpha * dy)
        out[i, 2] = pref * (cz + alpha * dz)


@njit(cache=True)
def heun_run(m, n_steps, dt, gamma, alpha, applied, noise, ani, ex, neighbours, dip):
    """Advance ``m`` in place by ``n_steps`` Heun steps.

    ``noise`` is either (n_steps, N, 3) thermal fields or a (0, N, 3) array
    for zero temperature. Returns (max norm drift before renormalisation,
    max component change during the final step).
    """
    n = m.shape[0]
    pref = -gamma / (1.0 + alpha * alpha)
    h = np.empty_like(m)
    k1 = np.empty_like(m)
    k2 = np.empty_like(m)
    mp = np.empty_like(m)
    zero = np.zeros((n, 3))
    thermal = noise.shape[0] > 0
    max_drift = 0.0
    last_change = 0.0
    for step in range(n_steps):
        eta = noise[step] if thermal else zero
        _field(m, applied, eta, ani, ex, neighbours, dip, h)
        _rhs(m, h, pref, alpha, k1)
        for i in range(n):
            px = m[i, 0] + dt * k1[i, 0]
            py = m[i, 1] + dt * k1[i, 1]
            pz = m[i, 2] + dt * k1[i, 2]
            inv = 1.0 / np.sqrt(px * px + py * py + pz * pz)
            mp[i, 0] = px * inv
            mp[i, 1] = py * inv
            mp[i, 2] = pz * inv
        _field(mp, applied, eta, ani, ex, neighbours, dip, h)
        _rhs(mp, h, pref, alpha, k2)
        last_change = 0.0
        for i in range(n):
            nx = m[i, 0] + 0.5 * dt * (k1[i, 0] + k2[i, 0])
            ny = m[i, 1] + 0.5 * dt * (k1[i, 1] + k2[i, 1])
            nz = m[i, 2] + 0.5 * dt * (k1[i, 2] + k2[i, 2])
            norm = np.sqrt(nx * nx + ny * ny + nz * nz)
            drift = abs(norm - 1.0)
            if drift > max_drift or drift != drift:
                max_drift = drift
            nx /= norm
            ny /= norm
            nz /= norm
            d = max(abs(nx - m[i, 0]), abs(ny - m[i, 1]), abs(nz - m[i, 2]))
            if d > last_change:
                last_change = d
            # flush values that would otherwise decay into slow subnormals
            m[i, 0] = nx if abs(nx) > TINY else 0.0
            m[i, 1] = ny if abs(ny) > TINY else 0.0
            m[i, 2] = nz if abs(nz) > TINY else 0.0
    return max_drift, last_change
