"""Compiled leapfrog kernels for the SQUID lattice.

State arrays are float64 of shape (m, N): m independent rows, each a full
lattice field (complex fields are passed as separate real and imaginary
rows).  Link ``l`` joins node ``l-1`` to node ``l`` and sits at position
``l - 0.5``.  Open chains have N+1 links with zero-valued ghost nodes
beyond the ends; free ends are expressed by zeroing the two end links.
Periodic chains have N links and link 0 joins node N-1 to node 0.
"""

import math

import numpy as np
from numba import njit

SATURATION = 40.0


@njit(cache=True)
def fill_stiffness(kap, lo, hi, t, prof, free):
    """cos(pi*flux) on links lo..hi inclusive; prof = (amp, floor, speed, width, x0)."""
    amp, floor, speed, width, x0 = prof[0], prof[1], prof[2], prof[3], prof[4]
    k_ahead = math.cos(math.pi * floor)
    k_behind = math.cos(math.pi * (floor + amp))
    shift = x0 + speed * t
    nl = kap.shape[0]
    for l in range(max(lo, 0), min(hi + 1, nl)):
        s = (l - 0.5 - shift) / width
        if s > SATURATION:
            kap[l] = k_ahead
        elif s < -SATURATION:
            kap[l] = k_behind
        else:
            kap[l] = math.cos(math.pi * (floor + 0.5 * amp * (1.0 - math.tanh(s))))
    if free:
        kap[0] = 0.0
        kap[nl - 1] = 0.0


@njit(cache=True)
def refresh_front(kap, t, prof, free):
    """Update the links whose stiffness can still change: those near the front."""
    centre = prof[4] + prof[2] * t
    reach = (SATURATION + 1.0) * prof[3] + 2.0
    fill_stiffness(kap, int(math.floor(centre - reach)), int(math.ceil(centre + reach)), t, prof, free)


@njit(cache=True)
def compute_force(phi, kap, lo, hi, m, periodic, cosine, tension, out):
    """out[j, i] = -dV/dphi_i for nodes lo..hi-1 and the first m rows."""
    n = phi.shape[1]
    for j in range(m):
        row = phi[j]
        ten = tension[j]
        if periodic:
            d = row[0] - row[n - 1]
            ten[0] = kap[0] * (math.sin(d) if cosine else d)
            if cosine:
                for l in range(1, n):
                    ten[l] = kap[l] * math.sin(row[l] - row[l - 1])
            else:
                for l in range(1, n):
                    ten[l] = kap[l] * (row[l] - row[l - 1])
            ten[n] = ten[0]
            f = out[j]
            for i in range(n):
                f[i] = ten[i + 1] - ten[i]
            continue
        a = max(lo, 1)
        b = min(hi, n - 1)
        if lo == 0:
            d = row[0]
            ten[0] = kap[0] * (math.sin(d) if cosine else d)
        if hi == n:
            d = -row[n - 1]
            ten[n] = kap[n] * (math.sin(d) if cosine else d)
        # zero-based loops over views let the compiler drop index wraparound checks
        cur = row[a:b + 1]
        prev = row[a - 1:b]
        kv = kap[a:b + 1]
        tv = ten[a:b + 1]
        if cosine:
            for i in range(cur.shape[0]):
                tv[i] = kv[i] * math.sin(cur[i] - prev[i])
        else:
            for i in range(cur.shape[0]):
                tv[i] = kv[i] * (cur[i] - prev[i])
        fv = out[j, lo:hi]
        up = ten[lo + 1:hi + 1]
        dn = ten[lo:hi]
        for i in range(fv.shape[0]):
            fv[i] = up[i] - dn[i]


@njit(cache=True)
def _thomas(rhs, out, lo, hi, diag_first, diag, diag_last, off, cp, work):
    # constant off-diagonal tridiagonal solve on [lo, hi)
    denom = diag_first
    cp[lo] = off / denom
    work[lo] = rhs[lo] / denom
    for i in range(lo + 1, hi):
        b = diag_last if i == hi - 1 else diag
        denom = b - off * cp[i - 1]
        cp[i] = off / denom
        work[i] = (rhs[i] - off * work[i - 1]) / denom
    out[hi - 1] = work[hi - 1]
    for i in range(hi - 2, lo - 1, -1):
        out[i] = work[i] - cp[i] * out[i + 1]


@njit(cache=True)
def solve_mass(rhs, lo, hi, m, r2, periodic, free, cp, work, out):
    """Solve (I + r2*Laplacian) y = rhs on nodes lo..hi-1, rows 0..m-1.

    Window edges that are not lattice ends are treated as Dirichlet, which
    is exact to the (negligible) size of the field outside the window.
    """
    n = rhs.shape[1]
    off = -r2
    b = 1.0 + 2.0 * r2
    if periodic:
        # Sherman-Morrison on the circulant matrix
        gamma = -b
        u = np.zeros(n)
        u[0] = gamma
        u[n - 1] = off
        z = np.empty(n)
        _thomas(u, z, 0, n, b - gamma, b, b - off * off / gamma, off, cp, work)
        vz = z[0] + off / gamma * z[n - 1]
        for j in range(m):
            y = out[j]
            _thomas(rhs[j], y, 0, n, b - gamma, b, b - off * off / gamma, off, cp, work)
            f = (y[0] + off / gamma * y[n - 1]) / (1.0 + vz)
            for i in range(n):
                y[i] -= f * z[i]
        return
    first = 1.0 + r2 if (free and lo == 0) else b
    last = 1.0 + r2 if (free and hi == n) else b
    for j in range(m):
        _thomas(rhs[j], out[j], lo, hi, first, b, last, off, cp, work)


@njit(cache=True)
def _active_rows(start_step, step):
    m = 0
    while m < start_step.shape[0] and start_step[m] <= step:
        m += 1
    return m


@njit(cache=True)
def row_support(phi, p, j, tol, pad):
    """Window [lo, hi) of row j holding every entry above tol*max(row), widened by pad."""
    n = phi.shape[1]
    big = 0.0
    for i in range(n):
        big = max(big, abs(phi[j, i]), abs(p[j, i]))
    thr = tol * big
    first = -1
    last = -1
    for i in range(n):
        if abs(phi[j, i]) > thr or abs(p[j, i]) > thr:
            first = i
            break
    for i in range(n - 1, -1, -1):
        if abs(phi[j, i]) > thr or abs(p[j, i]) > thr:
            last = i
            break
    if last < 0:
        return 0, n
    return max(0, first - pad), min(n, last + pad + 1)


@njit(cache=True)
def _row_force(phi, kap, j, lo, hi, periodic, cosine, tension, force):
    compute_force(phi[j:j + 1], kap, lo, hi, 1, periodic, cosine, tension[j:j + 1], force[j:j + 1])


@njit(cache=True, fastmath={"contract"})
def _force_kick(q, p, f, kap, lo, hi, half, cosine, damp, use_damp, ten):
    # recompute the force on nodes lo..hi-1 and apply the closing half kick;
    # ten is scratch for one tension per interior link
    n = q.shape[0]
    a = lo + 1
    b = hi - 1
    if b > a:
        cur = q[a:b + 1]
        prev = q[a - 1:b]
        kv = kap[a:b + 1]
        tv = ten[:b + 1 - a]
        if cosine:
            for i in range(tv.shape[0]):
                tv[i] = kv[i] * math.sin(cur[i] - prev[i])
        else:
            for i in range(tv.shape[0]):
                tv[i] = kv[i] * (cur[i] - prev[i])
        fi = f[a:b]
        pi = p[a:b]
        for i in range(fi.shape[0]):
            fi[i] = tv[i + 1] - tv[i]
            pi[i] += half * fi[i]
    # window end nodes see a frozen or ghost neighbour
    ends = 1 if hi - lo == 1 else 2
    for e in range(ends):
        i = lo if e == 0 else hi - 1
        left = q[i - 1] if i > 0 else 0.0
        right = q[i + 1] if i + 1 < n else 0.0
        dl = q[i] - left
        dr = right - q[i]
        if cosine:
            dl = math.sin(dl)
            dr = math.sin(dr)
        f[i] = kap[i + 1] * dr - kap[i] * dl
        p[i] += half * f[i]
    if use_damp:
        pv = p[lo:hi]
        dv = damp[lo:hi]
        for i in range(pv.shape[0]):
            pv[i] *= dv[i]


@njit(cache=True, fastmath={"contract"})
def _fused_row(q, p, f, kap, lo, hi, h, cosine, damp, use_damp, ten):
    # unit-mass leapfrog step; f holds the force on entry and exit
    half = 0.5 * h
    pv = p[lo:hi]
    qv = q[lo:hi]
    fv = f[lo:hi]
    for i in range(pv.shape[0]):
        pv[i] += half * fv[i]
        qv[i] += h * pv[i]
    _force_kick(q, p, f, kap, lo, hi, half, cosine, damp, use_damp, ten)


@njit(cache=True)
def thomas_tables(n, r2, first):
    """Forward-elimination factors of I + r2*Laplacian whose first diagonal entry is ``first``."""
    off = -r2
    b = 1.0 + 2.0 * r2
    cp = np.empty(n)
    inv = np.empty(n)
    denom = first
    for j in range(n):
        if j > 0:
            denom = b - off * cp[j - 1]
        inv[j] = 1.0 / denom
        cp[j] = off * inv[j]
    return cp, inv


@njit(cache=True, fastmath={"contract"})
def _mass_row(q, p, f, kap, lo, hi, h, cosine, damp, use_damp, r2, free, tables, vel, work, ten):
    # leapfrog step with the junction-capacitance mass matrix, solved on the row window
    n = q.shape[0]
    half = 0.5 * h
    pv = p[lo:hi]
    fv = f[lo:hi]
    for i in range(pv.shape[0]):
        pv[i] += half * fv[i]
    t = 1 if (free and lo == 0) else 0
    cp = tables[t, 0]
    inv = tables[t, 1]
    off = -r2
    m = hi - lo
    # cp = off*inv, so each forward step is one fused multiply-add on the chain
    pw = p[lo:hi]
    work[0] = pw[0] * inv[0]
    for j in range(1, m):
        work[j] = pw[j] * inv[j] - cp[j] * work[j - 1]
    if free and hi == n and m > 1:
        denom = (1.0 + r2) - off * cp[m - 2]
        work[m - 1] = (p[hi - 1] - off * work[m - 2]) / denom
    vel[m - 1] = work[m - 1]
    for j in range(m - 2, -1, -1):
        vel[j] = work[j] - cp[j] * vel[j + 1]
    qv = q[lo:hi]
    for i in range(m):
        qv[i] += h * vel[i]
    _force_kick(q, p, f, kap, lo, hi, half, cosine, damp, use_damp, ten)


@njit(cache=True)
def advance(phi, p, t0, h, nsteps, kap, prof, moving, periodic, free, cosine, r2,
            damp, use_damp, start_step, track_every, pad, tol):
    """Kick-drift-kick leapfrog for nsteps; returns (t, status), status -1 or the failing step.

    Row j takes part once ``step >= start_step[j]`` (start_step must be
    non-decreasing).  With ``track_every > 0`` each row is updated only on a
    window around its own significant support, refreshed every
    ``track_every`` steps; rows are paired (real, imaginary) so both parts
    of a complex field share one window.
    """
    mtot, n = phi.shape
    nl = kap.shape[0]
    tension = np.zeros((mtot, n + 1))
    force = np.zeros((mtot, n))
    vel = np.zeros(n)
    cp = np.zeros(n)
    work = np.zeros(n)
    scratch = np.zeros(n + 1)
    lo = np.zeros(mtot, dtype=np.int64)
    hi = np.full(mtot, n, dtype=np.int64)
    half = 0.5 * h
    tables = np.empty((2, 2, n))
    if r2 != 0.0 and not periodic:
        tables[0, 0], tables[0, 1] = thomas_tables(n, r2, 1.0 + 2.0 * r2)
        tables[1, 0], tables[1, 1] = thomas_tables(n, r2, 1.0 + r2)
    t = t0
    tracking = track_every > 0 and not periodic
    m = 0
    fill_stiffness(kap, 0, nl - 1, t, prof, free)
    for step in range(nsteps):
        m_new = _active_rows(start_step, step)
        fresh = m
        m = m_new
        if tracking and step % track_every == 0:
            fresh = 0
        if fresh < m:
            if tracking:
                for j in range(fresh, m, 2):
                    a, b = row_support(phi, p, j, tol, pad)
                    if j + 1 < m:
                        a2, b2 = row_support(phi, p, j + 1, tol, pad)
                        a, b = min(a, a2), max(b, b2)
                        lo[j + 1], hi[j + 1] = a, b
                    lo[j], hi[j] = a, b
            for j in range(fresh, m):
                _row_force(phi, kap, j, lo[j], hi[j], periodic, cosine, tension, force)
        if m == 0:
            t = t + h
            continue
        if not periodic:
            if moving:
                refresh_front(kap, t + h, prof, free)
            if r2 == 0.0:
                for j in range(m):
                    _fused_row(phi[j], p[j], force[j], kap, lo[j], hi[j], h, cosine, damp, use_damp, scratch)
            else:
                for j in range(m):
                    _mass_row(phi[j], p[j], force[j], kap, lo[j], hi[j], h, cosine, damp, use_damp,
                              r2, free, tables, vel, work, scratch)
            t = t + h
            if step % 256 == 255 or step == nsteps - 1:
                acc = 0.0
                for j in range(m):
                    for i in range(lo[j], hi[j]):
                        acc += phi[j, i] + p[j, i]
                if not math.isfinite(acc):
                    return t, step + 1
            continue
        for j in range(m):
            a, b = lo[j], hi[j]
            pv = p[j, a:b]
            fv = force[j, a:b]
            qv = phi[j, a:b]
            for i in range(pv.shape[0]):
                pv[i] += half * fv[i]
            if r2 != 0.0:
                solve_mass(p[j:j + 1], a, b, 1, r2, periodic, free, cp, work, vel.reshape(1, n))
                vv = vel[a:b]
                for i in range(qv.shape[0]):
                    qv[i] += h * vv[i]
            else:
                for i in range(qv.shape[0]):
                    qv[i] += h * pv[i]
        t = t + h
        if moving:
            refresh_front(kap, t, prof, free)
        for j in range(m):
            a, b = lo[j], hi[j]
            _row_force(phi, kap, j, a, b, periodic, cosine, tension, force)
            pv = p[j, a:b]
            fv = force[j, a:b]
            for i in range(pv.shape[0]):
                pv[i] += half * fv[i]
            if use_damp:
                dv = damp[a:b]
                for i in range(pv.shape[0]):
                    pv[i] *= dv[i]
        if step % 256 == 255 or step == nsteps - 1:
            acc = 0.0
            for j in range(m):
                for i in range(lo[j], hi[j]):
                    acc += phi[j, i] + p[j, i]
            if not math.isfinite(acc):
                return t, step + 1
    return t, -1
