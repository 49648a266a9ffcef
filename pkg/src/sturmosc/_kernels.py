"""Compiled fixed-step integrator for ``-u'' + V u = E u``, ``u(0) = 0``, ``u'(0) = 1``.

Several energies are advanced on one shared set of steps.  The potential is
given as linear segments; steps never straddle a segment boundary.  Alongside
``(u, u')`` the kernel integrates ``I(x) = int_0^x u^2`` and unwraps the Pruefer
angle ``theta = atan2(u, u')``.  Every ``RENORM_EVERY`` steps each solution is
rescaled to ``u^2 + u'^2 = 1``; ``log_scale`` accumulates the removed factors
and ``I`` is rescaled with them, so that ``I / u'^2`` and ``theta`` are
unaffected.

Status codes: 0 ok, 1 an angle increment left ``(-pi/2, pi)``, 2 ``theta``
crossed a multiple of ``pi`` downward.  Both mean the step is too coarse.
"""

import math

import numpy as np
from numba import njit

RENORM_EVERY = 100


@njit(cache=True)
def integrate(seg_x0, seg_len, seg_v0, seg_v1, nsub, energies, record):
    m = energies.size
    nseg = seg_x0.size
    total = 0
    for s in range(nseg):
        total += nsub[s]
    ntr = total + 1 if record else 1

    xs = np.empty(ntr)
    us = np.empty((ntr, m))
    dus = np.empty((ntr, m))
    ths = np.empty((ntr, m))
    ints = np.empty((ntr, m))
    lss = np.empty((ntr, m))

    u = np.zeros(m)
    du = np.ones(m)
    acc = np.zeros(m)
    theta = np.zeros(m)
    ang = np.zeros(m)
    logs = np.zeros(m)
    level = np.zeros(m, dtype=np.int64)

    xs[0] = seg_x0[0]
    for i in range(m):
        us[0, i] = 0.0
        dus[0, i] = 1.0
        ths[0, i] = 0.0
        ints[0, i] = 0.0
        lss[0, i] = 0.0

    status = 0
    step = 0
    half_pi = 0.5 * math.pi
    x_end = seg_x0[0]
    for s in range(nseg):
        k = nsub[s]
        h = seg_len[s] / k
        slope = (seg_v1[s] - seg_v0[s]) / seg_len[s] if seg_len[s] > 0 else 0.0
        v0 = seg_v0[s]
        for j in range(k):
            vl = v0 + slope * (j * h)
            vm = v0 + slope * ((j + 0.5) * h)
            vr = v0 + slope * ((j + 1) * h)
            for i in range(m):
                E = energies[i]
                y = u[i]
                d = du[i]
                k1u = d
                k1d = (vl - E) * y
                k1i = y * y
                y2 = y + 0.5 * h * k1u
                d2 = d + 0.5 * h * k1d
                k2u = d2
                k2d = (vm - E) * y2
                k2i = y2 * y2
                y3 = y + 0.5 * h * k2u
                d3 = d + 0.5 * h * k2d
                k3u = d3
                k3d = (vm - E) * y3
                k3i = y3 * y3
                y4 = y + h * k3u
                d4 = d + h * k3d
                k4u = d4
                k4d = (vr - E) * y4
                k4i = y4 * y4
                y = y + h * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
                d = d + h * (k1d + 2.0 * k2d + 2.0 * k3d + k4d) / 6.0
                acc[i] += h * (k1i + 2.0 * k2i + 2.0 * k3i + k4i) / 6.0
                u[i] = y
                du[i] = d

                new_ang = math.atan2(y, d)
                inc = new_ang - ang[i]
                if inc > math.pi:
                    inc -= 2.0 * math.pi
                elif inc <= -math.pi:
                    inc += 2.0 * math.pi
                if inc <= -half_pi or inc >= math.pi:
                    status = 1
                theta[i] += inc
                ang[i] = new_ang
                lev = int(math.floor(theta[i] / math.pi))
                if lev < level[i]:
                    status = 2
                elif lev > level[i]:
                    level[i] = lev
            step += 1
            if step % RENORM_EVERY == 0:
                for i in range(m):
                    r = math.sqrt(u[i] * u[i] + du[i] * du[i])
                    u[i] /= r
                    du[i] /= r
                    acc[i] /= r * r
                    logs[i] += math.log(r)
            if record:
                xs[step] = seg_x0[s] + (j + 1) * h
                for i in range(m):
                    us[step, i] = u[i]
                    dus[step, i] = du[i]
                    ths[step, i] = theta[i]
                    ints[step, i] = acc[i]
                    lss[step, i] = logs[i]
        x_end = seg_x0[s] + seg_len[s]
    if not record:
        xs[0] = x_end
        for i in range(m):
            us[0, i] = u[i]
            dus[0, i] = du[i]
            ths[0, i] = theta[i]
            ints[0, i] = acc[i]
            lss[0, i] = logs[i]
    return status, xs, us, dus, ths, ints, lss
