"""Compiled inner loops for the l-infinity blocks of the min-norm solver.

Layout shared by both kernels: ``ptr``/``verts`` is the CSR incidence,
``role[k]`` is +1 when incidence entry ``k`` sits in its hyperedge's top tie
set, -1 in the bottom tie set and 0 otherwise. ``y`` holds the local witness
values (nonnegative on the top set summing to 1/2, nonpositive on the bottom
set summing to -1/2). ``coef[h] = w_h * f_h``. ``g`` is the gradient
``D^{-1}(z - target)`` and is kept in sync with ``z``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def linf_sweep(ptr, verts, role, y, coef, edges, z, g, invd, sweeps):
    for _ in range(sweeps):
        for h in edges:
            c = coef[h]
            s = ptr[h]
            e = ptr[h + 1]
            # top set: move mass from the largest-gradient supported entry
            # to the smallest-gradient entry
            q = -1
            p = -1
            gq = np.inf
            gp = -np.inf
            for k in range(s, e):
                if role[k] == 1:
                    gv = g[verts[k]]
                    if gv < gq:
                        gq = gv
                        q = k
                    if y[k] > 0.0 and gv > gp:
                        gp = gv
                        p = k
            if p >= 0 and q >= 0 and p != q and gp > gq:
                vp = verts[p]
                vq = verts[q]
                delta = (gp - gq) / (c * (invd[vp] + invd[vq]))
                if delta > y[p]:
                    delta = y[p]
                y[p] -= delta
                y[q] += delta
                dz = c * delta
                z[vp] -= dz
                z[vq] += dz
                g[vp] -= invd[vp] * dz
                g[vq] += invd[vq] * dz
            # bottom set: mirror image with the sign of y flipped
            q = -1
            p = -1
            gq = -np.inf
            gp = np.inf
            for k in range(s, e):
                if role[k] == -1:
                    gv = g[verts[k]]
                    if gv > gq:
                        gq = gv
                        q = k
                    if y[k] < 0.0 and gv < gp:
                        gp = gv
                        p = k
            if p >= 0 and q >= 0 and p != q and gq > gp:
                vp = verts[p]
                vq = verts[q]
                delta = (gq - gp) / (c * (invd[vp] + invd[vq]))
                if delta > -y[p]:
                    delta = -y[p]
                y[p] += delta
                y[q] -= delta
                dz = c * delta
                z[vp] += dz
                z[vq] -= dz
                g[vp] += invd[vp] * dz
                g[vq] -= invd[vq] * dz


@njit(cache=True)
def linf_gap(ptr, verts, role, y, coef, edges, g):
    total = 0.0
    for h in edges:
        c = coef[h]
        sa = 0.0
        sb = 0.0
        mina = np.inf
        maxb = -np.inf
        for k in range(ptr[h], ptr[h + 1]):
            gv = g[verts[k]]
            if role[k] == 1:
                sa += y[k] * gv
                if gv < mina:
                    mina = gv
            elif role[k] == -1:
                sb += y[k] * gv
                if gv > maxb:
                    maxb = gv
        total += c * (sa - 0.5 * mina + sb + 0.5 * maxb)
    return total


@njit(cache=True)
def basic_witnesses(ptr, verts, kinds, x, balanced, y, f):
    """Shift values and witnesses of the l-infinity (kind 0) and l2 (kind 1) hyperedges.

    l-infinity witnesses put +1/2 on the top tie set and -1/2 on the bottom
    tie set, either on the lowest-index member or spread evenly. Other kinds
    are left untouched.
    """
    for h in range(ptr.size - 1):
        s = ptr[h]
        e = ptr[h + 1]
        kind = kinds[h]
        if kind == 0:
            mx = -np.inf
            mn = np.inf
            am = 0.0
            for k in range(s, e):
                v = x[verts[k]]
                if v > mx:
                    mx = v
                if v < mn:
                    mn = v
                if abs(v) > am:
                    am = abs(v)
            f[h] = (mx - mn) / 2.0
            if mx > mn:
                eps = min(1e-9 * (1.0 + am), (mx - mn) / 4.0)
                nt = 0
                nb = 0
                for k in range(s, e):
                    v = x[verts[k]]
                    if v >= mx - eps:
                        nt += 1
                    if v <= mn + eps:
                        nb += 1
                done_t = False
                done_b = False
                for k in range(s, e):
                    v = x[verts[k]]
                    if v >= mx - eps:
                        if balanced:
                            y[k] += 0.5 / nt
                        elif not done_t:
                            y[k] += 0.5
                            done_t = True
                    if v <= mn + eps:
                        if balanced:
                            y[k] -= 0.5 / nb
                        elif not done_b:
                            y[k] -= 0.5
                            done_b = True
        elif kind == 1:
            mean = 0.0
            for k in range(s, e):
                mean += x[verts[k]]
            mean /= e - s
            ss = 0.0
            for k in range(s, e):
                d = x[verts[k]] - mean
                ss += d * d
            nrm = np.sqrt(ss)
            f[h] = nrm
            if nrm > 0:
                for k in range(s, e):
                    y[k] = (x[verts[k]] - mean) / nrm


@njit(cache=True)
def lovasz_witnesses(ptr, verts, edges, offsets, tables, scales, x, y, f):
    """Shift values and greedy base-polytope witnesses of Lovász hyperedges.

    Elements are ordered by descending value with ties by position, which
    matches a stable sort. ``tables[offsets[h] + mask]`` is the cut value of
    subset ``mask`` of hyperedge ``h``.
    """
    for i in range(edges.size):
        h = edges[i]
        s = ptr[h]
        k = ptr[h + 1] - s
        xh = np.empty(k)
        for j in range(k):
            xh[j] = -x[verts[s + j]]
        order = np.argsort(xh, kind="mergesort")
        off = offsets[h]
        c = scales[h]
        if xh[order[0]] == xh[order[k - 1]]:
            f[h] = 0.0
            for j in range(k):
                y[s + j] = 0.0
            continue
        mask = 0
        prev = 0.0
        total = 0.0
        for j in range(k):
            e = order[j]
            mask |= 1 << e
            val = tables[off + mask]
            yj = c * (val - prev)
            y[s + e] = yj
            total -= yj * xh[e]
            prev = val
        f[h] = total
