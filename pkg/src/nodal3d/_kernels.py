"""Hot loops: atom-sum evaluation at scattered points and the
marching-tetrahedra nodal-line kernel.

Each kernel has a numba version (``*_nb``) and a numpy version (``*_np``)
computing the same quantity; the public wrappers pick one via
:mod:`nodal3d._accel`.
"""

import numpy as np

from ._accel import njit, use_numba

# Kuhn subdivision: tets follow monotone paths (0,0,0) -> (1,1,1), one per
# axis permutation. Vertices along a path have increasing global index.
PERMS = np.array([[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]], dtype=np.int64)


def _tet_offsets():
    out = np.zeros((6, 4, 3), dtype=np.int64)
    for t, perm in enumerate(PERMS):
        cur = np.zeros(3, dtype=np.int64)
        for s in range(3):
            cur = cur.copy()
            cur[perm[s]] = 1
            out[t, s + 1] = cur
    return out


TET_OFFSETS = _tet_offsets()
# corner id = 4*dx + 2*dy + dz
TET_CORNERS = (TET_OFFSETS[..., 0] * 4 + TET_OFFSETS[..., 1] * 2 + TET_OFFSETS[..., 2]).astype(np.int64)
FACES = np.array([[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]], dtype=np.int64)


# ---------------------------------------------------------------------------
# atom sums

@njit(cache=True, nogil=True)
def atom_sum_points_nb(k, theta, pts, amp):
    npts = pts.shape[0]
    m = k.shape[0]
    val = np.zeros(npts)
    grad = np.zeros((npts, 3))
    for p in range(npts):
        x0 = pts[p, 0]
        x1 = pts[p, 1]
        x2 = pts[p, 2]
        s = 0.0
        g0 = 0.0
        g1 = 0.0
        g2 = 0.0
        for j in range(m):
            ph = k[j, 0] * x0 + k[j, 1] * x1 + k[j, 2] * x2 + theta[j]
            c = np.cos(ph)
            sn = np.sin(ph)
            s += c
            g0 -= k[j, 0] * sn
            g1 -= k[j, 1] * sn
            g2 -= k[j, 2] * sn
        val[p] = amp * s
        grad[p, 0] = amp * g0
        grad[p, 1] = amp * g1
        grad[p, 2] = amp * g2
    return val, grad


def atom_sum_points_np(k, theta, pts, amp, chunk=1 << 20):
    npts = pts.shape[0]
    val = np.empty(npts)
    grad = np.empty((npts, 3))
    step = max(1, chunk // max(1, k.shape[0]))
    for i in range(0, npts, step):
        ph = pts[i:i + step] @ k.T + theta[None, :]
        val[i:i + step] = amp * np.cos(ph).sum(axis=1)
        grad[i:i + step] = -amp * (np.sin(ph) @ k)
    return val, grad


def atom_sum_points(k, theta, pts, amp, backend=None):
    pts = np.ascontiguousarray(pts, dtype=float).reshape(-1, 3)
    if _pick(backend) == "numba":
        return atom_sum_points_nb(k, theta, pts, float(amp))
    return atom_sum_points_np(k, theta, pts, float(amp))


def _pick(backend):
    if backend is None or backend == "auto":
        return "numba" if use_numba() else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not use_numba():
        raise RuntimeError("numba backend requested but numba is unavailable or disabled")
    return backend


# ---------------------------------------------------------------------------
# marching tetrahedra for the common zero set of two scalar fields
#
# On each tet the pair (u, v) is affine, so {u = v = 0} is the preimage of the
# origin under a map tet -> R^2. A face is crossed iff the origin lies in the
# image triangle; ties are broken by moving the query point to (d, d^2) with
# d -> 0+, which yields the orientation sign below. Shared faces therefore get
# identical verdicts from both neighbouring tets.

@njit(cache=True, nogil=True, inline="always")
def _sos_sign(ua, va, ub, vb):
    m = ua * vb - ub * va
    if m > 0.0:
        return 1
    if m < 0.0:
        return -1
    d = va - vb
    if d > 0.0:
        return 1
    if d < 0.0:
        return -1
    d = ub - ua
    if d > 0.0:
        return 1
    if d < 0.0:
        return -1
    return 0


@njit(cache=True, nogil=True)
def nodal_kernel_nb(u, v, origin, h, order, tet_corners, faces, want_segments, offsets, seg_out):
    nx, ny, nz = u.shape
    cx, cy, cz = nx - 1, ny - 1, nz - 1
    ncell = cx * cy * cz
    lengths = np.zeros(ncell)
    nseg = np.zeros(ncell, dtype=np.int64)
    degenerate = 0
    cu = np.empty(8)
    cv = np.empty(8)
    cpos = np.empty((8, 3))
    tu = np.empty(4)
    tv = np.empty(4)
    tp = np.empty((4, 3))
    sgn = np.zeros((4, 4), dtype=np.int64)
    mnr = np.zeros((4, 4))
    pts = np.empty((4, 3))
    for oi in range(order.shape[0]):
        cell = order[oi]
        i = cell // (cy * cz)
        rem = cell - i * cy * cz
        j = rem // cz
        kk = rem - j * cz
        for c in range(8):
            dx = c >> 2
            dy = (c >> 1) & 1
            dz = c & 1
            cu[c] = u[i + dx, j + dy, kk + dz]
            cv[c] = v[i + dx, j + dy, kk + dz]
            cpos[c, 0] = origin[0] + h[0] * (i + dx)
            cpos[c, 1] = origin[1] + h[1] * (j + dy)
            cpos[c, 2] = origin[2] + h[2] * (kk + dz)
        total = 0.0
        count = 0
        for t in range(6):
            for a in range(4):
                c = tet_corners[t, a]
                tu[a] = cu[c]
                tv[a] = cv[c]
                tp[a, 0] = cpos[c, 0]
                tp[a, 1] = cpos[c, 1]
                tp[a, 2] = cpos[c, 2]
            for a in range(4):
                for b in range(a + 1, 4):
                    sgn[a, b] = _sos_sign(tu[a], tv[a], tu[b], tv[b])
                    mnr[a, b] = tu[a] * tv[b] - tu[b] * tv[a]
            hits = 0
            for f in range(4):
                a = faces[f, 0]
                b = faces[f, 1]
                c = faces[f, 2]
                s1 = sgn[a, b]
                s2 = sgn[b, c]
                s3 = -sgn[a, c]
                if s1 == 0 or s1 != s2 or s2 != s3:
                    continue
                wa = mnr[b, c]
                wb = -mnr[a, c]
                wc = mnr[a, b]
                sw = wa + wb + wc
                if sw == 0.0:
                    continue
                if hits < 4:
                    for d in range(3):
                        pts[hits, d] = (wa * tp[a, d] + wb * tp[b, d] + wc * tp[c, d]) / sw
                hits += 1
            if hits == 2:
                dx = pts[1, 0] - pts[0, 0]
                dy = pts[1, 1] - pts[0, 1]
                dz = pts[1, 2] - pts[0, 2]
                total += np.sqrt(dx * dx + dy * dy + dz * dz)
                if want_segments:
                    o = offsets[cell] + count
                    for d in range(3):
                        seg_out[o, d] = pts[0, d]
                        seg_out[o, 3 + d] = pts[1, d]
                count += 1
            elif hits != 0:
                degenerate += 1
        lengths[cell] = total
        nseg[cell] = count
    return lengths, nseg, degenerate


def nodal_kernel_np(u, v, origin, h, order, want_segments=False, slab=8):
    """Vectorized counterpart of :func:`nodal_kernel_nb` (x-slabs at a time)."""
    nx, ny, nz = u.shape
    cx, cy, cz = nx - 1, ny - 1, nz - 1
    lengths = np.zeros((cx, cy, cz))
    nseg = np.zeros((cx, cy, cz), dtype=np.int64)
    degenerate = 0
    segs = []
    for i0 in range(0, cx, slab):
        i1 = min(cx, i0 + slab)
        corners_u = np.empty((8, i1 - i0, cy, cz))
        corners_v = np.empty_like(corners_u)
        for c in range(8):
            dx, dy, dz = c >> 2, (c >> 1) & 1, c & 1
            corners_u[c] = u[i0 + dx:i1 + dx, dy:dy + cy, dz:dz + cz]
            corners_v[c] = v[i0 + dx:i1 + dx, dy:dy + cy, dz:dz + cz]
        ii, jj, kk = np.meshgrid(np.arange(i0, i1), np.arange(cy), np.arange(cz), indexing="ij")
        base = np.stack([origin[0] + h[0] * ii, origin[1] + h[1] * jj, origin[2] + h[2] * kk])
        total = np.zeros((i1 - i0, cy, cz))
        count = np.zeros((i1 - i0, cy, cz), dtype=np.int64)
        cell_segs = []
        for t in range(6):
            idx = TET_CORNERS[t]
            tu = corners_u[idx]
            tv = corners_v[idx]
            off = TET_OFFSETS[t]
            pos = [np.stack([base[0] + h[0] * off[a, 0], base[1] + h[1] * off[a, 1],
                             base[2] + h[2] * off[a, 2]]) for a in range(4)]
            sg = {}
            mn = {}
            for a in range(4):
                for b in range(a + 1, 4):
                    sg[a, b] = _sos_sign_np(tu[a], tv[a], tu[b], tv[b])
                    mn[a, b] = tu[a] * tv[b] - tu[b] * tv[a]
            hits = np.zeros(tu.shape[1:], dtype=np.int64)
            p0 = np.zeros((3,) + tu.shape[1:])
            p1 = np.zeros_like(p0)
            for a, b, c in FACES:
                s1, s2, s3 = sg[a, b], sg[b, c], -sg[a, c]
                wa, wb, wc = mn[b, c], -mn[a, c], mn[a, b]
                sw = wa + wb + wc
                ok = (s1 != 0) & (s1 == s2) & (s2 == s3) & (sw != 0.0)
                with np.errstate(invalid="ignore", divide="ignore"):
                    pt = (wa * pos[a] + wb * pos[b] + wc * pos[c]) / np.where(ok, sw, 1.0)
                first = ok & (hits == 0)
                second = ok & (hits == 1)
                p0 = np.where(first, pt, p0)
                p1 = np.where(second, pt, p1)
                hits += ok
            good = hits == 2
            seglen = np.sqrt(((p1 - p0) ** 2).sum(axis=0))
            total += np.where(good, seglen, 0.0)
            count += good
            degenerate += int(np.count_nonzero((hits != 0) & ~good))
            if want_segments:
                cell_segs.append((good, p0, p1))
        lengths[i0:i1] = total
        nseg[i0:i1] = count
        if want_segments:
            segs.append(cell_segs)
    seg_arr = None
    if want_segments:
        # order segments by cell then tet, matching the numba layout
        rows = []
        for sl, cell_segs in zip(range(0, cx, slab), segs):
            goods = np.stack([g for g, _, _ in cell_segs], axis=-1)
            p0s = np.stack([p for _, p, _ in cell_segs], axis=-1)
            p1s = np.stack([p for _, _, p in cell_segs], axis=-1)
            flat_g = goods.reshape(-1)
            a = np.moveaxis(p0s, 0, -1).reshape(-1, 3)[flat_g]
            b = np.moveaxis(p1s, 0, -1).reshape(-1, 3)[flat_g]
            rows.append(np.hstack([a, b]))
        seg_arr = np.vstack(rows) if rows else np.zeros((0, 6))
    return lengths.ravel(), nseg.ravel(), degenerate, seg_arr


def _sos_sign_np(ua, va, ub, vb):
    m = ua * vb - ub * va
    out = np.sign(m).astype(np.int64)
    z = out == 0
    if np.any(z):
        d1 = np.sign(va - vb).astype(np.int64)
        d2 = np.sign(ub - ua).astype(np.int64)
        out = np.where(z, np.where(d1 != 0, d1, d2), out)
    return out


def nodal_cells(u, v, origin, h, order=None, want_segments=False, backend=None):
    """Per-cell polyline lengths of {u = v = 0}; returns (lengths, nseg, degenerate, segments)."""
    u = np.ascontiguousarray(u, dtype=float)
    v = np.ascontiguousarray(v, dtype=float)
    origin = np.asarray(origin, dtype=float)
    h = np.broadcast_to(np.asarray(h, dtype=float), (3,)).copy()
    ncell = int(np.prod(np.array(u.shape) - 1))
    if _pick(backend) == "numpy":
        if order is not None:
            # the vectorized path has no traversal order; cells are independent
            order = np.asarray(order)
            if sorted(order.tolist()) != list(range(ncell)):
                raise ValueError("order must be a permutation of the cell indices")
        return nodal_kernel_np(u, v, origin, h, None, want_segments)
    order = np.arange(ncell, dtype=np.int64) if order is None else np.asarray(order, dtype=np.int64)
    dummy_off = np.zeros(1, dtype=np.int64)
    dummy_seg = np.zeros((1, 6))
    lengths, nseg, degenerate = nodal_kernel_nb(u, v, origin, h, order, TET_CORNERS, FACES, False,
                                                dummy_off, dummy_seg)
    segs = None
    if want_segments:
        offsets = np.concatenate([[0], np.cumsum(nseg)[:-1]]).astype(np.int64)
        segs = np.zeros((int(nseg.sum()), 6))
        nodal_kernel_nb(u, v, origin, h, order, TET_CORNERS, FACES, True, offsets, segs)
    return lengths, nseg, degenerate, segs


def tree_sum(values):
    """Pairwise sum with a fixed binary tree (schedule independent)."""
    a = np.asarray(values, dtype=float).ravel()
    if a.size == 0:
        return 0.0
    while a.size > 1:
        if a.size % 2:
            a = np.append(a, 0.0)
        a = a[0::2] + a[1::2]
    return float(a[0])


# ---------------------------------------------------------------------------
# radial transforms: sum_j w_j * (d/dt)^m sinc(t rho_j), m = 0, 1, 2

@njit(cache=True, nogil=True)
def sinc_moments_nb(t, rho, w, coef, x_series):
    nt = t.shape[0]
    nr = rho.shape[0]
    nc = coef.shape[0]
    out = np.zeros((3, nt))
    for i in range(nt):
        a0 = 0.0
        a1 = 0.0
        a2 = 0.0
        for j in range(nr):
            r = rho[j]
            x = t[i] * r
            if abs(x) < x_series:
                x2 = x * x
                s0 = 0.0
                s1 = 0.0
                s2 = 0.0
                for k in range(nc - 1, -1, -1):
                    c = coef[k]
                    s0 = s0 * x2 + c
                    if k >= 1:
                        s1 = s1 * x2 + c * 2 * k
                        s2 = s2 * x2 + c * 2 * k * (2 * k - 1)
                f0 = s0
                f1 = s1 * x
                f2 = s2
            else:
                sx = np.sin(x)
                cx = np.cos(x)
                f0 = sx / x
                f1 = (x * cx - sx) / (x * x)
                f2 = ((2.0 - x * x) * sx - 2.0 * x * cx) / (x * x * x)
            wj = w[j]
            a0 += wj * f0
            a1 += wj * r * f1
            a2 += wj * r * r * f2
        out[0, i] = a0
        out[1, i] = a1
        out[2, i] = a2
    return out
