# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-voxel kernels. Semantics mirror kernels.reference exactly."""

from libc.math cimport fabs, floor, sqrt

import numpy as np

DEF VAR_FLOOR = 1e-12


def bin_counts(double[::1] values, long bin_count, double lo, double hi):
    cdef double span = hi - lo
    cdef long n = values.shape[0]
    out = np.zeros(bin_count, dtype=np.int64)
    cdef long[::1] counts = out
    cdef long i, j
    for i in range(n):
        j = <long>floor((values[i] - lo) / span * bin_count)
        if j < 0:
            j = 0
        elif j >= bin_count:
            j = bin_count - 1
        counts[j] += 1
    return out


def local_mean_std(double[::1] data, dims):
    cdef long nx = dims[0], ny = dims[1], nz = dims[2]
    mean_out = np.empty(nx * ny * nz, dtype=np.float64)
    std_out = np.empty(nx * ny * nz, dtype=np.float64)
    cdef double[::1] mean = mean_out
    cdef double[::1] std = std_out
    cdef long x, y, z, xx, yy, zz, x0, x1, y0, y1, z0, z1, idx, cnt
    cdef double s, ss, v, m, var
    for z in range(nz):
        z0 = z - 1 if z > 0 else 0
        z1 = z + 1 if z + 1 < nz else nz - 1
        for y in range(ny):
            y0 = y - 1 if y > 0 else 0
            y1 = y + 1 if y + 1 < ny else ny - 1
            for x in range(nx):
                x0 = x - 1 if x > 0 else 0
                x1 = x + 1 if x + 1 < nx else nx - 1
                s = 0.0
                ss = 0.0
                cnt = 0
                for zz in range(z0, z1 + 1):
                    for yy in range(y0, y1 + 1):
                        idx = x0 + nx * (yy + ny * zz)
                        for xx in range(x0, x1 + 1):
                            v = data[idx]
                            s += v
                            ss += v * v
                            cnt += 1
                            idx += 1
                idx = x + nx * (y + ny * z)
                m = s / cnt
                var = ss / cnt - m * m
                if var < VAR_FLOOR:
                    var = 0.0
                mean[idx] = m
                std[idx] = sqrt(var)
    return mean_out, std_out


def kmeans1d(double[::1] values, double[::1] centers0, long max_iters, double tol):
    cdef long n = values.shape[0]
    cdef long k = centers0.shape[0]
    centers_out = np.array(centers0, dtype=np.float64, copy=True)
    assign_out = np.zeros(n, dtype=np.int64)
    counts_out = np.zeros(k, dtype=np.int64)
    sums_out = np.zeros(k, dtype=np.float64)
    cdef double[::1] centers = centers_out
    cdef long[::1] assign = assign_out
    cdef long[::1] counts = counts_out
    cdef double[::1] sums = sums_out
    cdef long i, j, best, iters = 0
    cdef double d, dbest, shift, nc
    cdef bint empty
    for iters in range(1, max_iters + 1):
        for j in range(k):
            counts[j] = 0
            sums[j] = 0.0
        for i in range(n):
            best = 0
            dbest = fabs(values[i] - centers[0])
            for j in range(1, k):
                d = fabs(values[i] - centers[j])
                if d < dbest:
                    dbest = d
                    best = j
            assign[i] = best
            counts[best] += 1
            sums[best] += values[i]
        empty = False
        for j in range(k):
            if counts[j] == 0:
                empty = True
        if empty:
            break
        shift = 0.0
        for j in range(k):
            nc = sums[j] / counts[j]
            d = fabs(nc - centers[j])
            if d > shift:
                shift = d
            centers[j] = nc
        if shift < tol:
            break
    return centers_out, assign_out, counts_out, iters


def confusion(const unsigned char[::1] pred, const unsigned char[::1] gt,
              const unsigned char[::1] mask, long class_id):
    cdef long n = pred.shape[0]
    cdef long tp = 0, fp = 0, fn = 0, tn = 0
    cdef long i
    cdef bint p, g
    for i in range(n):
        if not mask[i]:
            continue
        p = pred[i] == class_id
        g = gt[i] == class_id
        if p and g:
            tp += 1
        elif p:
            fp += 1
        elif g:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn
