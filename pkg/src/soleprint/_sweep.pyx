# Compiled staged threshold sweep for the depth-to-print matching metric.
# Bit-compatible with the literal loop in soleprint._sweep_py.staged_sweep:
# identical candidate definitions, strict-improvement updates, and tie rule.
#
# Inputs are pre-masked by the caller: depth = +inf and gt = 0 outside the
# validity mask, so no candidate can ever include an unmasked pixel.
#
# Instead of scoring every grid value against every pixel, each pixel's
# candidate membership is monotone along each sweep (thresholds s*d_l and t
# are non-decreasing in the grid index, float rounding included), so a
# binary search per pixel finds its entry index and difference arrays
# accumulate intersection/union counts for the whole grid in one pass.
# Every comparison is the same float expression the literal loop uses, so
# the results match bit for bit.

import numpy as np

cimport numpy as cnp

BACKEND = "cython"


cdef Py_ssize_t _first_true_scaled(double dk, double dl,
                                   cnp.float64_t[::1] grid) noexcept:
    """First index i with dk < grid[i]*dl, assuming dl > 0 (monotone cond)."""
    cdef Py_ssize_t lo = 0, hi = grid.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if dk < grid[mid] * dl:
            hi = mid
        else:
            lo = mid + 1
    return lo


cdef Py_ssize_t _first_false_scaled(double dk, double dl,
                                    cnp.float64_t[::1] grid) noexcept:
    """First index i with NOT(dk < grid[i]*dl), assuming dl < 0."""
    cdef Py_ssize_t lo = 0, hi = grid.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if dk < grid[mid] * dl:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef Py_ssize_t _first_true_plain(double dk, cnp.float64_t[::1] grid) noexcept:
    """First index i with dk < grid[i] (grid non-decreasing)."""
    cdef Py_ssize_t lo = 0, hi = grid.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if dk < grid[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


def staged_sweep(cnp.float64_t[::1] depth,
                 cnp.float64_t[::1] d_l,
                 cnp.uint8_t[::1] gt,
                 cnp.float64_t[::1] s_grid,
                 cnp.float64_t[::1] tnc_grid,
                 cnp.float64_t[::1] tc_grid,
                 double v_init):
    """Run the three greedy threshold sweeps; return (v_max, i_s, i_tnc, i_tc)."""
    cdef Py_ssize_t n = depth.shape[0]
    cdef Py_ssize_t m1 = s_grid.shape[0]
    cdef Py_ssize_t m2 = tnc_grid.shape[0]
    cdef Py_ssize_t m3 = tc_grid.shape[0]
    cdef Py_ssize_t i, k, a, b
    cdef long n_gt = 0, run_i, run_u, inter, union_, base_int, base_oth
    cdef double v, v_max = v_init, s, t, dk, dl
    cdef int i_s = -1, i_tnc = -1, i_tc = -1
    cdef cnp.int64_t[::1] d2i, d2u, d3i, d3u

    for k in range(n):
        n_gt += gt[k]

    cdef cnp.int64_t[::1] diff_int = np.zeros(m1 + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] diff_uni = np.zeros(m1 + 1, dtype=np.int64)

    # stage 1: candidate = depth < s * d_l
    for k in range(n):
        dk = depth[k]
        dl = d_l[k]
        if dl > 0:
            a = _first_true_scaled(dk, dl, s_grid)
            b = m1
        elif dl < 0:
            a = 0
            b = _first_false_scaled(dk, dl, s_grid)
        else:
            a = 0
            b = m1 if dk < 0.0 * dl else 0
        if a < b:
            if gt[k]:
                diff_int[a] += 1
                diff_int[b] -= 1
            diff_uni[a] += 1
            diff_uni[b] -= 1

    run_i = 0
    run_u = 0
    for i in range(m1):
        run_i += diff_int[i]
        run_u += diff_uni[i]
        inter = run_i
        union_ = n_gt + (run_u - run_i)
        v = 1.0 if union_ == 0 else (<double>inter) / (<double>union_)
        if v > v_max:
            v_max = v
            i_s = i

    best_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] s_best = best_arr
    if i_s >= 0:
        s = s_grid[i_s]
        for k in range(n):
            s_best[k] = depth[k] < s * d_l[k]

    # stage 2: candidate = s_best AND (depth < t_nc). The first strict
    # improvement locks s_best in place (later, larger thresholds cannot
    # change the intersection), exactly as in the literal loop.
    if m2 > 0:
        d2i = np.zeros(m2 + 1, dtype=np.int64)
        d2u = np.zeros(m2 + 1, dtype=np.int64)
        for k in range(n):
            if not s_best[k]:
                continue
            a = _first_true_plain(depth[k], tnc_grid)
            if a < m2:
                if gt[k]:
                    d2i[a] += 1
                d2u[a] += 1
        run_i = 0
        run_u = 0
        for i in range(m2):
            run_i += d2i[i]
            run_u += d2u[i]
            inter = run_i
            union_ = n_gt + (run_u - run_i)
            v = 1.0 if union_ == 0 else (<double>inter) / (<double>union_)
            if v > v_max:
                v_max = v
                i_tnc = i
                break
        if i_tnc >= 0:
            t = tnc_grid[i_tnc]
            for k in range(n):
                s_best[k] = s_best[k] & (depth[k] < t)

    # stage 3: candidate = s_best OR (depth < t_c); s_best itself is fixed
    if m3 > 0:
        d3i = np.zeros(m3 + 1, dtype=np.int64)
        d3u = np.zeros(m3 + 1, dtype=np.int64)
        base_int = 0
        base_oth = 0
        for k in range(n):
            if s_best[k]:
                if gt[k]:
                    base_int += 1
                else:
                    base_oth += 1
            else:
                a = _first_true_plain(depth[k], tc_grid)
                if a < m3:
                    if gt[k]:
                        d3i[a] += 1
                    else:
                        d3u[a] += 1
        run_i = 0
        run_u = 0
        for i in range(m3):
            run_i += d3i[i]
            run_u += d3u[i]
            inter = base_int + run_i
            union_ = n_gt + base_oth + run_u
            v = 1.0 if union_ == 0 else (<double>inter) / (<double>union_)
            if v > v_max:
                v_max = v
                i_tc = i

    return v_max, i_s, i_tnc, i_tc
