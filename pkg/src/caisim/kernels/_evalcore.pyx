# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled evaluation kernel; twin of evalcore_py.

Performs the same float operations in the same order as the pure backend so
results are bit-identical (build uses -ffp-contract=off). Keep any change
here mirrored there.
"""

import numpy as np

cdef double _INF = float("inf")


cdef bint _eval(
    int M, int N, double rate, double entry_bytes,
    int[::1] isel, int[::1] nsel,
    unsigned char[:, :, ::1] allowed,
    double[:, ::1] demand, double[:, ::1] mem,
    double[:, ::1] accf, double[:, ::1] oscale,
    double[::1] node_cap, double[::1] node_mem, double[::1] node_ecost,
    double[:, ::1] base_lat, double[:, ::1] perbyte,
    int[:, ::1] transit,
    int[::1] in_off, int[::1] in_src,
    int[::1] coloc_a, int[::1] coloc_b,
    int[::1] dl_src, int[::1] dl_dst, int[::1] dl_mask,
    double[::1] mem_used, double[::1] rate_used,
    double[::1] finish, double[::1] outb, double[::1] acc,
    double* out_lat, double* out_en, double* out_acc,
) nogil:
    cdef bint feasible = True
    cdef int i, k, n, e, s, ns, c, d, lo, hi, a, b
    cdef double dem, energy, in_bytes, in_acc, ready, miss, bl, bt, t_arr

    for n in range(N):
        mem_used[n] = 0.0
        rate_used[n] = 0.0
    energy = 0.0
    for i in range(M):
        k = isel[i]
        n = nsel[i]
        if allowed[i, k, n] == 0:
            feasible = False
        dem = demand[i, k]
        mem_used[n] += mem[i, k]
        rate_used[n] += dem * rate
        energy += dem * node_ecost[n]
    for n in range(N):
        if mem_used[n] > node_mem[n]:
            feasible = False
        if rate_used[n] > node_cap[n]:
            feasible = False

    for i in range(M):
        k = isel[i]
        n = nsel[i]
        lo = in_off[i]
        hi = in_off[i + 1]
        if lo == hi:
            in_bytes = entry_bytes
            in_acc = 1.0
            ready = 0.0
        else:
            in_bytes = 0.0
            ready = 0.0
            if hi - lo == 1:
                in_acc = acc[in_src[lo]]
            else:
                miss = 1.0
                for e in range(lo, hi):
                    miss *= 1.0 - acc[in_src[e]]
                in_acc = 1.0 - miss
            for e in range(lo, hi):
                s = in_src[e]
                bt = outb[s]
                in_bytes += bt
                ns = nsel[s]
                if ns == n:
                    t_arr = finish[s]
                else:
                    bl = base_lat[ns, n]
                    if bl == _INF:
                        feasible = False
                        t_arr = _INF
                    else:
                        t_arr = finish[s] + (bl + bt * perbyte[ns, n])
                if t_arr > ready:
                    ready = t_arr
        finish[i] = ready + demand[i, k] / node_cap[n]
        outb[i] = in_bytes * oscale[i, k]
        acc[i] = in_acc * accf[i, k]

    for c in range(coloc_a.shape[0]):
        if nsel[coloc_a[c]] != nsel[coloc_b[c]]:
            feasible = False
    for d in range(dl_src.shape[0]):
        a = nsel[dl_src[d]]
        b = nsel[dl_dst[d]]
        if a != b and (transit[a, b] & dl_mask[d]):
            feasible = False

    out_lat[0] = finish[M - 1]
    out_en[0] = energy
    out_acc[0] = acc[M - 1]
    return feasible


def eval_assignment(ws, impl_sel, node_sel):
    """Score one assignment; returns (feasible, latency, energy, accuracy).

    impl_sel/node_sel must be contiguous int32 arrays of length ws.M.
    """
    cdef int[::1] isel = impl_sel
    cdef int[::1] nsel = node_sel
    cdef double lat = 0.0, en = 0.0, ac = 0.0
    cdef bint feasible = _eval(
        ws.M, ws.N, ws.rate, ws.entry_bytes, isel, nsel,
        ws.allowed, ws.demand, ws.mem, ws.accf, ws.oscale,
        ws.node_cap, ws.node_mem, ws.node_ecost,
        ws.base_lat, ws.perbyte, ws.transit,
        ws.in_off, ws.in_src, ws.coloc_a, ws.coloc_b,
        ws.dl_src, ws.dl_dst, ws.dl_mask,
        ws.f_mem_used, ws.f_rate_used, ws.f_finish, ws.f_outb, ws.f_acc,
        &lat, &en, &ac)
    return bool(feasible), lat, en, ac


def search_best(ws, double w_lat, double w_energy, double w_acc,
                double lat_budget, double energy_budget, impl_out, node_out):
    """Exhaustive lexicographic scan; keeps the first strict objective minimum.

    Same enumeration order and tie-break as the pure twin. Fills
    impl_out/node_out (contiguous int32, length ws.M) when a feasible
    assignment exists.
    """
    cdef int M = ws.M
    cdef int N = ws.N
    cdef double rate = ws.rate, entry_bytes = ws.entry_bytes
    cdef unsigned char[:, :, ::1] allowed = ws.allowed
    cdef double[:, ::1] demand = ws.demand
    cdef double[:, ::1] mem = ws.mem
    cdef double[:, ::1] accf = ws.accf
    cdef double[:, ::1] oscale = ws.oscale
    cdef double[::1] node_cap = ws.node_cap
    cdef double[::1] node_mem = ws.node_mem
    cdef double[::1] node_ecost = ws.node_ecost
    cdef double[:, ::1] base_lat = ws.base_lat
    cdef double[:, ::1] perbyte = ws.perbyte
    cdef int[:, ::1] transit = ws.transit
    cdef int[::1] in_off = ws.in_off
    cdef int[::1] in_src = ws.in_src
    cdef int[::1] coloc_a = ws.coloc_a
    cdef int[::1] coloc_b = ws.coloc_b
    cdef int[::1] dl_src = ws.dl_src
    cdef int[::1] dl_dst = ws.dl_dst
    cdef int[::1] dl_mask = ws.dl_mask
    cdef double[::1] mem_used = ws.f_mem_used
    cdef double[::1] rate_used = ws.f_rate_used
    cdef double[::1] finish = ws.f_finish
    cdef double[::1] outb = ws.f_outb
    cdef double[::1] acc = ws.f_acc
    cdef int[::1] enc = ws.enc_order
    cdef int[::1] n_impls = ws.n_impls
    cdef int[::1] iout = impl_out
    cdef int[::1] nout = node_out

    isel_arr = np.zeros(M, dtype=np.int32)
    nsel_arr = np.zeros(M, dtype=np.int32)
    bi_arr = np.zeros(M, dtype=np.int32)
    bn_arr = np.zeros(M, dtype=np.int32)
    cdef int[::1] isel = isel_arr
    cdef int[::1] nsel = nsel_arr
    cdef int[::1] best_isel = bi_arr
    cdef int[::1] best_nsel = bn_arr

    cdef bint found = False
    cdef bint feasible
    cdef double best_j = _INF, best_lat = 0.0, best_en = 0.0, best_acc = 0.0
    cdef double lat = 0.0, en = 0.0, ac = 0.0, j
    cdef int pos, m, i

    with nogil:
        while True:
            feasible = _eval(
                M, N, rate, entry_bytes, isel, nsel,
                allowed, demand, mem, accf, oscale,
                node_cap, node_mem, node_ecost,
                base_lat, perbyte, transit,
                in_off, in_src, coloc_a, coloc_b,
                dl_src, dl_dst, dl_mask,
                mem_used, rate_used, finish, outb, acc,
                &lat, &en, &ac)
            if feasible:
                j = w_lat * (lat / lat_budget) + w_energy * (en / energy_budget) - w_acc * ac
                if (not found) or j < best_j:
                    found = True
                    best_j = j
                    best_lat = lat
                    best_en = en
                    best_acc = ac
                    for i in range(M):
                        best_isel[i] = isel[i]
                        best_nsel[i] = nsel[i]
            pos = M - 1
            while pos >= 0:
                m = enc[pos]
                if nsel[m] + 1 < N:
                    nsel[m] += 1
                    break
                nsel[m] = 0
                if isel[m] + 1 < n_impls[m]:
                    isel[m] += 1
                    break
                isel[m] = 0
                pos -= 1
            if pos < 0:
                break

    if found:
        for i in range(M):
            iout[i] = best_isel[i]
            nout[i] = best_nsel[i]
    return bool(found), best_j, best_lat, best_en, best_acc
