"""Pure-Python evaluation kernel.

Twin of the Cython extension ``_evalcore``: same operations in the same
order, so both backends produce bit-identical floats. Keep any change here
mirrored there.
"""

from __future__ import annotations

_INF = float("inf")


def _eval(ws, isel, nsel):
    """Core single-assignment evaluation over plain int lists."""
    p = ws.py
    M = ws.M
    N = ws.N
    rate = ws.rate
    feasible = True

    mem_used = [0.0] * N
    rate_used = [0.0] * N
    energy = 0.0
    for i in range(M):
        k = isel[i]
        n = nsel[i]
        if not p.allowed[i][k][n]:
            feasible = False
        d = p.demand[i][k]
        mem_used[n] += p.mem[i][k]
        rate_used[n] += d * rate
        energy += d * p.node_ecost[n]
    for n in range(N):
        if mem_used[n] > p.node_mem[n]:
            feasible = False
        if rate_used[n] > p.node_cap[n]:
            feasible = False

    finish = [0.0] * M
    outb = [0.0] * M
    acc = [0.0] * M
    in_off = p.in_off
    in_src = p.in_src
    base_lat = p.base_lat
    perbyte = p.perbyte
    for i in range(M):
        k = isel[i]
        n = nsel[i]
        lo = in_off[i]
        hi = in_off[i + 1]
        if lo == hi:
            in_bytes = ws.entry_bytes
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
                b = outb[s]
                in_bytes += b
                ns = nsel[s]
                if ns == n:
                    t_arr = finish[s]
                else:
                    bl = base_lat[ns][n]
                    if bl == _INF:
                        feasible = False
                        t_arr = _INF
                    else:
                        t_arr = finish[s] + (bl + b * perbyte[ns][n])
                if t_arr > ready:
                    ready = t_arr
        finish[i] = ready + p.demand[i][k] / p.node_cap[n]
        outb[i] = in_bytes * p.oscale[i][k]
        acc[i] = in_acc * p.accf[i][k]

    for c in range(len(p.coloc_a)):
        if nsel[p.coloc_a[c]] != nsel[p.coloc_b[c]]:
            feasible = False
    transit = p.transit
    for d in range(len(p.dl_src)):
        a = nsel[p.dl_src[d]]
        b = nsel[p.dl_dst[d]]
        if a != b and transit[a][b] & p.dl_mask[d]:
            feasible = False

    return feasible, finish[M - 1], energy, acc[M - 1]


def eval_assignment(ws, impl_sel, node_sel):
    """Score one assignment; returns (feasible, latency, energy, accuracy)."""
    return _eval(ws, [int(x) for x in impl_sel], [int(x) for x in node_sel])


def search_best(ws, w_lat, w_energy, w_acc, lat_budget, energy_budget, impl_out, node_out):
    """Exhaustive lexicographic scan; keeps the first strict objective minimum.

    Candidates enumerate in ascending lexicographic order of the assignment
    encoding (modules by id, then implementation index, then node index), so
    ties resolve to the encoding-smallest assignment. Returns
    (found, J, latency, energy, accuracy) and fills impl_out/node_out when
    found.
    """
    p = ws.py
    M = ws.M
    N = ws.N
    enc = p.enc_order
    n_impls = p.n_impls
    isel = [0] * M
    nsel = [0] * M
    found = False
    best_j = _INF
    best_lat = 0.0
    best_en = 0.0
    best_acc = 0.0
    best_isel = [0] * M
    best_nsel = [0] * M
    while True:
        feasible, lat, en, acc = _eval(ws, isel, nsel)
        if feasible:
            j = w_lat * (lat / lat_budget) + w_energy * (en / energy_budget) - w_acc * acc
            if not found or j < best_j:
                found = True
                best_j = j
                best_lat = lat
                best_en = en
                best_acc = acc
                best_isel = isel.copy()
                best_nsel = nsel.copy()
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
            impl_out[i] = best_isel[i]
            node_out[i] = best_nsel[i]
    return found, best_j, best_lat, best_en, best_acc
