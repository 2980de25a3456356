# Compiled twins of the py_backend kernels. Semantics are pinned by
# py_backend.py; outputs must stay bit-identical (tests/test_backends.py).

import numpy as np

cimport numpy as cnp

cnp.import_array()

# (dy, dx) tables; order matches py_backend.NBR8 / NBR9.
cdef int[8] NBR8_DY = [-1, -1, -1, 0, 0, 1, 1, 1]
cdef int[8] NBR8_DX = [-1, 0, 1, -1, 1, -1, 0, 1]


def vibe_step_kernel(
    cnp.uint8_t[:, :, ::1] reservoir,
    const cnp.uint8_t[:, ::1] frame,
    int radius,
    int min_matches,
    const cnp.uint8_t[:, ::1] own_gate,
    const cnp.int32_t[:, ::1] own_slot,
    const cnp.uint8_t[:, ::1] nbr_gate,
    const cnp.int32_t[:, ::1] nbr_choice,
    const cnp.int32_t[:, ::1] nbr_slot,
):
    cdef Py_ssize_t h = reservoir.shape[0]
    cdef Py_ssize_t w = reservoir.shape[1]
    cdef Py_ssize_t n = reservoir.shape[2]
    cdef Py_ssize_t y, x, k
    cdef int diff, count, val
    cdef Py_ssize_t ny, nx

    fg_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] fg = fg_arr

    # phase 1: classify every pixel against its reservoir
    for y in range(h):
        for x in range(w):
            val = frame[y, x]
            count = 0
            for k in range(n):
                diff = reservoir[y, x, k] - val
                if diff < 0:
                    diff = -diff
                if diff <= radius:
                    count += 1
                    if count >= min_matches:
                        break
            if count < min_matches:
                fg[y, x] = 1

    # phase 2a: own-sample updates, row-major
    for y in range(h):
        for x in range(w):
            if fg[y, x] == 0 and own_gate[y, x] != 0:
                reservoir[y, x, own_slot[y, x]] = frame[y, x]

    # phase 2b: neighbor updates, row-major source order, last writer wins
    for y in range(h):
        for x in range(w):
            if fg[y, x] == 0 and nbr_gate[y, x] != 0:
                k = nbr_choice[y, x]
                ny = y + NBR8_DY[k]
                nx = x + NBR8_DX[k]
                if ny < 0:
                    ny = 0
                elif ny >= h:
                    ny = h - 1
                if nx < 0:
                    nx = 0
                elif nx >= w:
                    nx = w - 1
                reservoir[ny, nx, nbr_slot[y, x]] = frame[y, x]

    return fg_arr


def block_match_level(
    const cnp.int32_t[:, ::1] a,
    const cnp.int32_t[:, ::1] b,
    const cnp.int32_t[:, :, ::1] prior,
    int block,
    int radius,
):
    cdef Py_ssize_t h = a.shape[0]
    cdef Py_ssize_t w = a.shape[1]
    cdef Py_ssize_t nby = prior.shape[0]
    cdef Py_ssize_t nbx = prior.shape[1]
    cdef Py_ssize_t bi, bj, i, j
    cdef Py_ssize_t y0, x0, cy, cx
    cdef int pu, pv, du, dv, u, v, d
    cdef long long sad, best_sad, best_mag, mag
    cdef int best_u, best_v, have_best

    out_arr = np.zeros((nby, nbx, 2), dtype=np.int32)
    cdef cnp.int32_t[:, :, ::1] out = out_arr

    for bi in range(nby):
        y0 = bi * block
        if y0 > h - block:
            y0 = h - block
        for bj in range(nbx):
            x0 = bj * block
            if x0 > w - block:
                x0 = w - block
            pu = prior[bi, bj, 0]
            if pu < -x0:
                pu = -<int>x0
            elif pu > (w - block) - x0:
                pu = <int>((w - block) - x0)
            pv = prior[bi, bj, 1]
            if pv < -y0:
                pv = -<int>y0
            elif pv > (h - block) - y0:
                pv = <int>((h - block) - y0)

            have_best = 0
            best_sad = 0
            best_mag = 0
            best_u = 0
            best_v = 0
            for dv in range(-radius, radius + 1):
                cy = y0 + pv + dv
                if cy < 0 or cy > h - block:
                    continue
                for du in range(-radius, radius + 1):
                    cx = x0 + pu + du
                    if cx < 0 or cx > w - block:
                        continue
                    sad = 0
                    for i in range(block):
                        for j in range(block):
                            d = a[y0 + i, x0 + j] - b[cy + i, cx + j]
                            if d < 0:
                                d = -d
                            sad += d
                    u = pu + du
                    v = pv + dv
                    mag = <long long>u * u + <long long>v * v
                    if (
                        have_best == 0
                        or sad < best_sad
                        or (sad == best_sad and mag < best_mag)
                        or (sad == best_sad and mag == best_mag and v < best_v)
                        or (
                            sad == best_sad
                            and mag == best_mag
                            and v == best_v
                            and u < best_u
                        )
                    ):
                        have_best = 1
                        best_sad = sad
                        best_mag = mag
                        best_u = u
                        best_v = v
            out[bi, bj, 0] = best_u
            out[bi, bj, 1] = best_v

    return out_arr


def label_components(const cnp.uint8_t[:, ::1] mask, int connectivity):
    cdef Py_ssize_t h = mask.shape[0]
    cdef Py_ssize_t w = mask.shape[1]
    cdef Py_ssize_t y, x, cy, cx, ny, nx
    cdef Py_ssize_t top
    cdef int n = 0
    cdef int k, nk

    labels_arr = np.zeros((h, w), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] labels = labels_arr
    stack_y_arr = np.empty(h * w, dtype=np.intp)
    stack_x_arr = np.empty(h * w, dtype=np.intp)
    cdef cnp.intp_t[::1] stack_y = stack_y_arr
    cdef cnp.intp_t[::1] stack_x = stack_x_arr

    nk = 8 if connectivity == 8 else 4
    cdef int[8] dy
    cdef int[8] dx
    if connectivity == 8:
        for k in range(8):
            dy[k] = NBR8_DY[k]
            dx[k] = NBR8_DX[k]
    else:
        dy[0] = -1; dx[0] = 0
        dy[1] = 0;  dx[1] = -1
        dy[2] = 0;  dx[2] = 1
        dy[3] = 1;  dx[3] = 0

    for y in range(h):
        for x in range(w):
            if mask[y, x] != 0 and labels[y, x] == 0:
                n += 1
                labels[y, x] = n
                top = 0
                stack_y[0] = y
                stack_x[0] = x
                top = 1
                while top > 0:
                    top -= 1
                    cy = stack_y[top]
                    cx = stack_x[top]
                    for k in range(nk):
                        ny = cy + dy[k]
                        nx = cx + dx[k]
                        if ny < 0 or ny >= h or nx < 0 or nx >= w:
                            continue
                        if mask[ny, nx] != 0 and labels[ny, nx] == 0:
                            labels[ny, nx] = n
                            stack_y[top] = ny
                            stack_x[top] = nx
                            top += 1

    return labels_arr, n
