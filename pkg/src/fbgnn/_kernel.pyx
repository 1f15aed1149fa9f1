# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled single-trial BP4 kernel (float32), mirroring the numpy reference path.

One DecoderState per worker: it owns the mutable message buffers and is reused
across trials; the graph arrays it holds are read-only.
"""

from libc.math cimport atanh, expf, log1pf, fabsf, fmaxf, tanh

import numpy as np

# cap on the tanh-domain product: 2*atanh(PMAX) ~ 35, beyond any sane clamp,
# so an empty extrinsic product (degree-1 check) lands exactly on +-clamp
cdef double PMAX = 1.0 - 1e-15


cdef inline float clampf(float v, float clamp) noexcept nogil:
    if v > clamp:
        return clamp
    if v < -clamp:
        return -clamp
    return v


cdef inline float softplusf(float u) noexcept nogil:
    if u > 0.0:
        return u + log1pf(expf(-u))
    return log1pf(expf(u))


cdef inline float logaddexpf(float a, float b) noexcept nogil:
    return fmaxf(a, b) + log1pf(expf(-fabsf(a - b)))


cdef inline float msg_xf(float x, float y, float z) noexcept nogil:
    return softplusf(-x) - logaddexpf(-y, -z)


cdef inline float msg_zf(float x, float y, float z) noexcept nogil:
    return softplusf(-z) - logaddexpf(-x, -y)


cdef class DecoderState:
    cdef int n, cx, cz, nex, nez, dmax
    cdef int[::1] xptr, xvar, zptr, zvar
    cdef float[::1] lam_x, lam_z, dx, dz, tx, tz
    cdef double[::1] td, pre

    def __init__(self, int n, xptr, xvar, zptr, zvar):
        self.n = n
        self.xptr = np.ascontiguousarray(xptr, dtype=np.int32)
        self.xvar = np.ascontiguousarray(xvar, dtype=np.int32)
        self.zptr = np.ascontiguousarray(zptr, dtype=np.int32)
        self.zvar = np.ascontiguousarray(zvar, dtype=np.int32)
        self.cx = self.xptr.shape[0] - 1
        self.cz = self.zptr.shape[0] - 1
        self.nex = self.xvar.shape[0]
        self.nez = self.zvar.shape[0]
        cdef int j, d
        self.dmax = 1
        for j in range(self.cx):
            d = self.xptr[j + 1] - self.xptr[j]
            if d > self.dmax:
                self.dmax = d
        for j in range(self.cz):
            d = self.zptr[j + 1] - self.zptr[j]
            if d > self.dmax:
                self.dmax = d
        self.lam_x = np.zeros(max(self.nex, 1), dtype=np.float32)
        self.lam_z = np.zeros(max(self.nez, 1), dtype=np.float32)
        self.dx = np.zeros(max(self.nex, 1), dtype=np.float32)
        self.dz = np.zeros(max(self.nez, 1), dtype=np.float32)
        self.tx = np.zeros(max(self.n, 1), dtype=np.float32)
        self.tz = np.zeros(max(self.n, 1), dtype=np.float32)
        self.td = np.zeros(self.dmax, dtype=np.float64)
        self.pre = np.zeros(self.dmax + 1, dtype=np.float64)

    cdef void _cn_sector(self, int nchecks, int[::1] ptr, float[::1] lam,
                         const unsigned char[::1] bits, float[::1] delta,
                         float clamp) noexcept nogil:
        # extrinsic boxplus via prefix/suffix products of tanh(lam/2), carried
        # in double so the tanh domain keeps resolution past the clamp
        cdef int j, k, lo, d
        cdef float sgn
        cdef double sufp, prod
        for j in range(nchecks):
            lo = ptr[j]
            d = ptr[j + 1] - lo
            self.pre[0] = 1.0
            for k in range(d):
                self.td[k] = tanh(0.5 * <double> lam[lo + k])
                self.pre[k + 1] = self.pre[k] * self.td[k]
            sgn = -1.0 if bits[j] else 1.0
            sufp = 1.0
            for k in range(d - 1, -1, -1):
                prod = self.pre[k] * sufp
                if prod > PMAX:
                    prod = PMAX
                elif prod < -PMAX:
                    prod = -PMAX
                delta[lo + k] = sgn * clampf(<float> (2.0 * atanh(prod)), clamp)
                sufp *= self.td[k]

    def run(self, const float[:, ::1] priors, const unsigned char[::1] sx,
            const unsigned char[::1] sz, int iters, float kappa, float clamp,
            bint early_stop, const int[::1] taps, float[:, :, ::1] trace,
            unsigned char[::1] out_ex, unsigned char[::1] out_ez,
            float[:, ::1] out_post):
        cdef int it, e, v, j, k, idx, used = 0, tap_i = 0
        cdef int n = self.n
        cdef float gx, gy, gz, best
        cdef int par
        cdef bint ok = False

        for e in range(self.nex):
            v = self.xvar[e]
            self.lam_x[e] = clampf(msg_xf(priors[v, 0], priors[v, 1], priors[v, 2]), clamp)
        for e in range(self.nez):
            v = self.zvar[e]
            self.lam_z[e] = clampf(msg_zf(priors[v, 0], priors[v, 1], priors[v, 2]), clamp)

        for it in range(1, iters + 1):
            used = it
            self._cn_sector(self.cx, self.xptr, self.lam_x, sz, self.dx, clamp)
            self._cn_sector(self.cz, self.zptr, self.lam_z, sx, self.dz, clamp)

            for v in range(n):
                self.tx[v] = 0.0
                self.tz[v] = 0.0
            for e in range(self.nex):
                self.tx[self.xvar[e]] += self.dx[e]
            for e in range(self.nez):
                self.tz[self.zvar[e]] += self.dz[e]

            for e in range(self.nex):
                v = self.xvar[e]
                gx = priors[v, 0] + kappa * self.tz[v]
                gy = priors[v, 1] + kappa * (self.tz[v] + self.tx[v] - self.dx[e])
                gz = priors[v, 2] + kappa * (self.tx[v] - self.dx[e])
                self.lam_x[e] = clampf(msg_xf(gx, gy, gz), clamp)
            for e in range(self.nez):
                v = self.zvar[e]
                gx = priors[v, 0] + kappa * (self.tz[v] - self.dz[e])
                gy = priors[v, 1] + kappa * (self.tz[v] + self.tx[v] - self.dz[e])
                gz = priors[v, 2] + kappa * self.tx[v]
                self.lam_z[e] = clampf(msg_zf(gx, gy, gz), clamp)

            for v in range(n):
                gx = priors[v, 0] + kappa * self.tz[v]
                gy = priors[v, 1] + kappa * (self.tx[v] + self.tz[v])
                gz = priors[v, 2] + kappa * self.tx[v]
                out_post[v, 0] = gx
                out_post[v, 1] = gy
                out_post[v, 2] = gz
                best = 0.0
                idx = 0
                if gx < best:
                    best = gx
                    idx = 1
                if gy < best:
                    best = gy
                    idx = 2
                if gz < best:
                    best = gz
                    idx = 3
                out_ex[v] = 1 if (idx == 1 or idx == 2) else 0
                out_ez[v] = 1 if idx >= 2 else 0

            if tap_i < taps.shape[0] and taps[tap_i] == it:
                for v in range(n):
                    trace[tap_i, v, 0] = out_post[v, 0]
                    trace[tap_i, v, 1] = out_post[v, 1]
                    trace[tap_i, v, 2] = out_post[v, 2]
                tap_i += 1

            ok = True
            for j in range(self.cx):
                par = 0
                for k in range(self.xptr[j], self.xptr[j + 1]):
                    par ^= out_ez[self.xvar[k]]
                if par != sz[j]:
                    ok = False
                    break
            if ok:
                for j in range(self.cz):
                    par = 0
                    for k in range(self.zptr[j], self.zptr[j + 1]):
                        par ^= out_ex[self.zvar[k]]
                    if par != sx[j]:
                        ok = False
                        break
            if ok and early_stop:
                return True, used
        return ok, used
