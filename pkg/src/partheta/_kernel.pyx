# cython: language_level=3, boundscheck=False, wraparound=False
"""GMP-backed fixed-point kernel; mirrors ``partheta._kernel_py``."""

from gmpy2 cimport import_gmpy2, mpz, GMPy_MPZ_New, MPZ, mpz_t

cdef extern from "gmp.h":
    void mpz_init(mpz_t)
    void mpz_clear(mpz_t)
    void mpz_set(mpz_t, mpz_t)
    void mpz_set_ui(mpz_t, unsigned long)
    void mpz_add(mpz_t, mpz_t, mpz_t)
    void mpz_mul(mpz_t, mpz_t, mpz_t)
    void mpz_mul_ui(mpz_t, mpz_t, unsigned long)
    void mpz_mul_2exp(mpz_t, mpz_t, unsigned long)
    void mpz_fdiv_q_2exp(mpz_t, mpz_t, unsigned long)
    void mpz_abs(mpz_t, mpz_t)
    int mpz_cmpabs(mpz_t, mpz_t)
    int mpz_cmp(mpz_t, mpz_t)
    int mpz_sgn(mpz_t)

import_gmpy2()


cdef inline mpz _out(mpz_t z):
    cdef mpz res = GMPy_MPZ_New(NULL)
    mpz_set(MPZ(res), z)
    return res


def theta_moments(q, x, long prec, tol, long max_terms):
    """Moment sums of ``q**(n*(n+1)/2) * x**n`` in fixed point.

    Same contract as :func:`partheta._kernel_py.theta_moments`.
    """
    cdef mpz qz = mpz(q)
    cdef mpz xz = mpz(x)
    cdef mpz tolz = mpz(tol)
    cdef mpz_t s0, s1, s2, s3, t, r, w, quarter, chk
    cdef unsigned long n = 0
    mpz_init(s0); mpz_init(s1); mpz_init(s2); mpz_init(s3)
    mpz_init(t); mpz_init(r); mpz_init(w); mpz_init(quarter); mpz_init(chk)
    try:
        mpz_set_ui(t, 1)
        mpz_mul_2exp(t, t, prec)
        mpz_set_ui(quarter, 1)
        mpz_mul_2exp(quarter, quarter, prec - 2)
        mpz_set(r, MPZ(xz))
        while True:
            mpz_add(s0, s0, t)
            if n:
                mpz_mul_ui(w, t, n)
                mpz_add(s1, s1, w)
                mpz_mul_ui(w, w, n)
                mpz_add(s2, s2, w)
                mpz_mul_ui(w, w, n)
                mpz_add(s3, s3, w)
            mpz_mul(r, r, MPZ(qz))
            mpz_fdiv_q_2exp(r, r, prec)
            mpz_mul(t, t, r)
            mpz_fdiv_q_2exp(t, t, prec)
            n += 1
            if n >= 4 and mpz_cmpabs(r, quarter) <= 0:
                if mpz_sgn(t) == 0:
                    break
                mpz_abs(chk, t)
                mpz_mul_ui(chk, chk, 2 * n)
                mpz_mul_ui(chk, chk, n)
                mpz_mul_ui(chk, chk, n)
                if mpz_cmp(chk, MPZ(tolz)) < 0:
                    break
            if n > <unsigned long>max_terms:
                raise OverflowError(n)
        mpz_abs(t, t)
        return _out(s0), _out(s1), _out(s2), _out(s3), n, _out(t)
    finally:
        mpz_clear(s0); mpz_clear(s1); mpz_clear(s2); mpz_clear(s3)
        mpz_clear(t); mpz_clear(r); mpz_clear(w); mpz_clear(quarter); mpz_clear(chk)
