"""Pure-Python fixed-point kernel for the partial theta series.

Reference implementation of :func:`theta_moments`; the compiled module
``partheta._kernel`` must return bit-identical results.
"""

from mpmath.libmp import MPZ

__all__ = ["theta_moments"]


def theta_moments(q, x, prec, tol, max_terms):
    """Moment sums of ``t_n = q**(n*(n+1)/2) * x**n`` in fixed point.

    ``q``, ``x`` and ``tol`` are integers scaled by ``2**prec``. Returns
    ``(S0, S1, S2, S3, n, t_n)`` with ``Sk = sum(m**k * t_m, m < n)`` and
    ``t_n`` the magnitude of the first omitted term. Summation stops at the
    first ``n >= 4`` with ``|x q**n| <= 1/4`` and ``2 n**3 |t_n| < tol``;
    from there on every moment series decays at ratio below 1/2.
    """
    q = MPZ(q)
    x = MPZ(x)
    quarter = MPZ(1) << (prec - 2)
    s0 = s1 = s2 = s3 = MPZ(0)
    t = MPZ(1) << prec
    r = x
    n = 0
    while True:
        s0 += t
        if n:
            w = t * n
            s1 += w
            w *= n
            s2 += w
            s3 += w * n
        r = (r * q) >> prec
        t = (t * r) >> prec
        n += 1
        if n >= 4 and abs(r) <= quarter:
            if not t or 2 * n * n * n * abs(t) < tol:
                return s0, s1, s2, s3, n, abs(t)
        if n > max_terms:
            raise OverflowError(n)
