"""Independent reference implementations used by the test-suite.

They are written from the defining formulas, deliberately without reusing
package helpers.
"""
import math
from decimal import Decimal, getcontext

getcontext().prec = 50


def fspl(d_km, f_mhz):
    return 32.44 + 20 * math.log10(d_km) + 20 * math.log10(f_mhz)


def dbm_w(p):
    return 10 ** ((p - 30) / 10) if p != -math.inf else 0.0


def capacity_hp(b_hz, i_dbm, n0_dbm, ni_dbm):
    """Shannon capacity in 50-digit decimal arithmetic."""
    D = Decimal
    ten = D(10)
    lin = lambda p: D(0) if p == -math.inf else ten ** ((D(repr(p)) - 30) / 10)
    sinr = lin(i_dbm) / (lin(n0_dbm) + lin(ni_dbm))
    return float(D(repr(b_hz)) * (1 + sinr).ln() / D(2).ln())


def spread_cost(t):
    return (0.5 * t if t <= 10 else 5 + (t - 10) if t <= 20 else 15 + 1.2 * (t - 20) if t <= 40
            else 39 + 1.5 * (t - 40))


def ally_r(snr, m, h, t, a):
    return snr - m - spread_cost(t) - h * (a > 0.5)


def opp_r(po, pa, dsnr, e, alpha, radius=30.0):
    return e * ((radius - math.dist(po, pa)) > 0) + alpha * dsnr


def raster_overlap(support, lo, hi, step_khz=1.0):
    """Fraction of 1 kHz bins (centers) in [lo, hi] covered by the support intervals."""
    import numpy as np

    n = max(1, int(round((hi - lo) * 1000 / step_khz)))
    f = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    hit = np.zeros(n, dtype=bool)
    for a, b in support:
        hit |= (f >= a) & (f <= b)
    return float(hit.mean())
