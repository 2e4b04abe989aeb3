"""Reference values of J1 and Y1 on a 1000-point log grid over [1e-3, 1e3].

Evaluated with mpmath at 40 significant digits; x is the exact binary64
value written in the first column.
"""
import mpmath as mp

mp.mp.dps = 40
with open("bessel_j1_y1.csv", "w") as out:
    out.write("x,j1,y1\n")
    for i in range(1000):
        x = 10.0 ** (-3.0 + 6.0 * i / 999.0)
        xm = mp.mpf(x)
        j1 = mp.besselj(1, xm)
        y1 = mp.bessely(1, xm)
        out.write("%r,%s,%s\n" % (x, mp.nstr(j1, 25), mp.nstr(y1, 25)))
