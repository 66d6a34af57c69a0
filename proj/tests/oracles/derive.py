"""Independent mpmath evaluation of the frozen constants used by the unit tests."""
from mpmath import mp, mpf, sqrt, log, exp, diff, findroot, lambertw, gamma

mp.dps = 40


def heston_L(z, vb=mpf("0.04"), lam=mpf(1), eta=mpf("0.1"), rho=mpf("-0.7")):
    beta = lam - rho * eta * z
    return lam * vb / eta**2 * (beta - sqrt(beta**2 - eta**2 * (z * z - z)))


def vg_L(z, s=mpf("0.12"), th=mpf("-0.14"), nu=mpf("0.17")):
    c = log(1 - th * nu - s * s * nu / 2)
    return (z * c - log(1 - th * nu * z - s * s * nu * z * z / 2)) / nu


def bg_L(z, ap=mpf(10), am=mpf("0.6"), lp=mpf(35), lm=mpf(5)):
    c = -ap * log(1 - 1 / lp) - am * log(1 + 1 / lm)
    return -ap * log(1 - z / lp) - am * log(1 + z / lm) - z * c


def merton_L(z, s=mpf("0.1"), lam=mpf("0.1"), a=mpf("-0.4"), d=mpf("0.4")):
    c = exp(a + d * d / 2) - 1
    return s * s / 2 * (z * z - z) + lam * (exp(a * z + d * d * z * z / 2) - 1 - z * c)


def saddle(L, x, lo, hi):
    f = lambda u: diff(L, u) - x
    for _ in range(200):
        mid = (lo + hi) / 2
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


print("heston psi(0)      ", -heston_L(mpf("0.5")))
print("vg x_minus, x_plus ", diff(vg_L, 0), diff(vg_L, 1))
print("bg x_minus, x_plus ", diff(bg_L, 0), diff(bg_L, 1))
print("bg -K              ", -(10 * log(mpf(35) / 34) + mpf("0.6") * log(mpf(5) / 6)))
nu, th, s = mpf("0.17"), mpf("-0.14"), mpf("0.12")
xi = (th + s * s / 2) * nu
print("vg x0              ", log(1 - xi) / nu)
ub = saddle(merton_L, 10, mpf(0), mpf(20))
print("merton uhat(10)    ", ub - mpf("0.5"))
a, d, lam = mpf("-0.4"), mpf("0.4"), mpf("0.1")
W = lambertw(exp((a / d) ** 2) * (10 / (lam * d)) ** 2).real
print("merton asymptote   ", (d * sqrt(W) - a) / d**2 - mpf("0.5"))
u0 = saddle(bg_L, 0, mpf(-4), mpf(30))
print("bg ubar0           ", u0)
print("bg m2 at ubar0     ", 10 / (35 - u0) ** 2 + mpf("0.6") / (5 + u0) ** 2)
print("bg m3 at ubar0     ", 2 * 10 / (35 - u0) ** 3 - 2 * mpf("0.6") / (5 + u0) ** 3)
uv = saddle(vg_L, 0, mpf(-5), mpf(5))
print("vg m3 at ubar0     ", diff(vg_L, uv, 3))
uh = saddle(bg_L, 0, mpf(-4), mpf(30)) - mpf("0.5")
lbp, lbm = mpf("34.5"), mpf("5.5")
print("bg psi2 at x=0     ", 10 / lbp**2 / (1 - uh / lbp) ** 2 + mpf("0.6") / lbm**2 / (1 + uh / lbm) ** 2)
print("bg beta_minus      ", (44 - sqrt(1920)) / 2)
for y in ("0.25", "0.5", "0.75"):
    print("gamma(-%s)        " % y, gamma(-mpf(y)))
al = s * s * nu / 2
be = 1 - th * nu / 2 - s * s * nu / 8
eta2 = nu**2 * ((xi / (2 * al)) ** 2 + be / al)
x0 = log(1 - xi) / nu
q = x0 * nu / log(al * eta2 / nu**2)
print("vg K               ", (1 - (1 - al / xi) * q / 2) / sqrt(1 - q))
lam, eta, rho, vb = mpf(1), mpf("0.1"), mpf("-0.7"), mpf("0.04")
A2 = eta**2 * (1 - rho**2)
B = rho * eta * (lam - rho * eta / 2)
C2 = (lam - rho * eta / 2) ** 2 + eta**2 / 4
D = sqrt(1 / A2 + C2 / B**2)
xih = eta**2 / (lam * vb)
a = rho * eta / lam
print("heston omega(m)    ", -lam / xih * (1 - a / 2) - B * D / xih)
