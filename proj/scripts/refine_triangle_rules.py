"""Refine published symmetric triangle rules to 25 digits with Gauss-Newton.

Orbits are parameterised in barycentric coordinates:
  S3:   (1/3, 1/3, 1/3)
  S21:  (a, a, 1-2a)               -> 3 points
  S111: (a, b, 1-a-b)              -> 6 points
Weights are normalised so that they sum to 1 (multiply by 1/2 for the
reference triangle). Output is C++ initialiser text.
"""
import itertools
import mpmath as mp

mp.mp.dps = 40

RULES = {
    # degree: (centroid weight or None, [(a, w)], [(a, b, w)])
    1: (1.0, [], []),
    2: (None, [(1.0 / 6.0, 1.0 / 3.0)], []),
    5: (0.225, [(0.101286507323456, 0.125939180544827),
                (0.470142064105115, 0.132394152788506)], []),
    6: (None, [(0.249286745170910, 0.116786275726379),
               (0.063089014491502, 0.050844906370207)],
        [(0.053145049844817, 0.310352451033784, 0.082851075618374)]),
    8: (0.144315607677787, [(0.459292588292723, 0.095091634267285),
                            (0.170569307751760, 0.103217370534718),
                            (0.050547228317031, 0.032458497623198)],
        [(0.008394777409958, 0.263112829634638, 0.027230314174435)]),
    10: (0.090817990382754, [(0.485577633383657, 0.036725957756467),
                             (0.109481575485037, 0.045321059435528)],
         [(0.141707219414880, 0.307939838764121, 0.072757916845420),
          (0.025003534762686, 0.246672560639903, 0.028327242531057),
          (0.009540815400299, 0.066803251012200, 0.009421666963733)]),
}


def expand(c, s21, s111):
    pts = []
    if c is not None:
        pts.append(((mp.mpf(1) / 3, mp.mpf(1) / 3), c))
    for a, w in s21:
        b = 1 - 2 * a
        for p in {(a, a), (a, b), (b, a)} if False else [(a, a), (a, b), (b, a)]:
            pts.append((p, w))
    for a, b, w in s111:
        cc = 1 - a - b
        for p in itertools.permutations((a, b, cc)):
            pts.append(((p[0], p[1]), w))
    return pts


def exact(i, j):
    # integral of x^i y^j over the reference triangle, divided by its area
    return 2 * mp.factorial(i) * mp.factorial(j) / mp.factorial(i + j + 2)


def residual(params, layout, deg):
    c, s21, s111 = unpack(params, layout)
    pts = expand(c, s21, s111)
    r = []
    for i in range(deg + 1):
        for j in range(deg + 1 - i):
            s = sum(w * x ** i * y ** j for (x, y), w in pts)
            r.append(s - exact(i, j))
    return r


def pack(c, s21, s111):
    v = []
    if c is not None:
        v.append(c)
    for a, w in s21:
        v += [a, w]
    for a, b, w in s111:
        v += [a, b, w]
    return [mp.mpf(x) for x in v]


def unpack(v, layout):
    hc, n21, n111 = layout
    k = 0
    c = None
    if hc:
        c = v[0]
        k = 1
    s21 = []
    for _ in range(n21):
        s21.append((v[k], v[k + 1]))
        k += 2
    s111 = []
    for _ in range(n111):
        s111.append((v[k], v[k + 1], v[k + 2]))
        k += 3
    return c, s21, s111


def refine(deg, rule):
    c, s21, s111 = rule
    layout = (c is not None, len(s21), len(s111))
    v = mp.matrix(pack(c, s21, s111))
    for _ in range(30):
        r = mp.matrix(residual(list(v), layout, deg))
        n = len(v)
        J = mp.matrix(len(r), n)
        eps = mp.mpf(10) ** -25
        for k in range(n):
            vp = v.copy()
            vp[k] += eps
            rp = mp.matrix(residual(list(vp), layout, deg))
            for i in range(len(r)):
                J[i, k] = (rp[i] - r[i]) / eps
        dv = mp.lu_solve(J.T * J, J.T * r)
        v -= dv
        if mp.norm(dv) < mp.mpf(10) ** -32:
            break
    res = mp.norm(mp.matrix(residual(list(v), layout, deg)))
    return unpack(list(v), layout), res


if __name__ == "__main__":
    for deg, rule in RULES.items():
        (c, s21, s111), res = refine(deg, rule)
        print(f"// degree {deg}, residual {mp.nstr(res, 3)}")
        if c is not None:
            print(f"  centroid w={mp.nstr(c, 25)}")
        for a, w in s21:
            print(f"  s21 a={mp.nstr(a, 25)} w={mp.nstr(w, 25)}")
        for a, b, w in s111:
            print(f"  s111 a={mp.nstr(a, 25)} b={mp.nstr(b, 25)} w={mp.nstr(w, 25)}")
