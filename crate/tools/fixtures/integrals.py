"""Gaussian integrals over s/p Cartesian shells (McMurchie-Davidson).

Only what the fixture generator needs: overlap, kinetic, nuclear attraction,
electron repulsion and dipole (position) integrals for contracted Cartesian
Gaussians with l <= 1.
"""

import math

import numpy as np

BOHR_PER_ANGSTROM = 1.0 / 0.52917721092

# Exponents / contraction coefficients copied from the Basis Set Exchange
# (Gaussian09 data). "sp" shells share exponents between s and p.
BASIS = {
    "sto-6g": {
        1: [("s", [35.52322122, 6.513143725, 1.822142904, 0.6259552659, 0.2430767471, 0.1001124280],
             [[0.009163596281, 0.04936149294, 0.1685383049, 0.3705627997, 0.4164915298, 0.1303340841]])],
        4: [("s", [312.8704937, 57.36446253, 16.04850940, 5.513096119, 2.140896553, 0.8817394283],
             [[0.009163596281, 0.04936149294, 0.1685383049, 0.3705627997, 0.4164915298, 0.1303340841]]),
            ("sp", [13.63324744, 2.698375464, 0.8386530829, 0.3226600698, 0.1401314882, 0.06423251387],
             [[-0.01325278809, -0.04699171014, -0.03378537151, 0.2502417861, 0.5951172526, 0.2407061763],
              [0.003759696623, 0.03767936984, 0.1738967435, 0.4180364347, 0.4258595477, 0.1017082955]])],
    },
    "sto-3g": {
        1: [("s", [3.425250914, 0.6239137298, 0.1688554040],
             [[0.1543289673, 0.5353281423, 0.4446345422]])],
        8: [("s", [130.7093214, 23.80886605, 6.443608313],
             [[0.1543289673, 0.5353281423, 0.4446345422]]),
            ("sp", [5.033151319, 1.169596125, 0.3803889600],
             [[-0.09996722919, 0.3995128261, 0.7001154689],
              [0.1559162750, 0.6076837186, 0.3919573931]])],
    },
}


def _double_factorial(n):
    return 1 if n <= 0 else n * _double_factorial(n - 2)


def _prim_norm(alpha, lmn):
    l, m, n = lmn
    L = l + m + n
    num = (2.0 * alpha / math.pi) ** 1.5 * (4.0 * alpha) ** L
    den = _double_factorial(2 * l - 1) * _double_factorial(2 * m - 1) * _double_factorial(2 * n - 1)
    return math.sqrt(num / den)


class BasisFunction:
    def __init__(self, atom, center, lmn, exps, coefs):
        self.atom = atom
        self.center = np.asarray(center, dtype=float)
        self.lmn = tuple(lmn)
        self.exps = np.asarray(exps, dtype=float)
        self.coefs = np.array([c * _prim_norm(a, lmn) for a, c in zip(exps, coefs)])


def build_basis(atoms, name):
    """atoms: list of (Z, xyz in bohr). Returns list of BasisFunction."""
    funcs = []
    for ia, (z, xyz) in enumerate(atoms):
        for kind, exps, coefs in BASIS[name][z]:
            funcs.append(BasisFunction(ia, xyz, (0, 0, 0), exps, coefs[0]))
            if kind == "sp":
                for lmn in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
                    funcs.append(BasisFunction(ia, xyz, lmn, exps, coefs[1]))
    # normalize contractions
    packed = _pack(funcs)
    s = overlap(packed)
    for i, f in enumerate(funcs):
        f.coefs = f.coefs / math.sqrt(s[i, i])
    return funcs


def _pack(funcs):
    nprim = max(len(f.exps) for f in funcs)
    n = len(funcs)
    centers = np.zeros((n, 3))
    lmns = np.zeros((n, 3), dtype=np.int64)
    exps = np.zeros((n, nprim))
    coefs = np.zeros((n, nprim))
    counts = np.zeros(n, dtype=np.int64)
    for i, f in enumerate(funcs):
        centers[i] = f.center
        lmns[i] = f.lmn
        k = len(f.exps)
        exps[i, :k] = f.exps
        coefs[i, :k] = f.coefs
        counts[i] = k
    return centers, lmns, exps, coefs, counts


def pack(funcs):
    return _pack(funcs)


def _hermite_e(i, j, t, qx, a, b):
    p = a + b
    q = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == 0 and j == 0 and t == 0:
        return math.exp(-q * qx * qx)
    if j == 0:
        return (1.0 / (2.0 * p)) * _hermite_e(i - 1, j, t - 1, qx, a, b) \
            - (q * qx / a) * _hermite_e(i - 1, j, t, qx, a, b) \
            + (t + 1) * _hermite_e(i - 1, j, t + 1, qx, a, b)
    return (1.0 / (2.0 * p)) * _hermite_e(i, j - 1, t - 1, qx, a, b) \
        + (q * qx / b) * _hermite_e(i, j - 1, t, qx, a, b) \
        + (t + 1) * _hermite_e(i, j - 1, t + 1, qx, a, b)


def _boys(n, t):
    # series for small t, downward-stable closed forms otherwise
    if t < 1e-8:
        return 1.0 / (2.0 * n + 1.0) - t / (2.0 * n + 3.0)
    if t < 30.0:
        # Taylor series in t: F_n(t) = exp(-t) sum_k (2t)^k / ((2n+1)(2n+3)...(2n+2k+1))
        term = 1.0 / (2.0 * n + 1.0)
        total = term
        k = 0
        while True:
            k += 1
            term *= 2.0 * t / (2.0 * n + 2.0 * k + 1.0)
            total += term
            if term < 1e-17 * total:
                break
        return math.exp(-t) * total
    # asymptotic
    df = 1.0
    for kk in range(1, 2 * n, 2):
        df *= kk
    return df / 2.0 ** (n + 1) * math.sqrt(math.pi / t ** (2 * n + 1))


def _hermite_r(t, u, v, n, p, pcx, pcy, pcz, rpc):
    t_arg = p * rpc * rpc
    val = 0.0
    if t == 0 and u == 0 and v == 0:
        val += (-2.0 * p) ** n * _boys(n, t_arg)
    elif t == 0 and u == 0:
        if v > 1:
            val += (v - 1) * _hermite_r(t, u, v - 2, n + 1, p, pcx, pcy, pcz, rpc)
        val += pcz * _hermite_r(t, u, v - 1, n + 1, p, pcx, pcy, pcz, rpc)
    elif t == 0:
        if u > 1:
            val += (u - 1) * _hermite_r(t, u - 2, v, n + 1, p, pcx, pcy, pcz, rpc)
        val += pcy * _hermite_r(t, u - 1, v, n + 1, p, pcx, pcy, pcz, rpc)
    else:
        if t > 1:
            val += (t - 1) * _hermite_r(t - 2, u, v, n + 1, p, pcx, pcy, pcz, rpc)
        val += pcx * _hermite_r(t - 1, u, v, n + 1, p, pcx, pcy, pcz, rpc)
    return val


def _prim_overlap(a, lmn1, A, b, lmn2, B):
    s = 1.0
    for d in range(3):
        s *= _hermite_e(lmn1[d], lmn2[d], 0, A[d] - B[d], a, b)
    return s * (math.pi / (a + b)) ** 1.5


def _prim_kinetic(a, lmn1, A, b, lmn2, B):
    l2, m2, n2 = lmn2[0], lmn2[1], lmn2[2]
    term0 = b * (2 * (l2 + m2 + n2) + 3) * _prim_overlap(a, lmn1, A, b, lmn2, B)
    term1 = 0.0
    term2 = 0.0
    for d in range(3):
        up = lmn2.copy()
        up[d] += 2
        term1 += _prim_overlap(a, lmn1, A, b, up, B)
        if lmn2[d] >= 2:
            dn = lmn2.copy()
            dn[d] -= 2
            term2 += lmn2[d] * (lmn2[d] - 1) * _prim_overlap(a, lmn1, A, b, dn, B)
    return term0 - 2.0 * b * b * term1 - 0.5 * term2


def _prim_nuclear(a, lmn1, A, b, lmn2, B, C):
    p = a + b
    P = (a * A + b * B) / p
    pc = P - C
    rpc = math.sqrt(pc[0] ** 2 + pc[1] ** 2 + pc[2] ** 2)
    val = 0.0
    for t in range(lmn1[0] + lmn2[0] + 1):
        et = _hermite_e(lmn1[0], lmn2[0], t, A[0] - B[0], a, b)
        for u in range(lmn1[1] + lmn2[1] + 1):
            eu = _hermite_e(lmn1[1], lmn2[1], u, A[1] - B[1], a, b)
            for v in range(lmn1[2] + lmn2[2] + 1):
                ev = _hermite_e(lmn1[2], lmn2[2], v, A[2] - B[2], a, b)
                val += et * eu * ev * _hermite_r(t, u, v, 0, p, pc[0], pc[1], pc[2], rpc)
    return 2.0 * math.pi / p * val


def _prim_dipole(a, lmn1, A, b, lmn2, B, d):
    # <a| r_d |b> about the coordinate origin
    p = a + b
    P = (a * A + b * B) / p
    val = 1.0
    for k in range(3):
        e0 = _hermite_e(lmn1[k], lmn2[k], 0, A[k] - B[k], a, b)
        if k == d:
            e1 = _hermite_e(lmn1[k], lmn2[k], 1, A[k] - B[k], a, b)
            val *= e1 + P[k] * e0
        else:
            val *= e0
    return val * (math.pi / p) ** 1.5


def _prim_eri(a, lmn1, A, b, lmn2, B, c, lmn3, C, d, lmn4, D):
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    P = (a * A + b * B) / p
    Q = (c * C + d * D) / q
    pq = P - Q
    rpq = math.sqrt(pq[0] ** 2 + pq[1] ** 2 + pq[2] ** 2)
    val = 0.0
    for t in range(lmn1[0] + lmn2[0] + 1):
        e1 = _hermite_e(lmn1[0], lmn2[0], t, A[0] - B[0], a, b)
        for u in range(lmn1[1] + lmn2[1] + 1):
            e2 = _hermite_e(lmn1[1], lmn2[1], u, A[1] - B[1], a, b)
            for v in range(lmn1[2] + lmn2[2] + 1):
                e3 = _hermite_e(lmn1[2], lmn2[2], v, A[2] - B[2], a, b)
                for tau in range(lmn3[0] + lmn4[0] + 1):
                    e4 = _hermite_e(lmn3[0], lmn4[0], tau, C[0] - D[0], c, d)
                    for nu in range(lmn3[1] + lmn4[1] + 1):
                        e5 = _hermite_e(lmn3[1], lmn4[1], nu, C[1] - D[1], c, d)
                        for phi in range(lmn3[2] + lmn4[2] + 1):
                            e6 = _hermite_e(lmn3[2], lmn4[2], phi, C[2] - D[2], c, d)
                            sign = -1.0 if (tau + nu + phi) % 2 else 1.0
                            val += e1 * e2 * e3 * e4 * e5 * e6 * sign * _hermite_r(
                                t + tau, u + nu, v + phi, 0, alpha, pq[0], pq[1], pq[2], rpq)
    return 2.0 * math.pi ** 2.5 / (p * q * math.sqrt(p + q)) * val


def _one_body(kind, centers, lmns, exps, coefs, counts, charges, atom_xyz, axis):
    n = centers.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            s = 0.0
            for pi in range(counts[i]):
                for pj in range(counts[j]):
                    a = exps[i, pi]
                    b = exps[j, pj]
                    cc = coefs[i, pi] * coefs[j, pj]
                    if kind == 0:
                        s += cc * _prim_overlap(a, lmns[i], centers[i], b, lmns[j], centers[j])
                    elif kind == 1:
                        s += cc * _prim_kinetic(a, lmns[i], centers[i], b, lmns[j], centers[j])
                    elif kind == 2:
                        for k in range(charges.shape[0]):
                            s -= charges[k] * cc * _prim_nuclear(
                                a, lmns[i], centers[i], b, lmns[j], centers[j], atom_xyz[k])
                    else:
                        s += cc * _prim_dipole(a, lmns[i], centers[i], b, lmns[j], centers[j], axis)
            out[i, j] = s
            out[j, i] = s
    return out


def _eri(centers, lmns, exps, coefs, counts):
    n = centers.shape[0]
    out = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    kl = k * (k + 1) // 2 + l
                    if kl > ij:
                        continue
                    s = 0.0
                    for pi in range(counts[i]):
                        for pj in range(counts[j]):
                            for pk in range(counts[k]):
                                for pl in range(counts[l]):
                                    s += coefs[i, pi] * coefs[j, pj] * coefs[k, pk] * coefs[l, pl] * _prim_eri(
                                        exps[i, pi], lmns[i], centers[i],
                                        exps[j, pj], lmns[j], centers[j],
                                        exps[k, pk], lmns[k], centers[k],
                                        exps[l, pl], lmns[l], centers[l])
                    out[i, j, k, l] = s
                    out[j, i, k, l] = s
                    out[i, j, l, k] = s
                    out[j, i, l, k] = s
                    out[k, l, i, j] = s
                    out[l, k, i, j] = s
                    out[k, l, j, i] = s
                    out[l, k, j, i] = s
    return out


def overlap(packed):
    dummy = np.zeros((0, 3))
    return _one_body(0, *packed, np.zeros(0), dummy, 0)


def kinetic(packed):
    return _one_body(1, *packed, np.zeros(0), np.zeros((0, 3)), 0)


def nuclear(packed, atoms):
    charges = np.array([float(z) for z, _ in atoms])
    xyz = np.array([x for _, x in atoms], dtype=float)
    return _one_body(2, *packed, charges, xyz, 0)


def dipole(packed, axis):
    return _one_body(3, *packed, np.zeros(0), np.zeros((0, 3)), axis)


def eri(packed):
    return _eri(*packed)


def nuclear_repulsion(atoms):
    e = 0.0
    for i in range(len(atoms)):
        for j in range(i):
            zi, ri = atoms[i]
            zj, rj = atoms[j]
            e += zi * zj / np.linalg.norm(np.asarray(ri) - np.asarray(rj))
    return e
