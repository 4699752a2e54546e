"""Symmetry-blocked RHF and a small CASSCF(2,2) for the fixture generator.

Irreducible representations of the abelian groups used here (D2h and its
subgroups, with the molecule placed on the symmetry elements) are encoded as
parity bits: bit 0 set when odd under x -> -x, bit 1 for y, bit 2 for z.
The label composes by XOR and equals the Molpro ORBSYM number minus one.
"""

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize

import integrals as I


class Molecule:
    def __init__(self, atoms, basis, n_electrons, axes):
        """atoms in bohr; axes: reflections (0=x,1=y,2=z) that are symmetries."""
        self.atoms = atoms
        self.funcs = I.build_basis(atoms, basis)
        packed = I.pack(self.funcs)
        self.S = I.overlap(packed)
        self.T = I.kinetic(packed)
        self.V = I.nuclear(packed, atoms)
        self.Hcore = self.T + self.V
        self.eri = I.eri(packed)
        self.dip = [I.dipole(packed, k) for k in range(3)]
        self.enuc = I.nuclear_repulsion(atoms)
        self.nel = n_electrons
        self.axes = axes
        self.reflections = [self._reflection(ax) for ax in axes]

    def _reflection(self, axis):
        """AO representation of the reflection axis -> -axis."""
        n = len(self.funcs)
        R = np.zeros((n, n))
        xyz = np.array([x for _, x in self.atoms], dtype=float)
        for i, f in enumerate(self.funcs):
            target = f.center.copy()
            target[axis] = -target[axis]
            ja = int(np.argmin(np.linalg.norm(xyz - target, axis=1)))
            assert np.linalg.norm(xyz[ja] - target) < 1e-8, "geometry not symmetric"
            match = [j for j, g in enumerate(self.funcs)
                     if g.atom == ja and g.lmn == f.lmn and np.allclose(g.exps, f.exps)]
            assert len(match) == 1
            R[match[0], i] = -1.0 if f.lmn[axis] % 2 else 1.0
        return R

    def irrep_blocks(self):
        """Orthonormal (Euclidean) bases of the AO coefficient subspaces per irrep."""
        n = len(self.funcs)
        blocks = {}
        for label in range(1 << 3):
            if any((label >> ax) & 1 and ax not in self.axes for ax in range(3)):
                continue
            P = np.eye(n)
            for ax, R in zip(self.axes, self.reflections):
                chi = -1.0 if (label >> ax) & 1 else 1.0
                P = P @ (np.eye(n) + chi * R) / 2.0
            u, s, _ = np.linalg.svd(P)
            basis = u[:, s > 0.5]
            if basis.shape[1]:
                blocks[label] = basis
        assert sum(b.shape[1] for b in blocks.values()) == n
        return blocks

    def jk(self, D):
        J = np.einsum("pqrs,rs->pq", self.eri, D)
        K = np.einsum("prqs,rs->pq", self.eri, D)
        return J, K

    def mo_parity(self, c):
        """Irrep label of an MO coefficient vector (must be symmetry pure)."""
        label = 0
        for ax, R in zip(self.axes, self.reflections):
            ov = c @ self.S @ (R @ c)
            assert abs(abs(ov) - 1.0) < 1e-6, f"MO not symmetry pure ({ov})"
            if ov < 0:
                label |= 1 << ax
        return label


def symmetric_eigh(mol, F, blocks):
    """Solve FC = SCe blockwise; returns energies, coefficients, labels sorted by energy."""
    es, cs, labels = [], [], []
    for label, B in blocks.items():
        e, v = sla.eigh(B.T @ F @ B, B.T @ mol.S @ B)
        for k in range(len(e)):
            es.append(e[k])
            cs.append(B @ v[:, k])
            labels.append(label)
    order = np.argsort(es, kind="stable")
    return np.array(es)[order], np.array(cs).T[:, order], [labels[k] for k in order]


def rhf(mol, occupied=None, max_iter=200, tol=1e-12):
    """Restricted Hartree-Fock with DIIS.

    occupied: optional dict label -> number of doubly occupied orbitals in that
    irrep; by default aufbau ordering.
    """
    blocks = mol.irrep_blocks()
    nocc = mol.nel // 2
    e, C, labels = symmetric_eigh(mol, mol.Hcore, blocks)
    diis_f, diis_e = [], []
    energy = 0.0
    for it in range(max_iter):
        occ_idx = _select_occupied(labels, nocc, occupied)
        Cocc = C[:, occ_idx]
        D = Cocc @ Cocc.T
        J, K = mol.jk(D)
        F = mol.Hcore + 2 * J - K
        new_energy = np.sum(D * (mol.Hcore + F)) + mol.enuc
        err = F @ D @ mol.S - mol.S @ D @ F
        if abs(new_energy - energy) < tol and np.max(np.abs(err)) < 1e-9:
            energy = new_energy
            e, C, labels = symmetric_eigh(mol, F, blocks)
            break
        diis_f.append(F)
        diis_e.append(err)
        if len(diis_f) > 8:
            diis_f.pop(0)
            diis_e.pop(0)
        if len(diis_f) >= 2:
            m = len(diis_f)
            Bm = -np.ones((m + 1, m + 1))
            Bm[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    Bm[i, j] = np.sum(diis_e[i] * diis_e[j])
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            coef = np.linalg.lstsq(Bm, rhs, rcond=None)[0][:m]
            F = sum(c * f for c, f in zip(coef, diis_f))
        e, C, labels = symmetric_eigh(mol, F, blocks)
        energy = new_energy
    else:
        raise RuntimeError("RHF did not converge")
    return energy, e, C, labels


def _select_occupied(labels, nocc, occupied):
    if occupied is None:
        return list(range(nocc))
    idx = []
    for label, count in occupied.items():
        idx += [k for k, l in enumerate(labels) if l == label][:count]
    assert len(idx) == nocc
    return sorted(idx)


def mo_integrals(mol, C):
    h = C.T @ mol.Hcore @ C
    g = np.einsum("pqrs,pi,qj,rk,sl->ijkl", mol.eri, C, C, C, C, optimize=True)
    dip = [C.T @ d @ C for d in mol.dip]
    return h, g, dip


def casscf_22(mol, C, labels, inactive, active, max_iter=400):
    """State-specific CASSCF with two electrons in two active orbitals.

    inactive/active are column indices into C. Orbital rotations are restricted
    to pairs inside one irrep. The CI space is the two closed-shell
    configurations of the active pair, which is the totally symmetric singlet
    space when the two active orbitals belong to different irreps.
    """
    n = C.shape[1]
    virtual = [k for k in range(n) if k not in inactive and k not in active]
    classes = {}
    for k in inactive:
        classes[k] = 0
    for k in active:
        classes[k] = 1
    for k in virtual:
        classes[k] = 2
    pairs = [(p, q) for p in range(n) for q in range(p)
             if labels[p] == labels[q] and classes[p] != classes[q]]

    def rotated(x):
        kappa = np.zeros((n, n))
        for v, (p, q) in zip(x, pairs):
            kappa[p, q] = v
            kappa[q, p] = -v
        return C @ sla.expm(kappa)

    def energy(x):
        Cr = rotated(x)
        return _cas_energy(mol, Cr, inactive, active)[0]

    x0 = np.zeros(len(pairs))
    res = minimize(energy, x0, method="BFGS", options={"gtol": 1e-9, "maxiter": max_iter})
    Cr = rotated(res.x)
    e, civec = _cas_energy(mol, Cr, inactive, active)
    return e, Cr, civec


def _cas_energy(mol, C, inactive, active):
    Cc = C[:, inactive]
    Dc = Cc @ Cc.T
    J, K = mol.jk(Dc)
    Fc = mol.Hcore + 2 * J - K
    ecore = np.sum(Dc * (mol.Hcore + Fc)) + mol.enuc
    Ca = C[:, active]
    h = Ca.T @ Fc @ Ca
    g = np.einsum("pqrs,pi,qj,rk,sl->ijkl", mol.eri, Ca, Ca, Ca, Ca, optimize=True)
    # determinants |a a-bar> and |b b-bar>
    H = np.array([[2 * h[0, 0] + g[0, 0, 0, 0], g[0, 1, 0, 1]],
                  [g[0, 1, 0, 1], 2 * h[1, 1] + g[1, 1, 1, 1]]])
    w, v = np.linalg.eigh(H)
    return ecore + w[0], v[:, 0]
