"""Generate the FCIDUMP and dipole-integral fixtures under fixtures/.

Usage: python3 tools/fixtures/generate.py [output_dir]

Systems (STO-6G, all electrons correlated, no frozen core):
  h2          H2 at 1.0 angstrom, D2h
  h4_rect     two 1.0 angstrom H2 units separated by r (angstrom), D2h
  h4_linear   equally spaced H4 chain with spacing r (angstrom), D2h
  beh2        Be insertion into H2, Be at the origin, H at (0, +-y, z) with
              z = (127 - 50 y) / 23 bohr, C2v, state-specific CASSCF(2,2)
              orbitals with active 1b2 and 3a1

Orbital irreps are parity bits (x, y, z) and are written to ORBSYM as
label + 1, i.e. Molpro numbering. Dipole integrals are about the centre of
mass. Every geometry also gets an RHF energy and, for the 8-spin-orbital
systems, an independent dense Jordan-Wigner FCI ground energy recorded in the
manifest.
"""

import itertools
import os
import sys

import numpy as np

import integrals as I
import scf

BOHR = I.BOHR_PER_ANGSTROM
MASS = {1: 1.00782503207, 4: 9.0121822}


def centre(atoms):
    m = np.array([MASS[z] for z, _ in atoms])
    xyz = np.array([x for _, x in atoms], dtype=float)
    com = (m[:, None] * xyz).sum(0) / m.sum()
    return [(z, list(np.asarray(x) - com)) for z, x in atoms]


def fix_signs(C):
    C = C.copy()
    for k in range(C.shape[1]):
        j = np.argmax(np.abs(C[:, k]) + 1e-9 * np.arange(C.shape[0])[::-1])
        if C[j, k] < 0:
            C[:, k] *= -1
    return C


def pick(labels, energies, wanted):
    """wanted: list of (label, nth) -> column indices ordered as requested."""
    cols = []
    for label, nth in wanted:
        same = [k for k in np.argsort(energies, kind="stable") if labels[k] == label]
        cols.append(same[nth])
    return cols


def write_fcidump(path, h, g, ecore, nel, orbsym, ms2=0):
    n = h.shape[0]
    with open(path, "w") as f:
        f.write(f" &FCI NORB={n:3d},NELEC={nel:3d},MS2={ms2:2d},\n")
        f.write("  ORBSYM=" + ",".join(str(s + 1) for s in orbsym) + ",\n")
        f.write("  ISYM=1,\n &END\n")
        for i in range(n):
            for j in range(i + 1):
                ij = i * (i + 1) // 2 + j
                for k in range(n):
                    for l in range(k + 1):
                        if k * (k + 1) // 2 + l > ij:
                            continue
                        v = g[i, j, k, l]
                        if abs(v) > 1e-14:
                            f.write(f"{v: .16e} {i + 1:3d} {j + 1:3d} {k + 1:3d} {l + 1:3d}\n")
        for i in range(n):
            for j in range(i + 1):
                if abs(h[i, j]) > 1e-14:
                    f.write(f"{h[i, j]: .16e} {i + 1:3d} {j + 1:3d}   0   0\n")
        f.write(f"{ecore: .16e}   0   0   0   0\n")


def write_property(path, mu, nuclear, nel, orbsym):
    n = mu.shape[0]
    with open(path, "w") as f:
        f.write(f" &FCI NORB={n:3d},NELEC={nel:3d},MS2= 0,\n")
        f.write("  ORBSYM=" + ",".join(str(s + 1) for s in orbsym) + ",\n")
        f.write(" &END\n")
        for i in range(n):
            for j in range(i + 1):
                if abs(mu[i, j]) > 1e-14:
                    f.write(f"{mu[i, j]: .16e} {i + 1:3d} {j + 1:3d}   0   0\n")
        if abs(nuclear) > 1e-14:
            f.write(f"{nuclear: .16e}   0   0   0   0\n")


def dense_fci_ground(h, g, ecore, n_alpha, n_beta):
    """Independent check: Jordan-Wigner matrices over 2n spin orbitals
    (ordering 0a, 0b, 1a, 1b, ...) and a dense eigensolve in the sector."""
    n = h.shape[0]
    m = 2 * n
    dim = 1 << m
    z = np.diag([1.0, -1.0])
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1| annihilates occupied
    eye = np.eye(2)
    ann = []
    for p in range(m):
        op = np.array([[1.0]])
        for q in range(m):
            factor = z if q < p else (lower if q == p else eye)
            op = np.kron(op, factor)
        ann.append(op)
    cre = [a.T for a in ann]
    H = ecore * np.eye(dim)
    for p in range(m):
        for q in range(m):
            if p % 2 == q % 2 and abs(h[p // 2, q // 2]) > 0:
                H += h[p // 2, q // 2] * cre[p] @ ann[q]
    for p, q, r, s in itertools.product(range(m), repeat=4):
        if p % 2 != q % 2 or r % 2 != s % 2:
            continue
        v = g[p // 2, q // 2, r // 2, s // 2]
        if abs(v) < 1e-15:
            continue
        # 1/2 (pq|rs) a+_p a+_r a_s a_q
        H += 0.5 * v * cre[p] @ cre[r] @ ann[s] @ ann[q]
    # basis state index bit for spin orbital p is bit (m-1-p) in kron order
    keep = []
    for idx in range(dim):
        occ = [(idx >> (m - 1 - p)) & 1 for p in range(m)]
        if sum(occ[0::2]) == n_alpha and sum(occ[1::2]) == n_beta:
            keep.append(idx)
    sub = H[np.ix_(keep, keep)]
    return float(np.linalg.eigvalsh(sub)[0])


def emit(outdir, system, gid, coord, atoms, h, g, ecore, nel, orbsym, dip_mo, nuclear_dip,
         manifest, extra):
    base = f"{system}_{gid}"
    write_fcidump(os.path.join(outdir, base + ".fcidump"), h, g, ecore, nel, orbsym)
    for k, axis in enumerate("xyz"):
        write_property(os.path.join(outdir, f"{base}.dipole_{axis}"), dip_mo[k], nuclear_dip[k],
                       nel, orbsym)
    entry = {"id": gid, "coordinate": coord, "fcidump": base + ".fcidump",
             "dipole": [f"{base}.dipole_{a}" for a in "xyz"],
             "atoms_bohr": [[z] + [float(c) for c in x] for z, x in atoms]}
    entry.update(extra)
    manifest.append(entry)


def run_molecule(atoms, nel, axes):
    atoms = centre(atoms)
    mol = scf.Molecule(atoms, "sto-6g", nel, axes)
    return atoms, mol


def nuclear_dipole(atoms):
    return [sum(z * x[k] for z, x in atoms) for k in range(3)]


def h2(outdir):
    manifest = []
    r = 1.0
    atoms, mol = run_molecule([(1, [0, 0, -r / 2 * BOHR]), (1, [0, 0, r / 2 * BOHR])], 2, [0, 1, 2])
    e, eps, C, labels = scf.rhf(mol)
    cols = pick(labels, eps, [(0, 0), (4, 0)])
    C = fix_signs(C[:, cols])
    orbsym = [labels[c] for c in cols]
    h, g, dip = scf.mo_integrals(mol, C)
    fci = dense_fci_ground(h, g, mol.enuc, 1, 1)
    emit(outdir, "h2", "r1.00", r, atoms, h, g, mol.enuc, 2, orbsym, dip, nuclear_dipole(atoms),
         manifest, {"rhf_energy": e, "dense_fci_ground": fci})
    return manifest


def h4_rect(outdir, grid):
    manifest = []
    for r in grid:
        x, y = r / 2 * BOHR, 0.5 * BOHR
        raw = [(1, [x, y, 0]), (1, [x, -y, 0]), (1, [-x, y, 0]), (1, [-x, -y, 0])]
        atoms, mol = run_molecule(raw, 4, [0, 1, 2])
        e, eps, C, labels = scf.rhf(mol)
        # ag, b2u, b3u, b1g
        cols = pick(labels, eps, [(0, 0), (2, 0), (1, 0), (3, 0)])
        C = fix_signs(C[:, cols])
        orbsym = [labels[c] for c in cols]
        h, g, dip = scf.mo_integrals(mol, C)
        fci = dense_fci_ground(h, g, mol.enuc, 2, 2)
        emit(outdir, "h4_rect", f"r{r:.2f}", r, atoms, h, g, mol.enuc, 4, orbsym, dip,
             nuclear_dipole(atoms), manifest, {"rhf_energy": e, "dense_fci_ground": fci})
        print("h4_rect", r, e, fci, flush=True)
    return manifest


def h4_linear(outdir, grid):
    manifest = []
    for r in grid:
        raw = [(1, [0, s * r * BOHR, 0]) for s in (-1.5, -0.5, 0.5, 1.5)]
        atoms, mol = run_molecule(raw, 4, [0, 1, 2])
        e, eps, C, labels = scf.rhf(mol)
        cols = pick(labels, eps, [(0, 0), (2, 0), (0, 1), (2, 1)])
        C = fix_signs(C[:, cols])
        orbsym = [labels[c] for c in cols]
        h, g, dip = scf.mo_integrals(mol, C)
        fci = dense_fci_ground(h, g, mol.enuc, 2, 2)
        emit(outdir, "h4_linear", f"r{r:.2f}", r, atoms, h, g, mol.enuc, 4, orbsym, dip,
             nuclear_dipole(atoms), manifest, {"rhf_energy": e, "dense_fci_ground": fci})
        print("h4_linear", r, e, fci, flush=True)
    return manifest


def beh2(outdir, grid):
    manifest = []
    A1, B1, B2 = 0, 1, 2
    for y in grid:
        z = (127.0 - 50.0 * y) / 23.0
        raw = [(4, [0, 0, 0]), (1, [0, y, z]), (1, [0, -y, z])]
        atoms, mol = run_molecule(raw, 6, [0, 1])
        e_hf, eps, C, labels = scf.rhf(mol)
        inactive = pick(labels, eps, [(A1, 0), (A1, 1)])
        active = pick(labels, eps, [(B2, 0), (A1, 2)])
        e_cas, Cr, civec = scf.casscf_22(mol, C, labels, inactive, active)
        rot_labels = [mol.mo_parity(Cr[:, k]) for k in range(Cr.shape[1])]
        assert rot_labels == labels
        # canonicalize inactive and virtual blocks with the state-averaged-free
        # CASSCF Fock matrix built from the total one-particle density
        occ_act = 2.0 * civec ** 2
        D = 2.0 * Cr[:, inactive] @ Cr[:, inactive].T
        for n_a, k in zip(occ_act, active):
            D += n_a * np.outer(Cr[:, k], Cr[:, k])
        J, K = mol.jk(D)
        F = mol.Hcore + J - 0.5 * K
        virtual = [k for k in range(Cr.shape[1]) if k not in inactive and k not in active]
        Cc = Cr.copy()
        orb_e = np.zeros(Cr.shape[1])
        for group in (inactive, virtual):
            for label in set(labels[k] for k in group):
                idx = [k for k in group if labels[k] == label]
                sub = Cr[:, idx]
                w, v = np.linalg.eigh(sub.T @ F @ sub)
                Cc[:, idx] = sub @ v
                orb_e[idx] = w
        for k in active:
            orb_e[k] = Cr[:, k] @ F @ Cr[:, k]
        order = (pick(labels, orb_e, [(A1, 0), (A1, 1)]) if True else []) + active[:]
        vir_sorted = pick([labels[k] if k in virtual else -1 for k in range(len(labels))],
                          orb_e, [(B1, 0), (A1, 0), (B2, 0)])
        order = pick([labels[k] if k in inactive else -1 for k in range(len(labels))],
                     orb_e, [(A1, 0), (A1, 1)]) + active + vir_sorted
        Cf = fix_signs(Cc[:, order])
        orbsym = [labels[k] for k in order]
        h, g, dip = scf.mo_integrals(mol, Cf)
        emit(outdir, "beh2", f"y{y:.2f}", y, atoms, h, g, mol.enuc, 6, orbsym, dip,
             nuclear_dipole(atoms), manifest,
             {"rhf_energy": e_hf, "casscf_energy": e_cas,
              "active_occupations": [float(o) for o in occ_act]})
        print("beh2", y, e_hf, e_cas, occ_act, flush=True)
    return manifest


def write_manifest(path, system, meta, entries):
    with open(path, "w") as f:
        f.write(f"# generated by tools/fixtures/generate.py\n")
        f.write(f'system = "{system}"\n')
        for k, v in meta.items():
            f.write(f"{k} = {_toml(v)}\n")
        for e in entries:
            f.write("\n[[geometry]]\n")
            for k, v in e.items():
                f.write(f"{k} = {_toml(v)}\n")


def _toml(v):
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml(x) for x in v) + "]"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


RECT_GRID = [0.70, 0.80, 0.90, 0.95, 1.00, 1.05, 1.10, 1.20, 1.30, 1.44, 1.60, 1.80, 2.00]
LINEAR_GRID = [0.60, 0.70, 0.75, 0.80, 0.88, 0.92, 1.00, 1.10, 1.20, 1.40, 1.60, 1.80]
BEH2_GRID = [0.80, 1.00, 1.10, 1.20, 1.23, 1.30, 1.40, 1.60, 1.80, 2.00, 2.20, 2.40]


def main():
    root = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "..", "fixtures")
    common = {"basis": "STO-6G", "frozen_core": "none", "dipole_origin": "centre of mass",
              "orbsym_convention": "molpro (parity bits x=1,y=2,z=4, plus one)"}
    jobs = [
        ("h2", lambda d: h2(d), {"point_group": "D2h", "coordinate_unit": "angstrom",
                                 "orbitals": ["1ag", "1b1u"]}),
        ("h4_rect", lambda d: h4_rect(d, RECT_GRID),
         {"point_group": "D2h", "coordinate_unit": "angstrom",
          "orbitals": ["1ag", "1b2u", "1b3u", "1b1g"]}),
        ("h4_linear", lambda d: h4_linear(d, LINEAR_GRID),
         {"point_group": "D2h", "coordinate_unit": "angstrom",
          "orbitals": ["1ag", "1b2u", "2ag", "2b2u"]}),
        ("beh2", lambda d: beh2(d, BEH2_GRID),
         {"point_group": "C2v", "coordinate_unit": "bohr",
          "orbitals": ["1a1", "2a1", "1b2", "3a1", "1b1", "4a1", "2b2"]}),
    ]
    only = set(sys.argv[2:])
    for name, fn, meta in jobs:
        if only and name not in only:
            continue
        d = os.path.join(root, name)
        os.makedirs(d, exist_ok=True)
        entries = fn(d)
        write_manifest(os.path.join(d, "manifest.toml"), name, {**common, **meta}, entries)


if __name__ == "__main__":
    main()
