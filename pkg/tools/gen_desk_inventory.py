#!/usr/bin/env python3
"""Generate desk-scale acid/base inventories (tests/data/desk_*.csv).

Families follow textbook aqueous pKa ranges with per-member jitter, so
rate filtering and classifier training see realistic structure.  Every
record is validated through the inventory classes before writing.
"""

import random
from pathlib import Path

from mechrxn.chem import parse_smiles
from mechrxn.ptgen import AcidRecord, BaseRecord

R_GROUPS = ["C", "CC", "CCC", "CC(C)", "CCCC", "CC(C)(C)", "c1ccccc1C",
            "ClCC", "FC(F)(F)C", "COC", "CCOCC", "C=CC", "CSCC", "CN(C)CC",
            "N#CC", "COc1ccc(cc1)C"]

ARYL = ["c1ccccc1", "c1ccc(C)cc1", "c1ccc(Cl)cc1", "c1ccc(OC)cc1",
        "c1ccc(F)cc1", "c1ccc(CC)cc1", "c1ccc(Br)cc1", "c1ccc(I)cc1",
        "c1cccc(C)c1", "c1ccc(CCC)cc1"]


def acid_rows(rng: random.Random):
    rows = []

    def add(smiles, base_pka, cls="heteroatom"):
        rows.append((smiles, 1, round(base_pka + rng.uniform(-0.3, 0.3), 2), cls))

    for r in R_GROUPS:
        add(f"{r}C(=O)[OH:1]", 4.7)          # carboxylic acids
    for r in R_GROUPS:
        add(f"{r}[OH:1]", 15.8)              # alcohols
    for ar in ARYL:
        add(f"[OH:1]{ar}", 10.0)             # phenols
    for r in R_GROUPS[:10]:
        add(f"{r}[SH:1]", 10.5)              # thiols
    for r in R_GROUPS[:10]:
        add(f"{r}[NH3+:1]", 10.6)            # ammonium ions
    for ar in ARYL[:6]:
        add(f"[NH3+:1]{ar}", 4.6)            # anilinium ions
    for r in R_GROUPS[:6]:
        add(f"{r}C(C)=[OH+:1]", -3.0)        # protonated ketones
    for r in R_GROUPS[:4]:
        add(f"{r}S(=O)(=O)[OH:1]", -2.0)     # sulfonic acids
    add("[OH3+:1]", -1.74)
    add("[OH2:1]", 15.74)
    add("O[OH:1]", 11.6)
    add("[NH4+:1]", 9.25)
    add("[SH2:1]", 7.0)
    add("[FH:1]", 3.2)
    add("c1cc[nH+:1]cc1", 5.2)               # pyridinium
    # carbon acids
    add("[CH3:1][N+](=O)[O-]", 10.2, "carbon")
    add("C[CH2:1][N+](=O)[O-]", 8.6, "carbon")
    add("CC[CH2:1][N+](=O)[O-]", 9.0, "carbon")
    for r in R_GROUPS[:8]:
        add(f"{r}C(=O)[CH2:1]C(=O)C", 9.0, "carbon")   # 1,3-diketones
    for r in R_GROUPS[:8]:
        add(f"{r}C(=O)[CH3:1]", 19.3, "carbon")        # ketones
    for r in R_GROUPS[:4]:
        add(f"{r}OC(=O)[CH2:1]C(=O)OC", 13.0, "carbon")  # malonates
    return rows


def base_rows(rng: random.Random):
    rows = []

    def add(smiles, conj_pka, cls="heteroatom"):
        rows.append((smiles, 1, round(conj_pka + rng.uniform(-0.3, 0.3), 2), cls))

    for r in R_GROUPS:
        add(f"{r}C(=O)[O-:1]", 4.7)          # carboxylates
    for r in R_GROUPS:
        add(f"{r}[O-:1]", 15.8)              # alkoxides
    for ar in ARYL:
        add(f"[O-:1]{ar}", 10.0)             # phenolates
    for r in R_GROUPS[:10]:
        add(f"{r}[S-:1]", 10.5)              # thiolates
    for r in R_GROUPS[:10]:
        add(f"{r}[NH2:1]", 10.6)             # primary amines
    for r in R_GROUPS[:5]:
        add(f"{r}[NH:1]C", 10.9)            # secondary amines
    for ar in ARYL[:6]:
        add(f"[NH2:1]{ar}", 4.6)             # anilines
    for r in R_GROUPS[:4]:
        add(f"{r}S(=O)(=O)[O-:1]", -2.0)     # sulfonates
    add("c1cc[n:1]cc1", 5.2)
    add("Cc1cc[n:1]cc1", 5.8)
    add("[OH2:1]", -1.74)
    add("[OH-:1]", 15.74)
    add("[NH3:1]", 9.25)
    add("[F-:1]", 3.2)
    add("[Cl-:1]", -7.0)
    add("[Br-:1]", -9.0)
    add("[SH-:1]", 7.0)
    for r in R_GROUPS[:6]:
        add(f"{r}C(N)=[O:1]", -0.5)          # amide carbonyl oxygens
    return rows


def validate(rows, kind):
    ok = []
    for smiles, site_map, pka, cls in rows:
        try:
            mols = parse_smiles(smiles)
            if len(mols) != 1:
                raise ValueError("multiple molecules")
            mol = mols[0]
            site = mol.atom_by_map(site_map)
            if site is None:
                raise ValueError("site map missing")
            rec_cls = AcidRecord if kind == "acid" else BaseRecord
            rec_cls(mol, site, pka, cls)
            ok.append((smiles, site_map, pka, cls))
        except Exception as exc:
            print(f"  dropped {kind} {smiles}: {exc}")
    return ok


def main():
    rng = random.Random(77)
    acids = validate(acid_rows(rng), "acid")
    bases = validate(base_rows(rng), "base")
    out_dir = Path(__file__).resolve().parents[1] / "tests" / "data"
    for name, rows in (("desk_acids.csv", acids), ("desk_bases.csv", bases)):
        path = out_dir / name
        with open(path, "w") as fh:
            fh.write("smiles,site_atom_map,pka,site_class\n")
            for smiles, site_map, pka, cls in rows:
                fh.write(f"{smiles},{site_map},{pka},{cls}\n")
        print(f"wrote {len(rows)} records to {path}")


if __name__ == "__main__":
    main()
