#!/usr/bin/env python3
"""Generate the bundled round-trip corpus (tests/data/corpus_1000.smi).

Molecules are assembled from fragment templates with a fixed seed and
kept only when they parse cleanly, so the corpus is reproducible and
valid by construction.
"""

import random
from pathlib import Path

from mechrxn.chem import parse_smiles

CORES = [
    "c1ccccc1", "c1ccncc1", "c1ccoc1", "c1ccsc1", "c1cc[nH]c1",
    "c1ccc2ccccc2c1", "c1cnccn1", "C1CCCCC1", "C1CCNCC1", "C1CCOC1",
    "C1CCSC1", "C1CNCCN1", "C1COCCO1", "c1ccc2[nH]ccc2c1",
]

SUBSTITUENTS = [
    "C", "CC", "CCC", "C(C)C", "O", "OC", "N", "NC", "N(C)C", "F", "Cl",
    "Br", "I", "C=C", "C#N", "C(=O)O", "C(=O)OC", "C(=O)N", "C(=O)C",
    "S", "SC", "S(=O)(=O)C", "S(=O)(=O)O", "[N+](=O)[O-]", "C(F)(F)F",
    "OCC", "CO", "CN", "C(=O)Cl", "OC(=O)C", "B(O)O", "[Si](C)(C)C",
]

CHAINS = [
    "CCO", "CC(=O)O", "CCN", "CC(C)O", "OCC(O)CO", "NCCO", "CC(=O)NC",
    "CC(=O)OCC", "CSC", "CC(N)C(=O)O", "OCCOCCO", "ClCCCl", "BrCCBr",
    "CC(=O)C", "CC=CC", "C#CC", "NC(=O)N", "OC(=O)CCC(=O)O", "CCS",
    "CC(C)(C)O", "C[N+](C)(C)C", "CC([O-])=O", "[NH3+]CC([O-])=O",
    "OS(=O)(=O)O", "CP(O)(O)=O", "C[Sn](C)(C)C", "[Li]CCCC", "Cl[Mg]CC",
]

IONS = [
    "[Na+]", "[K+]", "[Li+]", "[Cl-]", "[Br-]", "[I-]", "[OH-]",
    "[NH4+]", "[F-]",
]


def ring_with_subs(rng: random.Random) -> str:
    core = rng.choice(CORES)
    n_subs = rng.randint(0, 2)
    out = core
    for _ in range(n_subs):
        sub = rng.choice(SUBSTITUENTS)
        # substitute at the first ring-atom position after the ring digit
        pos = out.find("1", 1)
        if pos < 0 or pos + 1 >= len(out):
            break
        out = out[: pos + 1] + f"({sub})" + out[pos + 1 :]
    return out


def main() -> None:
    rng = random.Random(20240901)
    seen: set[str] = set()
    rows: list[str] = []
    attempts = 0
    while len(rows) < 1000 and attempts < 100000:
        attempts += 1
        kind = rng.random()
        if kind < 0.40:
            text = ring_with_subs(rng)
        elif kind < 0.75:
            text = rng.choice(CHAINS)
            if rng.random() < 0.5:
                text += rng.choice(SUBSTITUENTS)
        elif kind < 0.9:
            text = ring_with_subs(rng) + rng.choice(CHAINS)
        else:
            text = rng.choice(CHAINS) + "." + rng.choice(IONS)
        try:
            mols = parse_smiles(text)
        except Exception:
            continue
        if text in seen:
            continue
        seen.add(text)
        rows.append(text)
    out = Path(__file__).resolve().parents[1] / "tests" / "data" / "corpus_1000.smi"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(rows) + "\n")
    print(f"wrote {len(rows)} molecules to {out} after {attempts} attempts")


if __name__ == "__main__":
    main()
