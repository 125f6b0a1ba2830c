"""Independent reference implementations used to cross-check the engine.

The enumeration oracle knows nothing about orbital legality: it throws
every kind combination at apply_arrow and keeps whatever survives, so it
validates the engine's legality matrix against the raw mechanics.
"""

from itertools import product

from mechrxn.chem import canonical_key
from mechrxn.reaction import (
    ArrowError,
    ArrowSpec,
    OrbitalRef,
    StepError,
    apply_arrow,
    check_balance,
)
from mechrxn.twostep import ensure_maps

SOURCE_KINDS = ("lone_pair", "pi_bond", "sigma_bond")
SINK_KINDS = ("empty_orbital", "pi_star", "sigma_star")


def blind_enumeration_oracle(reactants) -> set[str]:
    """All (product set, arrow) keys reachable from any atom pair."""
    reactants = ensure_maps(reactants)
    atoms = [
        (mi, ai)
        for mi, mol in enumerate(reactants)
        for ai in range(len(mol.atoms))
    ]

    def orbital_refs(kind, mi, ai):
        mol = reactants[mi]
        amap = mol.atoms[ai].map_number
        if kind in ("lone_pair", "empty_orbital"):
            return [OrbitalRef(kind, amap)]
        return [
            OrbitalRef(kind, amap, mol.atoms[j].map_number)
            for j, _ in mol.neighbors[ai]
        ]

    found: set[str] = set()
    for (smi, sai), (tmi, tai) in product(atoms, atoms):
        for source_kind in SOURCE_KINDS:
            for sink_kind in SINK_KINDS:
                for source in orbital_refs(source_kind, smi, sai):
                    for sink in orbital_refs(sink_kind, tmi, tai):
                        try:
                            arrow = ArrowSpec(source, sink)
                            products = apply_arrow(reactants, arrow)
                        except (ArrowError, StepError):
                            continue
                        if not check_balance(reactants, products).balanced:
                            continue
                        found.add(canonical_key(products) + "|" + arrow.code())
    return found


# 25 reactant sets, each <= 12 heavy atoms, for the oracle-equality gate.
ENUMERATION_FIXTURES = [
    "[Br-].CCl",
    "[OH-].C=O",
    "CC(C)=O.[OH3+]",
    "[CH2-]C=O.CBr",
    "[NH3].[CH3+]",
    "C=C.[H+]",
    "C=C.Cl",
    "[OH-].CC(=O)Cl",
    "[F-].B(F)(F)F",
    "CC=C.O",
    "[SH-].CI",
    "C#C.Br",
    "[CH3-].O=C=O",
    "N.C=C(C)C",
    "[OH2].CC(C)=[OH+]",
    "[Cl-].CC(C)(C)Br",
    "C=CC=C.[H+]",
    "[O-]C=O.CI",
    "CN(C)C.CBr",
    "[B-](C)(C)(C)C.C=O",
    "OO.[CH2+]C",
    "[I-].c1ccccc1CCl",
    "CSC.[CH3+]",
    "[NH2-].CC#N",
    "OC=C.[OH3+]",
]
