"""Molecular graphs: parsing, canonical form, formulas, resonance."""

from mechrxn.chem.mol import (
    AtomNode,
    Bond,
    Formula,
    Molecule,
    MoleculeError,
    ValenceError,
    molecular_formula,
)
from mechrxn.chem.smiles import (
    SmilesError,
    parse_smiles,
    parse_single,
    write_smiles,
    write_molset,
    canonical_key,
)
from mechrxn.chem.canon import canonical_rank
from mechrxn.chem.resonance import resonance_variants, same_species

__all__ = [
    "AtomNode",
    "Bond",
    "Formula",
    "Molecule",
    "MoleculeError",
    "ValenceError",
    "SmilesError",
    "molecular_formula",
    "parse_smiles",
    "parse_single",
    "write_smiles",
    "write_molset",
    "canonical_key",
    "canonical_rank",
    "resonance_variants",
    "same_species",
]
