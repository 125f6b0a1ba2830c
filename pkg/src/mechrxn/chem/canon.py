"""Canonical atom ranking by iterative neighborhood refinement.

Seed invariant per atom is (element, charge, degree, H count, aromatic);
ranks are then refined by the sorted multiset of (bond label, neighbor
rank) until the partition stabilizes.  Remaining ties are split one atom
at a time and re-refined; atoms still tied at that point are automorphic,
so the choice does not change the canonical serialization.  Atom map
numbers participate only as a final tie-break so that mapped molecules
serialize deterministically.

Aromatic bonds use a dedicated label, making the ranking independent of
which kekule assignment the parser picked.
"""

from __future__ import annotations

from mechrxn.chem.mol import Molecule


def _bond_label(bond) -> int:
    return 9 if bond.aromatic else bond.order


def _seed_invariants(mol: Molecule, use_maps: bool) -> list[tuple]:
    out = []
    for i, atom in enumerate(mol.atoms):
        inv = (
            atom.element,
            atom.charge,
            mol.degree(i),
            atom.hydrogens,
            atom.aromatic,
        )
        if use_maps:
            inv += (atom.map_number or 0,)
        out.append(inv)
    return out


def _refine(mol: Molecule, ranks: list[int]) -> list[int]:
    n = len(ranks)
    while True:
        signatures = []
        for i in range(n):
            neigh = sorted(
                (_bond_label(bond), ranks[j]) for j, bond in mol.neighbors[i]
            )
            signatures.append((ranks[i], tuple(neigh)))
        new_ranks = _dense_ranks(signatures)
        if new_ranks == ranks:
            return ranks
        ranks = new_ranks


def _dense_ranks(keys: list) -> list[int]:
    order = {key: r for r, key in enumerate(sorted(set(keys)))}
    return [order[key] for key in keys]


def canonical_rank(mol: Molecule, use_maps: bool = True) -> list[int]:
    """Total, permutation-invariant atom ordering (0 = first)."""
    n = len(mol.atoms)
    if n == 0:
        return []
    ranks = _refine(mol, _dense_ranks(_seed_invariants(mol, use_maps)))
    # Split residual ties (automorphic orbits) deterministically: promote
    # one member of the lowest tied class, then re-refine.
    while len(set(ranks)) < n:
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied_rank = min(r for r, c in counts.items() if c > 1)
        pivot = min(i for i in range(n) if ranks[i] == tied_rank)
        keys = [(ranks[i], 0 if i == pivot else 1) for i in range(n)]
        ranks = _refine(mol, _dense_ranks(keys))
    return ranks
