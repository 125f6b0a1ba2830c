"""Aromaticity perception and kekulization.

Perception runs over fused ring systems built from simple cycles of size
3..7.  A system is aromatic when every member atom can hold a p orbital
(in-system double bond, usable lone pair, or an empty orbital) and the
total p-electron count is 4n+2.  Perceived flags coexist with explicit
kekulized bond orders: arrow application needs real orders, equality and
dedup need the flags.
"""

from __future__ import annotations

from dataclasses import replace

from mechrxn import elements
from mechrxn.chem.mol import Bond, Molecule, MoleculeError

# Target total valence of an aromatic atom by (element, charge); an atom
# whose sigma framework falls one short needs a double bond in the
# kekulized form.
_AROMATIC_TARGET_VALENCE = {
    (5, 0): 3,
    (5, -1): 4,
    (6, 0): 4,
    (6, 1): 3,
    (6, -1): 3,
    (7, 0): 3,
    (7, 1): 4,
    (7, -1): 2,
    (8, 0): 2,
    (8, 1): 3,
    (15, 0): 3,
    (15, 1): 4,
    (16, 0): 2,
    (16, 1): 3,
    (34, 0): 2,
}


class KekulizationError(MoleculeError):
    """Aromatic ring system admits no alternating bond assignment."""


def kekulize(
    atoms: list,
    bonds: list[Bond],
    aromatic_bond_keys: set[tuple[int, int]],
) -> list[Bond]:
    """Assign alternating orders to aromatic bonds; returns updated bonds.

    Atoms flagged aromatic that need one more unit of valence are matched
    pairwise along aromatic bonds (a perfect matching on the subgraph of
    needy atoms).  Bonds in the matching become order 2.
    """
    needs_pi: set[int] = set()
    for i, atom in enumerate(atoms):
        if not atom.aromatic:
            continue
        # Aromatic-system bonds count 1 toward the sigma framework;
        # exocyclic bonds count their full order.
        sigma = atom.hydrogens
        for b in bonds:
            if i in (b.a, b.b):
                sigma += 1 if (b.a, b.b) in aromatic_bond_keys else b.order
        target = _AROMATIC_TARGET_VALENCE.get((atom.element, atom.charge))
        if target is None:
            raise KekulizationError(
                f"no aromatic valence model for {atom.symbol} "
                f"with charge {atom.charge:+d}"
            )
        need = target - sigma
        if need not in (0, 1):
            raise KekulizationError(
                f"aromatic {atom.symbol} (atom {i}) needs {need} pi bonds"
            )
        if need == 1:
            needs_pi.add(i)

    adjacency: dict[int, list[int]] = {i: [] for i in needs_pi}
    for key in aromatic_bond_keys:
        a, b = key
        if a in needs_pi and b in needs_pi:
            adjacency[a].append(b)
            adjacency[b].append(a)

    matching = _perfect_matching(needs_pi, adjacency)
    if matching is None:
        raise KekulizationError("un-kekulizable ring system")

    out: list[Bond] = []
    for bond in bonds:
        key = (bond.a, bond.b)
        if key in aromatic_bond_keys:
            order = 2 if matching.get(bond.a) == bond.b else 1
            out.append(replace(bond, order=order, aromatic=True))
        else:
            out.append(bond)
    return out


def _perfect_matching(
    vertices: set[int], adjacency: dict[int, list[int]]
) -> dict[int, int] | None:
    """Backtracking perfect matching; rings are small so this is cheap."""
    matching: dict[int, int] = {}

    def solve(remaining: list[int]) -> bool:
        if not remaining:
            return True
        v = remaining[0]
        rest = remaining[1:]
        for w in sorted(adjacency[v]):
            if w in matching:
                continue
            matching[v] = w
            matching[w] = v
            if solve([u for u in rest if u != w]):
                return True
            del matching[v]
            del matching[w]
        return False

    if solve(sorted(vertices)):
        return matching
    return None


def perceive_aromaticity(mol: Molecule) -> Molecule:
    """Recompute aromatic flags from the kekulized graph.

    Flags are set per fused ring system, so both kekule forms of the same
    aromatic molecule perceive identically and canonicalize to one text.
    """
    candidate_rings = [r for r in mol.rings if 3 <= len(r) <= 7]
    if not candidate_rings:
        return _strip_flags(mol)

    ring_bond_keys: set[tuple[int, int]] = set()
    for ring in candidate_rings:
        for bond in mol.bonds:
            if bond.a in ring and bond.b in ring:
                ring_bond_keys.add((bond.a, bond.b))

    # Fused systems: connected components over ring bonds, restricted to
    # atoms that can hold a p orbital at all.
    capable = {i for i in range(len(mol.atoms)) if _p_capable(mol, i)}
    systems = _ring_systems(candidate_rings, capable)

    aromatic_atoms: set[int] = set()
    aromatic_bonds: set[tuple[int, int]] = set()
    for system in systems:
        system_bonds = {
            key for key in ring_bond_keys if key[0] in system and key[1] in system
        }
        pi = _system_pi_electrons(mol, system, system_bonds)
        if pi is None or pi < 2 or pi % 4 != 2:
            continue
        aromatic_atoms |= system
        aromatic_bonds |= system_bonds

    atoms = tuple(
        replace(a, aromatic=(i in aromatic_atoms)) for i, a in enumerate(mol.atoms)
    )
    bonds = tuple(
        replace(b, aromatic=((b.a, b.b) in aromatic_bonds)) for b in mol.bonds
    )
    return Molecule(atoms, bonds, name=mol.name)


def _strip_flags(mol: Molecule) -> Molecule:
    if not any(a.aromatic for a in mol.atoms) and not any(
        b.aromatic for b in mol.bonds
    ):
        return mol
    atoms = tuple(replace(a, aromatic=False) for a in mol.atoms)
    bonds = tuple(replace(b, aromatic=False) for b in mol.bonds)
    return Molecule(atoms, bonds, name=mol.name)


def _p_capable(mol: Molecule, i: int) -> bool:
    atom = mol.atoms[i]
    if atom.element not in elements.AROMATIC_ELEMENTS:
        return False
    if any(bond.order == 3 for _, bond in mol.neighbors[i]):
        return False
    # sp3-saturated atoms (4 sigma connections, no lone pair, no vacancy)
    # cannot participate.
    sigma = mol.degree(i) + atom.hydrogens
    if sigma > 3:
        return False
    return True


def _ring_systems(
    rings: list[frozenset[int]], capable: set[int]
) -> list[set[int]]:
    eligible = [r for r in rings if r <= capable]
    systems: list[set[int]] = []
    for ring in eligible:
        merged = set(ring)
        keep: list[set[int]] = []
        for system in systems:
            if system & merged:
                merged |= system
            else:
                keep.append(system)
        keep.append(merged)
        systems = keep
    return systems


def _system_pi_electrons(
    mol: Molecule, system: set[int], system_bonds: set[tuple[int, int]]
) -> int | None:
    """4n+2 count for a fused system, or None when an atom cannot conjugate."""
    total = 0
    doubles = 0
    empties = 0
    for key in system_bonds:
        bond = mol.bond_between(*key)
        if bond is not None and bond.order == 2:
            total += 2
            doubles += 1
    for i in system:
        if _has_empty_orbital(mol, i):
            empties += 1
    if doubles == 0 and empties == 0:
        # a ring of pure lone-pair donors has no pi system to conjugate
        return None
    for i in system:
        has_in_system_pi = any(
            mol.bond_between(i, j) is not None
            and mol.bond_between(i, j).order == 2
            and (min(i, j), max(i, j)) in system_bonds
            for j, _ in mol.neighbors[i]
        )
        if has_in_system_pi:
            continue
        has_exo_pi = any(bond.order >= 2 for _, bond in mol.neighbors[i])
        if has_exo_pi:
            # pi system points out of the ring (quinone-style): blocks.
            return None
        if mol.lone_pairs(i) > 0:
            total += 2
        elif _has_empty_orbital(mol, i):
            total += 0
        else:
            return None
    return total


def _has_empty_orbital(mol: Molecule, i: int) -> bool:
    atom = mol.atoms[i]
    load = mol.bond_order_sum(i) + atom.hydrogens
    if atom.element in elements.PERIOD_2 or atom.element == 6:
        return mol.lone_electrons(i) == 0 and load < 4
    return False
