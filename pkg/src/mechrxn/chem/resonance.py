"""Bounded resonance enumeration and species comparison.

Two delocalization moves are applied transitively from the input, both
anchored at a formally charged atom so the closure stays small:

  anion shift    X(-)-Y=Z  ->  X=Y-Z(-)   (lone pair into pi, pi out)
  cation shift   X(+)-Y=Z  ->  X=Y-Z(+)   (pi toward the empty orbital)
  cation lp      X(+)-Y:   ->  X=Y(+)     (adjacent lone pair donates)

Every variant conserves the formula and net charge by construction and
passes the valence model before being kept.
"""

from __future__ import annotations

from dataclasses import replace

from mechrxn import elements
from mechrxn.chem.aromatic import perceive_aromaticity
from mechrxn.chem.mol import Bond, Molecule, ValenceError
from mechrxn.chem.smiles import canonical_key


def _with_bond_order(mol: Molecule, i: int, j: int, delta: int) -> tuple:
    """New bond tuple with order(i,j) shifted; creates/removes as needed."""
    key = (min(i, j), max(i, j))
    existing = mol.bond_between(i, j)
    order = (existing.order if existing else 0) + delta
    if order < 0 or order > 3:
        return None
    out = [b for b in mol.bonds if (b.a, b.b) != key]
    if order > 0:
        base = existing if existing else Bond(key[0], key[1], 1)
        out.append(replace(base, order=order, aromatic=False))
    return tuple(sorted(out, key=lambda b: (b.a, b.b)))


def _apply_move(
    mol: Molecule,
    bond_ops: list[tuple[int, int, int]],
    charge_deltas: dict[int, int],
) -> Molecule | None:
    """Shift bond orders and charges; None when the move is impossible."""
    work = mol
    for i, j, delta in bond_ops:
        bonds = _with_bond_order(work, i, j, delta)
        if bonds is None:
            return None
        work = Molecule(work.atoms, bonds, name=mol.name)
    atoms = list(work.atoms)
    for idx, delta in charge_deltas.items():
        atoms[idx] = replace(atoms[idx], charge=atoms[idx].charge + delta)
    work = Molecule(tuple(atoms), work.bonds, name=mol.name)
    try:
        work.check_valences()
    except ValenceError:
        return None
    return perceive_aromaticity(work)


def _single_moves(mol: Molecule) -> list[Molecule]:
    out: list[Molecule] = []
    for x in range(len(mol.atoms)):
        charge = mol.atoms[x].charge
        if charge < 0 and mol.lone_pairs(x) > 0:
            # anion: lone pair on X forms pi to Y, existing Y=Z pi moves
            # onto Z as a lone pair.
            for y, bond_xy in mol.neighbors[x]:
                if bond_xy.order != 1:
                    continue
                for z, bond_yz in mol.neighbors[y]:
                    if z == x or bond_yz.order < 2:
                        continue
                    moved = _apply_move(
                        mol, [(x, y, +1), (y, z, -1)], {x: +1, z: -1}
                    )
                    if moved is not None:
                        out.append(moved)
        elif charge > 0:
            # pi retreat: a multiple bond at the cation collapses onto it,
            # handing the positive charge to the far atom.
            for w, bond_wx in mol.neighbors[x]:
                if bond_wx.order >= 2:
                    moved = _apply_move(mol, [(w, x, -1)], {x: -1, w: +1})
                    if moved is not None:
                        out.append(moved)
            x_load = mol.bond_order_sum(x) + mol.atoms[x].hydrogens
            has_vacancy = (
                mol.lone_electrons(x) == 0
                and x_load < elements.max_bond_capacity(mol.atoms[x].element)
            )
            if not has_vacancy:
                continue
            for y, bond_xy in mol.neighbors[x]:
                if bond_xy.order != 1:
                    continue
                # adjacent lone pair donates into the vacancy
                if mol.lone_pairs(y) > 0:
                    moved = _apply_move(mol, [(x, y, +1)], {x: -1, y: +1})
                    if moved is not None:
                        out.append(moved)
                # allylic pi shifts toward the vacancy
                for z, bond_yz in mol.neighbors[y]:
                    if z == x or bond_yz.order < 2:
                        continue
                    moved = _apply_move(
                        mol, [(x, y, +1), (y, z, -1)], {x: -1, z: +1}
                    )
                    if moved is not None:
                        out.append(moved)
    return out


def resonance_variants(mol: Molecule, limit: int = 32) -> tuple[Molecule, ...]:
    """The molecule plus charge-delocalized variants, up to limit total."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    seen = {canonical_key(mol): mol}
    frontier = [mol]
    while frontier and len(seen) < limit:
        nxt: list[Molecule] = []
        for current in frontier:
            for moved in _single_moves(current):
                key = canonical_key(moved)
                if key not in seen:
                    seen[key] = moved
                    nxt.append(moved)
                    if len(seen) >= limit:
                        break
            if len(seen) >= limit:
                break
        frontier = nxt
    return tuple(seen[k] for k in sorted(seen))


def same_species(a, b, limit: int = 32) -> str:
    """Compare molecule sets: 'identical', 'resonance-equivalent', 'different'."""
    a = tuple(a) if not isinstance(a, Molecule) else (a,)
    b = tuple(b) if not isinstance(b, Molecule) else (b,)
    keys_a = sorted(canonical_key(m) for m in a)
    keys_b = sorted(canonical_key(m) for m in b)
    if keys_a == keys_b:
        return "identical"
    if len(a) != len(b):
        return "different"
    # bijective matching where each member equals some resonance variant
    # of its counterpart
    variant_keys_b = [
        {canonical_key(v) for v in resonance_variants(m, limit)} for m in b
    ]
    used: list[bool] = [False] * len(b)

    def assign(i: int) -> bool:
        if i == len(a):
            return True
        key = canonical_key(a[i])
        for j in range(len(b)):
            if used[j] or key not in variant_keys_b[j]:
                continue
            used[j] = True
            if assign(i + 1):
                return True
            used[j] = False
        return False

    return "resonance-equivalent" if assign(0) else "different"
