"""Numeric fingerprints for atoms, molecule sets, and reactions.

Atom fingerprints are 6487 wide: 6402 hashed graph-topological counts
(labeled simple paths and neighborhood shells out to radius 3) plus 85
physicochemical descriptors.  Reaction fingerprints concatenate source
and sink atom fingerprints with a signed 2048-wide circular-fingerprint
difference between products and reactants, 15022 in total.

Hashing uses blake2b folded into the bucket range, so vectors are
bit-identical across platforms and sessions.  Descriptor slots are
documented in docs/formats.md.
"""

from __future__ import annotations

import hashlib

import numpy as np

from mechrxn import elements
from mechrxn.chem.mol import Molecule
from mechrxn.reaction import ElementaryStep, StepError

TOPOLOGY_BITS = 6402
PHYSCHEM_WIDTH = 85
ATOM_FP_WIDTH = TOPOLOGY_BITS + PHYSCHEM_WIDTH  # 6487
MORGAN_BITS = 2048
REACTION_FP_WIDTH = 2 * ATOM_FP_WIDTH + MORGAN_BITS  # 15022

_ELEMENT_ORDER = sorted(elements.VALENCE_ELECTRONS)  # 18 supported elements
_HALOGENS = {9, 17, 35, 53}


def _stable_bucket(text: str, buckets: int) -> int:
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") % buckets


def _atom_label(mol: Molecule, i: int) -> str:
    a = mol.atoms[i]
    return f"{a.element}/{a.charge}/{a.hydrogens}/{int(a.aromatic)}"


def _bond_label(bond) -> str:
    return "a" if bond.aromatic else str(bond.order)


def _hybridization(mol: Molecule, i: int) -> str:
    orders = [b.order for _, b in mol.neighbors[i]]
    if mol.atoms[i].aromatic:
        return "sp2"
    if any(o == 3 for o in orders) or sum(1 for o in orders if o == 2) >= 2:
        return "sp"
    if any(o == 2 for o in orders):
        return "sp2"
    return "sp3"


def atom_fingerprint(mol: Molecule, atom: int) -> np.ndarray:
    """6487-wide feature vector for one atom in its molecule."""
    if not 0 <= atom < len(mol.atoms):
        raise IndexError(f"atom index {atom} out of range")
    vec = np.zeros(ATOM_FP_WIDTH, dtype=np.float64)

    # --- topological block: labeled simple paths up to 3 bonds ---
    root_label = _atom_label(mol, atom)
    stack = [(atom, [atom], root_label)]
    vec[_stable_bucket(f"P|{root_label}", TOPOLOGY_BITS)] += 1.0
    while stack:
        current, path, text = stack.pop()
        if len(path) > 3:
            continue
        for j, bond in mol.neighbors[current]:
            if j in path:
                continue
            extended = f"{text}{_bond_label(bond)}{_atom_label(mol, j)}"
            vec[_stable_bucket(f"P|{extended}", TOPOLOGY_BITS)] += 1.0
            stack.append((j, path + [j], extended))

    # neighborhood shells: multiset of labels at each graph distance
    dist = {atom: 0}
    frontier = [atom]
    shells: dict[int, list[str]] = {0: [root_label]}
    for r in (1, 2, 3):
        nxt: list[int] = []
        for i in frontier:
            for j, _ in mol.neighbors[i]:
                if j not in dist:
                    dist[j] = r
                    nxt.append(j)
                    shells.setdefault(r, []).append(_atom_label(mol, j))
        frontier = nxt
    for r, labels in shells.items():
        text = f"S|{r}|" + ",".join(sorted(labels))
        vec[_stable_bucket(text, TOPOLOGY_BITS)] += 1.0

    # --- physicochemical block ---
    vec[TOPOLOGY_BITS:] = _physchem_block(mol, atom)
    return vec


def _physchem_block(mol: Molecule, i: int) -> np.ndarray:
    a = mol.atoms[i]
    out = np.zeros(PHYSCHEM_WIDTH, dtype=np.float64)
    degree = mol.degree(i)
    load = mol.bond_order_sum(i) + a.hydrogens
    en = elements.ELECTRONEGATIVITY[a.element]
    neighbor_en = [
        elements.ELECTRONEGATIVITY[mol.atoms[j].element]
        for j, _ in mol.neighbors[i]
    ]
    orders = [b.order for _, b in mol.neighbors[i]]
    ring_size = mol.ring_membership[i]

    out[0] = a.element
    out[1] = a.charge
    out[2] = degree
    out[3] = a.hydrogens
    out[4] = load
    out[5] = mol.lone_pairs(i)
    out[6] = float(a.aromatic)
    out[7] = float(ring_size > 0)
    out[8] = ring_size
    out[9] = en
    out[10] = en - elements.ELECTRONEGATIVITY[6]
    out[11] = float(a.charge > 0)
    out[12] = float(a.charge < 0)
    out[13] = float(
        mol.lone_electrons(i) == 0
        and load < elements.max_bond_capacity(a.element)
    )
    out[14] = sum(1 for o in orders if o >= 2)
    for j, _ in mol.neighbors[i]:
        z = mol.atoms[j].element
        if z == 6:
            out[15] += 1
        elif z == 7:
            out[16] += 1
        elif z == 8:
            out[17] += 1
        elif z == 16:
            out[18] += 1
        elif z in _HALOGENS:
            out[19] += 1
        else:
            out[20] += 1
    if neighbor_en:
        out[21] = float(np.mean(neighbor_en))
        out[22] = max(neighbor_en)
        out[23] = min(neighbor_en)
    out[24] = sum(1 for o in orders if o == 1)
    out[25] = sum(1 for o in orders if o == 2)
    out[26] = sum(1 for o in orders if o == 3)
    out[27] = sum(1 for _, b in mol.neighbors[i] if b.aromatic)

    base = 28
    out[base + _ELEMENT_ORDER.index(a.element)] = 1.0
    base += len(_ELEMENT_ORDER)  # 46
    out[base + min(degree, 5)] = 1.0
    base += 6  # 52
    out[base + min(a.hydrogens, 4)] = 1.0
    base += 5  # 57
    out[base + min(max(a.charge, -2), 2) + 2] = 1.0
    base += 5  # 62
    out[base + ("sp", "sp2", "sp3", "other").index(_hybridization(mol, i))] = 1.0
    base += 4  # 66
    if 3 <= ring_size <= 8:
        out[base + ring_size - 3] = 1.0
    # remaining slots reserved (zero)
    return out


def morgan_fingerprint(molset, nbits: int = MORGAN_BITS) -> np.ndarray:
    """Radius-2 circular environment counts folded into nbits buckets.

    Additive over disjoint molecules: fp(A u B) = fp(A) + fp(B).
    """
    if isinstance(molset, Molecule):
        molset = (molset,)
    vec = np.zeros(nbits, dtype=np.float64)
    for mol in molset:
        n = len(mol.atoms)
        codes = [f"{_atom_label(mol, i)}" for i in range(n)]
        for i in range(n):
            vec[_stable_bucket(f"M|0|{codes[i]}", nbits)] += 1.0
        current = codes
        for radius in (1, 2):
            nxt: list[str] = []
            for i in range(n):
                env = sorted(
                    f"{_bond_label(b)}:{current[j]}" for j, b in mol.neighbors[i]
                )
                code = f"({current[i]})[{';'.join(env)}]"
                nxt.append(code)
                vec[_stable_bucket(f"M|{radius}|{code}", nbits)] += 1.0
            current = nxt
    return vec


def reaction_fingerprint(step: ElementaryStep) -> np.ndarray:
    """source fp + sink fp + signed net-change block, 15022 wide."""
    if step.arrow is None:
        raise StepError("reaction fingerprint needs an arrow")
    if step.products is None:
        raise StepError("reaction fingerprint needs products")
    source_map, sink_map = (
        step.arrow.source.primary_atom,
        step.arrow.sink.primary_atom,
    )
    src = snk = None
    for mol in step.reactants:
        i = mol.atom_by_map(source_map)
        if i is not None:
            src = atom_fingerprint(mol, i)
        i = mol.atom_by_map(sink_map)
        if i is not None:
            snk = atom_fingerprint(mol, i)
    if src is None or snk is None:
        raise StepError("arrow atoms not found in reactants")
    net = morgan_fingerprint(step.products) - morgan_fingerprint(step.reactants)
    return np.concatenate([src, snk, net])
