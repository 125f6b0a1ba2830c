"""SMILES parsing and canonical writing.

Supported subset (documented in docs/formats.md): bare and bracketed
atoms over the engine's element scope, charges, attached-H counts, atom
maps, bonds - = # :, branches, ring closures (digits and %nn), dots, and
aromatic lowercase notation.  Stereo marks (@, @@, /, \\) are parsed and
kept as annotations but never written and never affect equality.
Isotopes and wildcards are rejected.

Canonical output is a fixed point: parsing the written text and writing
again reproduces it byte for byte, for any atom ordering of the input.
Aromatic systems are written in lowercase, so the two kekule assignments
of one aromatic molecule share a single canonical text.
"""

from __future__ import annotations

import re
from dataclasses import replace

from mechrxn import elements
from mechrxn.chem.aromatic import kekulize, perceive_aromaticity
from mechrxn.chem.canon import canonical_rank
from mechrxn.chem.mol import AtomNode, Bond, Molecule, MoleculeError

__all__ = [
    "SmilesError",
    "parse_smiles",
    "parse_single",
    "write_smiles",
    "write_molset",
    "canonical_key",
    "collapse_hydrogens",
    "strip_maps",
]


class SmilesError(MoleculeError):
    """Lexical or semantic error in a SMILES string."""


_TWO_CHAR = ("Cl", "Br")
_BARE_UPPER = set("BCNOPSFI")
_BARE_AROMATIC = set("bcnops")
_BOND_ORDERS = {"-": 1, "=": 2, "#": 3}

_BRACKET_RE = re.compile(
    r"""^(?P<isotope>\d+)?
        (?P<symbol>se|[A-Z][a-z]?|[bcnops])
        (?P<stereo>@{1,2})?
        (?P<hcount>H\d*)?
        (?P<charge>\+{1,3}|-{1,3}|\+\d|-\d)?
        (?::(?P<map>\d+))?$""",
    re.VERBOSE,
)


class _PendingAtom:
    __slots__ = ("element", "charge", "hydrogens", "map_number", "aromatic",
                 "stereo", "bare", "position")

    def __init__(self, element, charge, hydrogens, map_number, aromatic,
                 stereo, bare, position):
        self.element = element
        self.charge = charge
        self.hydrogens = hydrogens
        self.map_number = map_number
        self.aromatic = aromatic
        self.stereo = stereo
        self.bare = bare  # implicit-H fill applies
        self.position = position


def _parse_bracket(body: str, pos: int) -> _PendingAtom:
    m = _BRACKET_RE.match(body)
    if m is None:
        raise SmilesError(f"malformed bracket atom '[{body}]' at position {pos}")
    if m.group("isotope"):
        raise SmilesError(f"isotopes are not supported (position {pos})")
    sym = m.group("symbol")
    aromatic = sym[0].islower()
    sym_norm = sym.capitalize()
    if sym_norm not in elements.SYMBOL_TO_NUMBER:
        raise SmilesError(
            f"element '{sym_norm}' at position {pos} is outside the supported scope"
        )
    element = elements.SYMBOL_TO_NUMBER[sym_norm]
    if aromatic and element not in elements.AROMATIC_ELEMENTS:
        raise SmilesError(f"'{sym}' cannot be aromatic (position {pos})")
    hcount = m.group("hcount")
    hydrogens = 0
    if hcount:
        hydrogens = int(hcount[1:]) if len(hcount) > 1 else 1
    charge_text = m.group("charge") or ""
    charge = 0
    if charge_text:
        sign = 1 if charge_text[0] == "+" else -1
        digits = charge_text.lstrip("+-")
        charge = sign * (int(digits) if digits else len(charge_text))
    map_number = int(m.group("map")) if m.group("map") else None
    if map_number == 0:
        raise SmilesError(f"atom map 0 is not a valid label (position {pos})")
    return _PendingAtom(element, charge, hydrogens, map_number, aromatic,
                        m.group("stereo"), bare=False, position=pos)


def parse_smiles(text: str) -> tuple[Molecule, ...]:
    """Parse SMILES into a molecule set (one Molecule per component).

    Aromatic lowercase input is kekulized; aromatic flags are then
    re-perceived from the resulting graph so that flags and bond orders
    always agree.
    """
    if not text or text.isspace():
        raise SmilesError("empty SMILES")
    text = text.strip()

    atoms: list[_PendingAtom] = []
    bonds: dict[tuple[int, int], tuple[int | None, str | None, int]] = {}
    aromatic_bond_keys: set[tuple[int, int]] = set()

    prev: int | None = None
    pending_order: int | None = None
    pending_aromatic = False
    pending_stereo: str | None = None
    branch_stack: list[int | None] = []
    ring_open: dict[int, tuple[int, int | None, bool, int]] = {}

    def add_bond(i: int, j: int, order: int | None, aromatic: bool,
                 stereo: str | None, pos: int):
        key = (min(i, j), max(i, j))
        if i == j:
            raise SmilesError(f"self-bond at position {pos}")
        if key in bonds:
            raise SmilesError(f"duplicate bond at position {pos}")
        if aromatic and not (atoms[i].aromatic and atoms[j].aromatic):
            raise SmilesError(
                f"':' bond between non-aromatic atoms at position {pos}"
            )
        if aromatic or (order is None and atoms[i].aromatic and atoms[j].aromatic):
            aromatic_bond_keys.add(key)
            order = 1
        bonds[key] = (order if order is not None else 1, stereo, pos)

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        atom: _PendingAtom | None = None
        if ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise SmilesError(f"unclosed bracket at position {i}")
            atom = _parse_bracket(text[i + 1 : end], i)
            i = end + 1
        elif text[i : i + 2] in _TWO_CHAR:
            sym = text[i : i + 2]
            atom = _PendingAtom(elements.SYMBOL_TO_NUMBER[sym], 0, 0, None,
                                False, None, bare=True, position=i)
            i += 2
        elif ch in _BARE_UPPER:
            atom = _PendingAtom(elements.SYMBOL_TO_NUMBER[ch], 0, 0, None,
                                False, None, bare=True, position=i)
            i += 1
        elif ch in _BARE_AROMATIC:
            atom = _PendingAtom(elements.SYMBOL_TO_NUMBER[ch.upper()], 0, 0,
                                None, True, None, bare=True, position=i)
            i += 1
        elif ch in _BOND_ORDERS:
            if pending_order is not None or pending_aromatic:
                raise SmilesError(f"stacked bond symbols at position {i}")
            pending_order = _BOND_ORDERS[ch]
            i += 1
            continue
        elif ch == ":":
            if pending_order is not None:
                raise SmilesError(f"stacked bond symbols at position {i}")
            pending_aromatic = True
            i += 1
            continue
        elif ch in "/\\":
            pending_stereo = ch
            i += 1
            continue
        elif ch == "(":
            if prev is None:
                raise SmilesError(f"branch with no prior atom at position {i}")
            branch_stack.append(prev)
            i += 1
            continue
        elif ch == ")":
            if not branch_stack:
                raise SmilesError(f"unmatched ')' at position {i}")
            prev = branch_stack.pop()
            i += 1
            continue
        elif ch == ".":
            if pending_order is not None or pending_aromatic:
                raise SmilesError(f"bond before '.' at position {i}")
            prev = None
            i += 1
            continue
        elif ch.isdigit() or ch == "%":
            if ch == "%":
                if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                    raise SmilesError(f"malformed %nn ring closure at position {i}")
                number = int(text[i + 1 : i + 3])
                i += 3
            else:
                number = int(ch)
                i += 1
            if prev is None:
                raise SmilesError(f"ring closure with no prior atom at position {i}")
            if number in ring_open:
                j, open_order, open_arom, open_pos = ring_open.pop(number)
                order = pending_order if pending_order is not None else open_order
                if (open_order is not None and pending_order is not None
                        and open_order != pending_order):
                    raise SmilesError(
                        f"ring closure {number} bond symbols disagree "
                        f"(positions {open_pos} and {i})"
                    )
                add_bond(prev, j, order, pending_aromatic or open_arom, None, i)
            else:
                ring_open[number] = (prev, pending_order, pending_aromatic, i)
            pending_order = None
            pending_aromatic = False
            pending_stereo = None
            continue
        else:
            raise SmilesError(f"unexpected character '{ch}' at position {i}")

        # ch consumed an atom
        atoms.append(atom)
        idx = len(atoms) - 1
        if prev is not None:
            add_bond(prev, idx, pending_order, pending_aromatic, pending_stereo,
                     atom.position)
        pending_order = None
        pending_aromatic = False
        pending_stereo = None
        prev = idx

    if branch_stack:
        raise SmilesError("unclosed branch '('")
    if ring_open:
        raise SmilesError(f"unclosed ring closures {sorted(ring_open)}")
    if pending_order is not None or pending_aromatic:
        raise SmilesError("dangling bond symbol at end of input")

    # Implicit H on bare aromatic atoms: fill to the default valence minus
    # the one pi bond the kekulized form will carry.
    degree = {k: 0 for k in range(len(atoms))}
    for (a, b) in bonds:
        degree[a] += 1
        degree[b] += 1
    for k, atom in enumerate(atoms):
        if atom.bare and atom.aromatic:
            defval = elements.DEFAULT_VALENCES[atom.element][0]
            atom.hydrogens = max(0, defval - degree[k] - 1)

    node_list = [
        AtomNode(a.element, a.charge, a.hydrogens, a.map_number, a.aromatic,
                 a.stereo)
        for a in atoms
    ]
    bond_list = [
        Bond(a, b, order, aromatic=False, stereo=stereo)
        for (a, b), (order, stereo, _) in sorted(bonds.items())
    ]
    if aromatic_bond_keys:
        bond_list = kekulize(node_list, bond_list, aromatic_bond_keys)

    # Implicit H on bare non-aromatic atoms from the default valence list.
    order_sum = {k: 0 for k in range(len(node_list))}
    for bond in bond_list:
        order_sum[bond.a] += bond.order
        order_sum[bond.b] += bond.order
    for k, atom in enumerate(atoms):
        if atom.bare and not atom.aromatic:
            fills = [v - order_sum[k]
                     for v in elements.DEFAULT_VALENCES.get(atom.element, ())
                     if v >= order_sum[k]]
            if not fills:
                raise SmilesError(
                    f"{node_list[k].symbol} at position {atom.position} has bond "
                    f"order {order_sum[k]} exceeding its default valences"
                )
            node_list[k] = replace(node_list[k], hydrogens=fills[0])

    mol = Molecule(tuple(node_list), tuple(bond_list))
    mol.check_valences()
    mol = perceive_aromaticity(mol)
    mols = mol.split()
    _check_set_map_uniqueness(mols)
    return mols


def parse_single(text: str) -> Molecule:
    """Parse SMILES expected to contain exactly one molecule."""
    mols = parse_smiles(text)
    if len(mols) != 1:
        raise SmilesError(f"expected one molecule, got {len(mols)}: '{text}'")
    return mols[0]


def _check_set_map_uniqueness(mols: tuple[Molecule, ...]) -> None:
    seen: set[int] = set()
    for mol in mols:
        for atom in mol.atoms:
            if atom.map_number is None:
                continue
            if atom.map_number in seen:
                raise SmilesError(f"duplicate atom map {atom.map_number} in set")
            seen.add(atom.map_number)


# ---------------------------------------------------------------------------
# writer


def _implied_bare_hydrogens(mol: Molecule, i: int) -> int | None:
    """H count a bare token would get on re-parse, or None if not writable bare."""
    atom = mol.atoms[i]
    if atom.element not in elements.ORGANIC_SUBSET:
        return None
    if atom.charge != 0 or atom.map_number is not None:
        return None
    if atom.aromatic:
        if elements.symbol(atom.element).lower() not in _BARE_AROMATIC | {"se"}:
            return None
        if elements.symbol(atom.element) == "Se":
            return None  # bare 'se' not emitted; bracket it
        defval = elements.DEFAULT_VALENCES[atom.element][0]
        return max(0, defval - mol.degree(i) - 1)
    order_sum = mol.bond_order_sum(i)
    fills = [v - order_sum
             for v in elements.DEFAULT_VALENCES.get(atom.element, ())
             if v >= order_sum]
    return fills[0] if fills else None


def _atom_token(mol: Molecule, i: int) -> str:
    atom = mol.atoms[i]
    sym = atom.symbol
    if atom.aromatic:
        sym = sym.lower()
    if _implied_bare_hydrogens(mol, i) == atom.hydrogens:
        return sym
    h = "" if atom.hydrogens == 0 else ("H" if atom.hydrogens == 1 else f"H{atom.hydrogens}")
    if atom.charge == 0:
        q = ""
    elif abs(atom.charge) == 1:
        q = "+" if atom.charge > 0 else "-"
    else:
        q = f"{atom.charge:+d}"
    m = f":{atom.map_number}" if atom.map_number is not None else ""
    return f"[{sym}{h}{q}{m}]"


def _bond_token(mol: Molecule, bond) -> str:
    if bond.aromatic:
        return ""
    if bond.order == 1:
        both_aromatic = mol.atoms[bond.a].aromatic and mol.atoms[bond.b].aromatic
        return "-" if both_aromatic else ""
    return {2: "=", 3: "#"}[bond.order]


def _write_component(mol: Molecule, comp: tuple[int, ...], ranks: list[int]) -> str:
    start = min(comp, key=lambda i: ranks[i])
    visited: set[int] = set()
    closures: dict[tuple[int, int], int] = {}
    ring_digits_at: dict[int, list[tuple[int, int]]] = {i: [] for i in comp}
    counter = [0]

    # First pass: find back edges in canonical DFS order.
    def discover(i: int, parent: int) -> None:
        visited.add(i)
        for j, bond in sorted(mol.neighbors[i], key=lambda e: ranks[e[0]]):
            if j == parent:
                continue
            if j in visited:
                key = (min(i, j), max(i, j))
                if key not in closures:
                    counter[0] += 1
                    closures[key] = counter[0]
                    ring_digits_at[j].append((counter[0], i))
                    ring_digits_at[i].append((counter[0], j))
            else:
                discover(j, i)

    discover(start, -1)

    visited.clear()

    def digit_text(number: int) -> str:
        return str(number) if number < 10 else f"%{number:02d}"

    def emit(i: int, parent: int, incoming: str) -> str:
        visited.add(i)
        parts = [incoming, _atom_token(mol, i)]
        for number, j in sorted(ring_digits_at[i]):
            bond = mol.bond_between(i, j)
            # Bond symbol at the opening (first-emitted) endpoint only.
            if j not in visited:
                parts.append(_bond_token(mol, bond))
            parts.append(digit_text(number))
        children = [
            (j, bond)
            for j, bond in sorted(mol.neighbors[i], key=lambda e: ranks[e[0]])
            if j != parent and j not in visited
            and (min(i, j), max(i, j)) not in closures
        ]
        for k, (j, bond) in enumerate(children):
            text = emit(j, i, _bond_token(mol, bond))
            if k < len(children) - 1:
                parts.append(f"({text})")
            else:
                parts.append(text)
        return "".join(parts)

    return emit(start, -1, "")


def write_smiles(mol: Molecule) -> str:
    """Canonical SMILES; components joined by '.' in sorted order."""
    if not mol.atoms:
        raise MoleculeError("cannot write an empty molecule")
    ranks = canonical_rank(mol, use_maps=True)
    texts = [_write_component(mol, comp, ranks) for comp in mol.components]
    return ".".join(sorted(texts))


def write_molset(mols) -> str:
    """Canonical text of a molecule multiset (sorted fragment join)."""
    parts: list[str] = []
    for mol in mols:
        parts.extend(write_smiles(m) for m in mol.split())
    return ".".join(sorted(parts))


def strip_maps(mol: Molecule) -> Molecule:
    if all(a.map_number is None for a in mol.atoms):
        return mol
    atoms = tuple(replace(a, map_number=None) for a in mol.atoms)
    return Molecule(atoms, mol.bonds, name=mol.name)


def collapse_hydrogens(mol: Molecule) -> Molecule:
    """Fold plain explicit-H nodes into their heavy neighbor's H count.

    Only neutral, unmapped, single-bonded H atoms attached to one heavy
    atom are folded; bridging H, hydride, bare protons and mapped protons
    stay as nodes.
    """
    fold: dict[int, int] = {}
    for i, atom in enumerate(mol.atoms):
        if atom.element != 1 or atom.charge != 0 or atom.map_number is not None:
            continue
        if atom.hydrogens:
            continue
        if mol.degree(i) != 1:
            continue
        j, bond = mol.neighbors[i][0]
        if bond.order != 1 or mol.atoms[j].element == 1:
            continue
        fold[i] = j
    if not fold:
        return mol
    keep = [i for i in range(len(mol.atoms)) if i not in fold]
    index_map = {old: new for new, old in enumerate(keep)}
    extra: dict[int, int] = {}
    for h, heavy in fold.items():
        extra[heavy] = extra.get(heavy, 0) + 1
    atoms = tuple(
        replace(mol.atoms[i], hydrogens=mol.atoms[i].hydrogens + extra.get(i, 0))
        for i in keep
    )
    bonds = tuple(
        Bond(index_map[b.a], index_map[b.b], b.order, b.aromatic, b.stereo)
        for b in mol.bonds
        if b.a not in fold and b.b not in fold
    )
    return Molecule(atoms, bonds, name=mol.name)


def canonical_key(mols, keep_maps: bool = False) -> str:
    """Chemical-identity key for a molecule or molecule set.

    Strips atom maps and folds explicit hydrogens (unless keep_maps), so
    representation differences do not break dedup or target matching.
    """
    if isinstance(mols, Molecule):
        mols = (mols,)
    normalized = []
    for mol in mols:
        m = mol if keep_maps else collapse_hydrogens(strip_maps(mol))
        normalized.append(m)
    return write_molset(normalized)
