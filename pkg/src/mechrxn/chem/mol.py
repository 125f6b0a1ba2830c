"""Immutable molecular graph and formula types.

A Molecule is a simple graph of AtomNodes joined by order-1..3 bonds.
Hydrogens normally live as per-atom counts; they become explicit graph
nodes only when the input writes them that way (e.g. mapped protons in
elementary steps).  Molecules are frozen after construction and safe to
share across threads.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property

from mechrxn import elements


class MoleculeError(ValueError):
    """Structural problem in a molecular graph."""


class ValenceError(MoleculeError):
    """Atom environment inconsistent with the supported valence model."""


@dataclass(frozen=True)
class AtomNode:
    """One atom: element, formal charge, attached-H count, optional map."""

    element: int
    charge: int = 0
    hydrogens: int = 0
    map_number: int | None = None
    aromatic: bool = False
    stereo: str | None = None  # parsed annotation, ignored by equality/search

    def __post_init__(self):
        if not elements.is_supported(self.element):
            raise MoleculeError(f"unsupported element Z={self.element}")
        if self.hydrogens < 0:
            raise MoleculeError("negative hydrogen count")
        if self.map_number is not None and self.map_number <= 0:
            raise MoleculeError("atom map numbers must be positive")

    @property
    def symbol(self) -> str:
        return elements.symbol(self.element)


@dataclass(frozen=True)
class Bond:
    """Bond between atom indices a < b with integer order 1..3."""

    a: int
    b: int
    order: int = 1
    aromatic: bool = False
    stereo: str | None = None

    def __post_init__(self):
        if self.a == self.b:
            raise MoleculeError(f"self-bond on atom {self.a}")
        if self.a > self.b:
            lo, hi = self.b, self.a
            object.__setattr__(self, "a", lo)
            object.__setattr__(self, "b", hi)
        if self.order not in (1, 2, 3):
            raise MoleculeError(f"bond order {self.order} outside 1..3")

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


def _normalize_bond(bond: Bond) -> Bond:
    if bond.a < bond.b:
        return bond
    return replace(bond, a=bond.b, b=bond.a)


@dataclass(frozen=True)
class Molecule:
    """Connected (or not) molecular graph; immutable after construction."""

    atoms: tuple[AtomNode, ...]
    bonds: tuple[Bond, ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.atoms)
        seen: set[tuple[int, int]] = set()
        for bond in self.bonds:
            if not (0 <= bond.a < n and 0 <= bond.b < n):
                raise MoleculeError(f"bond ({bond.a},{bond.b}) references missing atom")
            key = (bond.a, bond.b)
            if key in seen:
                raise MoleculeError(f"duplicate bond ({bond.a},{bond.b})")
            seen.add(key)

    # -- derived structure ------------------------------------------------

    @cached_property
    def neighbors(self) -> tuple[tuple[tuple[int, Bond], ...], ...]:
        """Per-atom tuple of (neighbor index, bond)."""
        adj: list[list[tuple[int, Bond]]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            adj[bond.a].append((bond.b, bond))
            adj[bond.b].append((bond.a, bond))
        return tuple(tuple(entries) for entries in adj)

    @cached_property
    def _bond_lookup(self) -> dict[tuple[int, int], Bond]:
        return {(bond.a, bond.b): bond for bond in self.bonds}

    def bond_between(self, i: int, j: int) -> Bond | None:
        return self._bond_lookup.get((min(i, j), max(i, j)))

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    def bond_order_sum(self, i: int) -> int:
        return sum(bond.order for _, bond in self.neighbors[i])

    def total_hydrogens(self, i: int) -> int:
        """Attached hydrogens: stored count plus explicit H neighbors."""
        explicit = sum(1 for j, _ in self.neighbors[i] if self.atoms[j].element == 1)
        return self.atoms[i].hydrogens + explicit

    def lone_electrons(self, i: int) -> int:
        atom = self.atoms[i]
        return (
            elements.VALENCE_ELECTRONS[atom.element]
            - atom.charge
            - self.bond_order_sum(i)
            - atom.hydrogens
        )

    def lone_pairs(self, i: int) -> int:
        return max(0, self.lone_electrons(i)) // 2

    @cached_property
    def rings(self) -> tuple[frozenset[int], ...]:
        """Simple cycles up to length 7, as atom-index sets."""
        return _simple_cycles(self, max_size=7)

    @cached_property
    def ring_membership(self) -> tuple[int, ...]:
        """Smallest ring size containing each atom (0 = acyclic)."""
        smallest = [0] * len(self.atoms)
        for ring in self.rings:
            for i in ring:
                if smallest[i] == 0 or len(ring) < smallest[i]:
                    smallest[i] = len(ring)
        return tuple(smallest)

    # -- validation --------------------------------------------------------

    def check_valences(self) -> None:
        """Raise ValenceError unless all atoms fit the valence model."""
        for i, atom in enumerate(self.atoms):
            load = self.bond_order_sum(i) + atom.hydrogens
            if load > elements.max_bond_capacity(atom.element):
                raise ValenceError(
                    f"{atom.symbol} (atom {i}) carries bond order {load}, "
                    f"over capacity {elements.max_bond_capacity(atom.element)}"
                )
            lone = self.lone_electrons(i)
            if lone < 0:
                raise ValenceError(
                    f"{atom.symbol} (atom {i}) has negative lone-electron "
                    f"count {lone}: charge/valence mismatch"
                )
            if lone % 2 and atom.element not in elements.GROUP_12_METALS:
                raise ValenceError(
                    f"{atom.symbol} (atom {i}) has an unpaired electron; "
                    "radical species are out of scope"
                )
            if atom.element in elements.PERIOD_2 and 2 * load + lone > 8:
                raise ValenceError(
                    f"{atom.symbol} (atom {i}) exceeds the octet "
                    f"({load} bonds, {lone} lone electrons)"
                )

    def check_map_uniqueness(self) -> None:
        maps = [a.map_number for a in self.atoms if a.map_number is not None]
        dupes = [m for m, c in Counter(maps).items() if c > 1]
        if dupes:
            raise MoleculeError(f"duplicate atom map numbers {sorted(dupes)}")

    # -- derived pieces ----------------------------------------------------

    @cached_property
    def components(self) -> tuple[tuple[int, ...], ...]:
        """Connected components as sorted atom-index tuples."""
        seen: set[int] = set()
        comps: list[tuple[int, ...]] = []
        for start in range(len(self.atoms)):
            if start in seen:
                continue
            stack, comp = [start], []
            seen.add(start)
            while stack:
                i = stack.pop()
                comp.append(i)
                for j, _ in self.neighbors[i]:
                    if j not in seen:
                        seen.add(j)
                        stack.append(j)
            comps.append(tuple(sorted(comp)))
        return tuple(comps)

    def subgraph(self, atom_indices: tuple[int, ...]) -> "Molecule":
        """Induced subgraph with atoms renumbered in the given order."""
        index_map = {old: new for new, old in enumerate(atom_indices)}
        keep = set(atom_indices)
        atoms = tuple(self.atoms[i] for i in atom_indices)
        bonds = tuple(
            _normalize_bond(replace(b, a=index_map[b.a], b=index_map[b.b]))
            for b in self.bonds
            if b.a in keep and b.b in keep
        )
        return Molecule(atoms, bonds, name=self.name)

    def split(self) -> tuple["Molecule", ...]:
        if len(self.components) == 1:
            return (self,)
        return tuple(self.subgraph(comp) for comp in self.components)

    def permuted(self, order: list[int]) -> "Molecule":
        """Same graph with atoms re-indexed: new index i holds old order[i]."""
        index_map = {old: new for new, old in enumerate(order)}
        atoms = tuple(self.atoms[i] for i in order)
        bonds = tuple(
            _normalize_bond(replace(b, a=index_map[b.a], b=index_map[b.b]))
            for b in self.bonds
        )
        return Molecule(atoms, bonds, name=self.name)

    def atom_by_map(self, map_number: int) -> int | None:
        for i, atom in enumerate(self.atoms):
            if atom.map_number == map_number:
                return i
        return None


def _simple_cycles(mol: Molecule, max_size: int) -> tuple[frozenset[int], ...]:
    """All simple cycles up to max_size atoms, deduplicated by atom set."""
    cycles: set[frozenset[int]] = set()
    n = len(mol.atoms)
    for start in range(n):
        # DFS paths beginning at start, only visiting atoms >= start so each
        # cycle is found from its lowest-index member.
        stack: list[tuple[int, list[int]]] = [(start, [start])]
        while stack:
            current, path = stack.pop()
            for j, _ in mol.neighbors[current]:
                if j == start and len(path) >= 3:
                    cycles.add(frozenset(path))
                elif j > start and j not in path and len(path) < max_size:
                    stack.append((j, path + [j]))
    return tuple(sorted(cycles, key=lambda c: (len(c), sorted(c))))


@dataclass(frozen=True)
class Formula:
    """Element counts plus net charge, rendered in Hill order."""

    counts: tuple[tuple[int, int], ...]  # (atomic number, count), count > 0
    net_charge: int = 0

    @classmethod
    def from_counts(cls, counts: dict[int, int], net_charge: int = 0) -> "Formula":
        kept = tuple(sorted((z, c) for z, c in counts.items() if c != 0))
        if any(c < 0 for _, c in kept):
            raise MoleculeError("formula counts must be positive")
        return cls(kept, net_charge)

    def as_dict(self) -> dict[int, int]:
        return dict(self.counts)

    def __add__(self, other: "Formula") -> "Formula":
        merged = Counter(dict(self.counts))
        merged.update(dict(other.counts))
        return Formula.from_counts(dict(merged), self.net_charge + other.net_charge)

    def hill(self) -> str:
        """Hill order: C, H, then remaining symbols alphabetically."""
        counts = self.as_dict()
        parts: list[str] = []

        def emit(z: int) -> None:
            c = counts.pop(z, 0)
            if c:
                parts.append(elements.symbol(z) + (str(c) if c > 1 else ""))

        if 6 in counts:
            emit(6)
            emit(1)
        rest = sorted(counts, key=elements.symbol)
        for z in rest:
            emit(z)
        return "".join(parts)

    def __str__(self) -> str:
        return self.hill()


def molecular_formula(molset) -> Formula:
    """Aggregate formula of a molecule or sequence of molecules."""
    if isinstance(molset, Molecule):
        molset = (molset,)
    counts: Counter[int] = Counter()
    charge = 0
    for mol in molset:
        for atom in mol.atoms:
            counts[atom.element] += 1
            counts[1] += atom.hydrogens
            charge += atom.charge
    return Formula.from_counts(dict(counts), charge)
