"""Elementary steps: arrow specs, electron-pushing application, balance.

A step is one source/sink orbital interaction.  The source donates an
electron pair (lone pair, pi bond, or sigma bond); the sink accepts it
(empty orbital, pi antibond, or sigma antibond).  Application is pure
bookkeeping: bonds shift, charges follow the electrons, and conservation
holds by construction.

Arrow code grammar (one pair per step):

    source '>' sink
    source = ('LP'|'PI'|'SB') ':' map ['-' map]
    sink   = ('EO'|'PS'|'SS') ':' map ['-' map]

The second map is the far end of a bond orbital and is required exactly
for the bond kinds (PI, SB, PS, SS).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from mechrxn import elements
from mechrxn.chem.aromatic import perceive_aromaticity
from mechrxn.chem.mol import Bond, Formula, Molecule, molecular_formula
from mechrxn.chem.smiles import canonical_key, parse_smiles, write_molset

SOURCE_KINDS = ("lone_pair", "pi_bond", "sigma_bond")
SINK_KINDS = ("empty_orbital", "pi_star", "sigma_star")

_KIND_CODES = {
    "lone_pair": "LP",
    "pi_bond": "PI",
    "sigma_bond": "SB",
    "empty_orbital": "EO",
    "pi_star": "PS",
    "sigma_star": "SS",
}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}

_BOND_KINDS = {"pi_bond", "sigma_bond", "pi_star", "sigma_star"}


class StepError(ValueError):
    """Malformed step record or arrow specification."""


class ArrowError(StepError):
    """Arrow cannot be applied to the given reactants."""


@dataclass(frozen=True)
class OrbitalRef:
    """One orbital: kind plus primary atom map (and far atom for bonds)."""

    kind: str
    primary_atom: int
    secondary_atom: int | None = None

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS and self.kind not in SINK_KINDS:
            raise StepError(f"unknown orbital kind '{self.kind}'")
        needs_bond = self.kind in _BOND_KINDS
        if needs_bond and self.secondary_atom is None:
            raise StepError(f"{self.kind} orbital needs a far atom")
        if not needs_bond and self.secondary_atom is not None:
            raise StepError(f"{self.kind} orbital takes no far atom")

    def code(self) -> str:
        text = f"{_KIND_CODES[self.kind]}:{self.primary_atom}"
        if self.secondary_atom is not None:
            text += f"-{self.secondary_atom}"
        return text


@dataclass(frozen=True)
class ArrowSpec:
    """Source and sink orbital of one electron-pair arrow."""

    source: OrbitalRef
    sink: OrbitalRef

    def __post_init__(self):
        if self.source.kind not in SOURCE_KINDS:
            raise StepError(f"'{self.source.kind}' is not a source kind")
        if self.sink.kind not in SINK_KINDS:
            raise StepError(f"'{self.sink.kind}' is not a sink kind")

    def code(self) -> str:
        return f"{self.source.code()}>{self.sink.code()}"


_ARROW_RE = re.compile(
    r"^\s*(LP|PI|SB):(\d+)(?:-(\d+))?\s*>\s*(EO|PS|SS):(\d+)(?:-(\d+))?\s*$"
)


def parse_arrow_code(text: str) -> ArrowSpec:
    m = _ARROW_RE.match(text)
    if m is None:
        raise StepError(f"malformed arrow code '{text}'")
    src_kind, src_a, src_b, snk_kind, snk_a, snk_b = m.groups()
    source = OrbitalRef(
        _CODE_KINDS[src_kind], int(src_a), int(src_b) if src_b else None
    )
    sink = OrbitalRef(
        _CODE_KINDS[snk_kind], int(snk_a), int(snk_b) if snk_b else None
    )
    return ArrowSpec(source, sink)


@dataclass(frozen=True)
class BalanceReport:
    """Element-wise and charge deltas between products and reactants."""

    element_delta: tuple[tuple[int, int], ...]
    charge_delta: int

    @property
    def verdict(self) -> str:
        ok = not self.element_delta and self.charge_delta == 0
        return "balanced" if ok else "unbalanced"

    @property
    def balanced(self) -> bool:
        return self.verdict == "balanced"

    def describe(self) -> str:
        if self.balanced:
            return "balanced"
        parts = [
            f"{elements.symbol(z)}{delta:+d}" for z, delta in self.element_delta
        ]
        if self.charge_delta:
            parts.append(f"charge{self.charge_delta:+d}")
        return "unbalanced: " + " ".join(parts)


def check_balance(reactants, products) -> BalanceReport:
    """Pure element/charge bookkeeping between two molecule sets."""
    fr = molecular_formula(reactants)
    fp = molecular_formula(products)
    rc, pc = fr.as_dict(), fp.as_dict()
    delta = {z: pc.get(z, 0) - rc.get(z, 0) for z in set(rc) | set(pc)}
    element_delta = tuple(sorted((z, d) for z, d in delta.items() if d != 0))
    return BalanceReport(element_delta, fp.net_charge - fr.net_charge)


@dataclass(frozen=True)
class ElementaryStep:
    """Reactants, products, optional arrow, and bookkeeping metadata."""

    reactants: tuple[Molecule, ...]
    products: tuple[Molecule, ...] | None = None
    arrow: ArrowSpec | None = None
    score: float | None = None
    provenance: str = "unknown"
    balance: BalanceReport | None = field(default=None)
    rate: float | None = None
    rate_model: str | None = None
    arrow_consistent: bool | None = None

    def __post_init__(self):
        if self.products is not None and self.balance is None:
            object.__setattr__(
                self, "balance", check_balance(self.reactants, self.products)
            )

    def reaction_smiles(self) -> str:
        left = write_molset(self.reactants)
        right = write_molset(self.products) if self.products is not None else ""
        return f"{left}>>{right}"

    def key(self) -> str:
        """Canonical dedup key: structural reaction text plus arrow code."""
        left = canonical_key(self.reactants)
        right = canonical_key(self.products) if self.products is not None else ""
        arrow = self.arrow.code() if self.arrow is not None else ""
        return f"{left}>>{right}|{arrow}"


# ---------------------------------------------------------------------------
# arrow application


class _WorkGraph:
    """Mutable disjoint union of the reactant molecules."""

    def __init__(self, mols: tuple[Molecule, ...]):
        self.atoms: list = []
        self.orders: dict[tuple[int, int], int] = {}
        self.by_map: dict[int, int] = {}
        for mol in mols:
            offset = len(self.atoms)
            for i, atom in enumerate(mol.atoms):
                self.atoms.append(atom)
                if atom.map_number is not None:
                    if atom.map_number in self.by_map:
                        raise ArrowError(
                            f"atom map {atom.map_number} occurs twice in reactants"
                        )
                    self.by_map[atom.map_number] = offset + i
            for b in mol.bonds:
                self.orders[(offset + b.a, offset + b.b)] = b.order

    def resolve(self, map_number: int) -> int:
        try:
            return self.by_map[map_number]
        except KeyError:
            raise ArrowError(f"atom map {map_number} not found in reactants") from None

    def order(self, i: int, j: int) -> int:
        return self.orders.get((min(i, j), max(i, j)), 0)

    def shift_order(self, i: int, j: int, delta: int) -> None:
        key = (min(i, j), max(i, j))
        new = self.orders.get(key, 0) + delta
        if new < 0:
            raise ArrowError("bond order below zero")
        if new > 3:
            raise ArrowError("bond order above triple")
        if new == 0:
            self.orders.pop(key, None)
        else:
            self.orders[key] = new

    def shift_charge(self, i: int, delta: int) -> None:
        self.atoms[i] = replace(self.atoms[i], charge=self.atoms[i].charge + delta)

    def bond_order_sum(self, i: int) -> int:
        return sum(
            order for (a, b), order in self.orders.items() if i in (a, b)
        ) + self.atoms[i].hydrogens

    def lone_electrons(self, i: int) -> int:
        atom = self.atoms[i]
        return (
            elements.VALENCE_ELECTRONS[atom.element]
            - atom.charge
            - self.bond_order_sum(i)
        )

    def to_molecule(self) -> Molecule:
        bonds = tuple(
            Bond(a, b, order) for (a, b), order in sorted(self.orders.items())
        )
        atoms = tuple(replace(a, aromatic=False) for a in self.atoms)
        return Molecule(atoms, bonds)


def apply_arrow(reactants: tuple[Molecule, ...], arrow: ArrowSpec) -> tuple[Molecule, ...]:
    """Push one electron pair and return the product molecule set.

    Raises ArrowError when the orbitals do not exist, the sink cannot
    accept, or the resulting structure violates the valence model.
    """
    graph = _WorkGraph(reactants)
    src, snk = arrow.source, arrow.sink
    s = graph.resolve(src.primary_atom)
    t = graph.resolve(snk.primary_atom)
    if s == t:
        raise ArrowError("source and sink primary atoms coincide: no net change")

    s_far = graph.resolve(src.secondary_atom) if src.secondary_atom is not None else None
    t_far = graph.resolve(snk.secondary_atom) if snk.secondary_atom is not None else None

    if s_far is not None and t_far is not None:
        if {s, s_far} == {t, t_far}:
            raise ArrowError("source and sink reference the same bond")

    # source occupancy
    if src.kind == "lone_pair":
        if graph.lone_electrons(s) < 2:
            raise ArrowError(
                f"atom map {src.primary_atom} has no lone pair to donate"
            )
    elif src.kind == "pi_bond":
        if graph.order(s, s_far) < 2:
            raise ArrowError("pi source requires a bond of order >= 2")
    else:  # sigma_bond
        if graph.order(s, s_far) != 1:
            raise ArrowError("sigma source requires a single bond")

    # sink accessibility
    if snk.kind == "empty_orbital":
        atom = graph.atoms[t]
        load = graph.bond_order_sum(t)
        if graph.lone_electrons(t) != 0 or load >= elements.max_bond_capacity(atom.element):
            raise ArrowError(
                f"atom map {snk.primary_atom} has no empty orbital to accept"
            )
    elif snk.kind == "pi_star":
        if graph.order(t, t_far) < 2:
            raise ArrowError("pi* sink requires a bond of order >= 2")
    else:  # sigma_star
        if graph.order(t, t_far) != 1:
            raise ArrowError("sigma* sink requires a single bond")

    # move the electrons
    if src.kind == "lone_pair":
        graph.shift_charge(s, +1)
    else:
        graph.shift_order(s, s_far, -1)
        graph.shift_charge(s_far, +1)

    graph.shift_order(s, t, +1)

    if snk.kind == "empty_orbital":
        graph.shift_charge(t, -1)
    else:
        graph.shift_order(t, t_far, -1)
        graph.shift_charge(t_far, -1)

    combined = graph.to_molecule()
    try:
        combined.check_valences()
    except Exception as exc:
        raise ArrowError(f"product violates the valence model: {exc}") from exc
    combined = perceive_aromaticity(combined)
    return combined.split()


def extract_labels(step: ElementaryStep) -> tuple[int, int]:
    """(source atom map, sink atom map) for classifier training."""
    if step.arrow is None:
        raise StepError("step has no arrow to label")
    return step.arrow.source.primary_atom, step.arrow.sink.primary_atom


# ---------------------------------------------------------------------------
# step record line format: <reaction-smiles> '|' <arrow-code> ['|' extras]


def parse_step_record(text: str, provenance: str = "record") -> ElementaryStep:
    parts = [p.strip() for p in text.strip().split("|")]
    if not parts or not parts[0]:
        raise StepError("empty step record")
    reaction = parts[0]
    if ">>" not in reaction:
        raise StepError(f"reaction SMILES needs '>>': '{reaction}'")
    left, right = reaction.split(">>", 1)
    reactants = parse_smiles(left)
    products = parse_smiles(right) if right.strip() else None

    arrow = None
    if len(parts) > 1 and parts[1]:
        arrow = parse_arrow_code(parts[1])

    score = rate = None
    rate_model = None
    if len(parts) > 2 and parts[2]:
        extras = parts[2]
        try:
            score = float(extras)
        except ValueError:
            for token in extras.split():
                if "=" not in token:
                    raise StepError(f"bad metadata token '{token}'")
                key, value = token.split("=", 1)
                if key == "score":
                    score = float(value)
                elif key == "k":
                    rate = float(value)
                elif key == "model":
                    rate_model = value
                else:
                    raise StepError(f"unknown metadata key '{key}'")

    arrow_consistent = None
    if arrow is not None and products is not None:
        try:
            applied = apply_arrow(reactants, arrow)
            arrow_consistent = canonical_key(applied) == canonical_key(products)
        except ArrowError:
            arrow_consistent = False

    return ElementaryStep(
        reactants=reactants,
        products=products,
        arrow=arrow,
        score=score,
        provenance=provenance,
        rate=rate,
        rate_model=rate_model,
        arrow_consistent=arrow_consistent,
    )


def format_step_record(step: ElementaryStep) -> str:
    parts = [step.reaction_smiles()]
    parts.append(step.arrow.code() if step.arrow is not None else "")
    extras = []
    if step.score is not None:
        extras.append(f"score={step.score!r}")
    if step.rate is not None:
        extras.append(f"k={step.rate!r}")
    if step.rate_model is not None:
        extras.append(f"model={step.rate_model}")
    if extras:
        parts.append(" ".join(extras))
    while parts and parts[-1] == "":
        parts.pop()
    return " | ".join(parts)
