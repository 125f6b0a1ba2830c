"""Reactive-site prediction, mechanism enumeration, and ranking.

The pipeline: dedicated source/sink classifiers score every atom of the
reactants; the top sites pair up; each pair expands into the orbital
interactions its local structure allows; arrow application derives the
products; the shared-weight ranker orders the surviving candidates.

Orbital legality matrix (primary atom = attacked/donating atom):

  source lone_pair    atom with >= 1 lone pair
  source pi_bond      each bond of order >= 2 at the atom (atom keeps
                      the pair; far end goes electron-poor)
  source sigma_bond   each single bond at the atom (atom migrates with
                      the pair)
  sink empty_orbital  no lone electrons and spare bonding capacity
  sink sigma_star     each single bond at the atom (far end leaves with
                      the pair)
  sink pi_star        each bond of order >= 2 at the atom

Enumeration references explicit graph atoms only: a proton can be
attacked only when it is written as an explicit (mapped) hydrogen.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from mechrxn import elements
from mechrxn.chem.canon import canonical_rank
from mechrxn.chem.mol import Molecule
from mechrxn.chem.smiles import canonical_key
from mechrxn.featurize import atom_fingerprint, reaction_fingerprint
from mechrxn.nn import TrainedModel, sigmoid
from mechrxn.reaction import (
    ArrowError,
    ArrowSpec,
    ElementaryStep,
    OrbitalRef,
    apply_arrow,
    extract_labels,
)

log = logging.getLogger(__name__)

DEFAULT_CANDIDATE_CAP = 5000


@dataclass(frozen=True)
class ReactiveSitePrediction:
    molecule_index: int
    atom_index: int
    map_number: int
    role: str  # "source" | "sink"
    probability: float


@dataclass(frozen=True)
class MechanismCandidate:
    step: ElementaryStep
    score: float | None = None
    source_probability: float | None = None
    sink_probability: float | None = None

    def key(self) -> str:
        return (
            canonical_key(self.step.products) + "|" + self.step.arrow.code()
        )


@dataclass
class TwoStepModels:
    source: TrainedModel
    sink: TrainedModel
    ranker: TrainedModel

    def save_dir(self, directory) -> None:
        from pathlib import Path

        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.source.save(directory / "source.bin")
        self.sink.save(directory / "sink.bin")
        self.ranker.save(directory / "ranker.bin")

    @classmethod
    def load_dir(cls, directory) -> "TwoStepModels":
        from pathlib import Path

        directory = Path(directory)
        return cls(
            source=TrainedModel.load(directory / "source.bin"),
            sink=TrainedModel.load(directory / "sink.bin"),
            ranker=TrainedModel.load(directory / "ranker.bin"),
        )


_PROTIC_ELEMENTS = {7, 8, 16, 34, 9, 17, 35, 53, 15}


def materialize_protons(
    reactants: tuple[Molecule, ...], include_carbon: bool = False
) -> tuple[Molecule, ...]:
    """Convert one implicit hydrogen per protic atom into a graph node.

    Enumeration only sees explicit atoms, so abstractable protons must be
    nodes.  Heteroatom-bound hydrogens are materialized by default (one
    per site is enough: siblings are equivalent); include_carbon extends
    this to C-H bonds for carbon-acid chemistry.
    """
    from mechrxn.chem.mol import AtomNode, Bond

    out = []
    for mol in reactants:
        atoms = list(mol.atoms)
        bonds = list(mol.bonds)
        changed = False
        for i, atom in enumerate(list(atoms)):
            wanted = atom.element in _PROTIC_ELEMENTS or (
                include_carbon and atom.element == 6
            )
            if not wanted or atom.hydrogens < 1:
                continue
            has_explicit = any(
                mol.atoms[j].element == 1 for j, _ in mol.neighbors[i]
            )
            if has_explicit:
                continue
            atoms[i] = replace(atoms[i], hydrogens=atoms[i].hydrogens - 1)
            bonds.append(Bond(i, len(atoms), 1))
            atoms.append(AtomNode(element=1))
            changed = True
        out.append(
            Molecule(tuple(atoms), tuple(bonds), name=mol.name) if changed else mol
        )
    return tuple(out)


def ensure_maps(reactants: tuple[Molecule, ...]) -> tuple[Molecule, ...]:
    """Assign map numbers to unmapped atoms, deterministically by
    canonical order, without touching existing maps."""
    used = {
        a.map_number
        for mol in reactants
        for a in mol.atoms
        if a.map_number is not None
    }
    if all(a.map_number is not None for mol in reactants for a in mol.atoms):
        return reactants
    next_map = max(used, default=0) + 1
    out = []
    for mol in reactants:
        ranks = canonical_rank(mol)
        order = sorted(range(len(mol.atoms)), key=lambda i: ranks[i])
        atoms = list(mol.atoms)
        for i in order:
            if atoms[i].map_number is None:
                atoms[i] = replace(atoms[i], map_number=next_map)
                next_map += 1
        out.append(Molecule(tuple(atoms), mol.bonds, name=mol.name))
    return tuple(out)


def predict_sites(
    reactants: tuple[Molecule, ...],
    role: str,
    k: int,
    model: TrainedModel,
) -> list[ReactiveSitePrediction]:
    """Top-k atoms by classifier probability; ties break on canonical rank."""
    if role not in ("source", "sink"):
        raise ValueError("role must be 'source' or 'sink'")
    if k < 1:
        raise ValueError("k must be >= 1")
    reactants = ensure_maps(reactants)
    rows = []
    feats = []
    for m_idx, mol in enumerate(reactants):
        ranks = canonical_rank(mol)
        for a_idx in range(len(mol.atoms)):
            feats.append(atom_fingerprint(mol, a_idx))
            rows.append((m_idx, a_idx, mol.atoms[a_idx].map_number, ranks[a_idx]))
    if not rows:
        return []
    probs = sigmoid(model.forward(np.stack(feats)))
    order = sorted(
        range(len(rows)),
        key=lambda i: (-probs[i], rows[i][0], rows[i][3]),
    )
    return [
        ReactiveSitePrediction(
            molecule_index=rows[i][0],
            atom_index=rows[i][1],
            map_number=rows[i][2],
            role=role,
            probability=float(probs[i]),
        )
        for i in order[:k]
    ]


def _source_orbitals(mol: Molecule, i: int) -> list[OrbitalRef]:
    out = []
    atom_map = mol.atoms[i].map_number
    if mol.lone_pairs(i) >= 1:
        out.append(OrbitalRef("lone_pair", atom_map))
    for j, bond in mol.neighbors[i]:
        far_map = mol.atoms[j].map_number
        if bond.order >= 2:
            out.append(OrbitalRef("pi_bond", atom_map, far_map))
        elif bond.order == 1:
            out.append(OrbitalRef("sigma_bond", atom_map, far_map))
    return out


def _sink_orbitals(mol: Molecule, i: int) -> list[OrbitalRef]:
    out = []
    atom = mol.atoms[i]
    atom_map = atom.map_number
    load = mol.bond_order_sum(i) + atom.hydrogens
    if mol.lone_electrons(i) == 0 and load < elements.max_bond_capacity(atom.element):
        out.append(OrbitalRef("empty_orbital", atom_map))
    for j, bond in mol.neighbors[i]:
        far_map = mol.atoms[j].map_number
        if bond.order >= 2:
            out.append(OrbitalRef("pi_star", atom_map, far_map))
        elif bond.order == 1:
            out.append(OrbitalRef("sigma_star", atom_map, far_map))
    return out


def _as_site(reactants, site) -> tuple[int, int, float | None]:
    if isinstance(site, ReactiveSitePrediction):
        return site.molecule_index, site.atom_index, site.probability
    m_idx, a_idx = site
    return m_idx, a_idx, None


def enumerate_mechanisms(
    reactants: tuple[Molecule, ...],
    sources,
    sinks,
    cap: int = DEFAULT_CANDIDATE_CAP,
) -> list[MechanismCandidate]:
    """All legal orbital pairings of the given source and sink atoms.

    Sites may be ReactiveSitePrediction objects or (molecule_index,
    atom_index) pairs.  Candidates are deduplicated on canonical product
    set plus arrow; overflow past the cap keeps the best site-probability
    products and logs the excess.
    """
    reactants = ensure_maps(reactants)
    seen: set[str] = set()
    candidates: list[MechanismCandidate] = []
    for source in sources:
        sm_idx, sa_idx, s_prob = _as_site(reactants, source)
        source_mol = reactants[sm_idx]
        source_orbs = _source_orbitals(source_mol, sa_idx)
        for sink in sinks:
            tm_idx, ta_idx, t_prob = _as_site(reactants, sink)
            if (sm_idx, sa_idx) == (tm_idx, ta_idx):
                continue
            sink_orbs = _sink_orbitals(reactants[tm_idx], ta_idx)
            for s_orb in source_orbs:
                for t_orb in sink_orbs:
                    arrow = ArrowSpec(s_orb, t_orb)
                    try:
                        products = apply_arrow(reactants, arrow)
                    except ArrowError:
                        continue
                    step = ElementaryStep(
                        reactants=reactants,
                        products=products,
                        arrow=arrow,
                        provenance="twostep",
                    )
                    if not step.balance.balanced:
                        continue
                    candidate = MechanismCandidate(
                        step=step,
                        source_probability=s_prob,
                        sink_probability=t_prob,
                    )
                    key = candidate.key()
                    if key in seen:
                        continue
                    seen.add(key)
                    candidates.append(candidate)
    if len(candidates) > cap:
        log.warning(
            "candidate overflow: %d mechanisms, keeping %d by site probability",
            len(candidates),
            cap,
        )
        candidates.sort(
            key=lambda c: (
                -((c.source_probability or 1.0) * (c.sink_probability or 1.0)),
                c.key(),
            )
        )
        candidates = candidates[:cap]
    return candidates


def rank_mechanisms(
    candidates: list[MechanismCandidate], ranker: TrainedModel
) -> list[MechanismCandidate]:
    """Sort by ranker score, descending; ties break on product text."""
    if not candidates:
        return []
    feats = np.stack([reaction_fingerprint(c.step) for c in candidates])
    scores = ranker.forward(feats)
    scored = [
        replace(
            c,
            score=float(s),
            step=replace(c.step, score=float(s)),
        )
        for c, s in zip(candidates, scores)
    ]
    scored.sort(key=lambda c: (-c.score, c.key()))
    return scored


def two_step_predict(
    reactants: tuple[Molecule, ...],
    models: TwoStepModels,
    k_sites: int = 10,
    k_out: int = 10,
    cap: int = DEFAULT_CANDIDATE_CAP,
) -> list[MechanismCandidate]:
    """Full pipeline: site prediction, enumeration, ranking, truncation."""
    if k_out == 0:
        return []
    reactants = ensure_maps(reactants)
    sources = predict_sites(reactants, "source", k_sites, models.source)
    sinks = predict_sites(reactants, "sink", k_sites, models.sink)
    candidates = enumerate_mechanisms(reactants, sources, sinks, cap=cap)
    if not candidates:
        log.info(
            "no legal mechanisms for %s", canonical_key(reactants)
        )
        return []
    return rank_mechanisms(candidates, models.ranker)[:k_out]


def eval_reactive_sites(
    steps,
    source_model: TrainedModel,
    sink_model: TrainedModel,
    ns: tuple[int, ...] = (1, 3, 5, 10),
) -> dict[int, float]:
    """Top-N joint accuracy: both true atoms inside each model's top N."""
    ns = tuple(sorted(ns))
    hits = {n: 0 for n in ns}
    total = 0
    for step in steps:
        if step.arrow is None:
            continue
        total += 1
        src_map, snk_map = extract_labels(step)
        n_atoms = sum(len(m.atoms) for m in step.reactants)
        k = min(max(ns), n_atoms)
        src_preds = predict_sites(step.reactants, "source", k, source_model)
        snk_preds = predict_sites(step.reactants, "sink", k, sink_model)
        src_rank = next(
            (i for i, p in enumerate(src_preds) if p.map_number == src_map), None
        )
        snk_rank = next(
            (i for i, p in enumerate(snk_preds) if p.map_number == snk_map), None
        )
        for n in ns:
            if (
                src_rank is not None
                and snk_rank is not None
                and src_rank < n
                and snk_rank < n
            ):
                hits[n] += 1
    if total == 0:
        return {n: 0.0 for n in ns}
    return {n: 100.0 * hits[n] / total for n in ns}


# ---------------------------------------------------------------------------
# training helpers


def build_site_training(steps, role: str):
    """(fingerprint, 0/1) pairs labeling the arrow's source or sink atom."""
    xs, y_source, y_sink = build_site_training_both(steps)
    return xs, (y_source if role == "source" else y_sink)


def build_site_training_both(steps):
    """Fingerprints plus source and sink label vectors in one pass."""
    xs, y_source, y_sink = [], [], []
    for step in steps:
        if step.arrow is None:
            continue
        src_map, snk_map = extract_labels(step)
        for mol in step.reactants:
            for i, atom in enumerate(mol.atoms):
                xs.append(atom_fingerprint(mol, i))
                y_source.append(1.0 if atom.map_number == src_map else 0.0)
                y_sink.append(1.0 if atom.map_number == snk_map else 0.0)
    return xs, y_source, y_sink


def train_two_step(
    train_steps,
    site_config: "MlpConfig | None" = None,
    ranker_config: "MlpConfig | None" = None,
    max_site_steps: int = 2000,
    max_ranker_steps: int = 800,
    k_sites: int = 4,
    max_decoys_per_step: int = 4,
) -> TwoStepModels:
    """Train source/sink classifiers then the ranker on arrowed steps.

    Defaults are the desk-scale profiles; the full-size layer stacks live
    in mechrxn.nn as CLASSIFIER_PROFILE_* and RANKER_PROFILE.
    """
    from mechrxn.nn import MlpConfig, train_classifier, train_siamese

    site_config = site_config or MlpConfig(
        layer_dims=(6487, 128, 64, 1), activation="relu", dropout=0.1,
        l2=1e-5, epochs=4, learning_rate=1e-3, batch_size=256, seed=1,
        class_weight="balanced",
    )
    ranker_config = ranker_config or MlpConfig(
        layer_dims=(15022, 120, 1), activation="tanh", dropout=0.2,
        epochs=6, learning_rate=1e-3, batch_size=100, seed=2,
    )
    steps = [s for s in train_steps if s.arrow is not None]
    xs, y_source, y_sink = build_site_training_both(steps[:max_site_steps])
    matrix = np.stack(xs)
    source = train_classifier(zip(matrix, y_source), site_config)
    sink = train_classifier(zip(matrix, y_sink), site_config)
    pairs = build_ranker_pairs(
        steps[:max_ranker_steps], source, sink,
        k_sites=k_sites, max_decoys_per_step=max_decoys_per_step,
    )
    ranker = train_siamese(pairs, ranker_config)
    return TwoStepModels(source=source, sink=sink, ranker=ranker)


def build_ranker_pairs(
    steps,
    models_source: TrainedModel,
    models_sink: TrainedModel,
    k_sites: int = 4,
    max_decoys_per_step: int = 4,
):
    """(true fingerprint, decoy fingerprint) pairs for the ranker.

    Decoys are same-reactant enumerated mechanisms whose products differ
    from the curated products, drawn from the predicted top sites so the
    training distribution matches deployment.
    """
    pairs = []
    for step in steps:
        if step.arrow is None or step.products is None:
            continue
        true_fp = reaction_fingerprint(step)
        truth = canonical_key(step.products)
        sources = predict_sites(step.reactants, "source", k_sites, models_source)
        sinks = predict_sites(step.reactants, "sink", k_sites, models_sink)
        decoys = [
            c
            for c in enumerate_mechanisms(step.reactants, sources, sinks)
            if canonical_key(c.step.products) != truth
        ]
        for decoy in decoys[:max_decoys_per_step]:
            pairs.append((true_fp, reaction_fingerprint(decoy.step)))
    return pairs
