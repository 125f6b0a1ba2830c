"""Proton-transfer generation vs an independent brute-force oracle."""

import math

import pytest

from mechrxn.chem import canonical_key, parse_single, parse_smiles
from mechrxn.ptgen import (
    AcidRecord,
    BaseRecord,
    GenerateConfig,
    InventoryError,
    bernasconi_rate,
    eigen_rate,
    generate,
    load_inventory,
    sample_for_training,
)
from mechrxn.reaction import apply_arrow, parse_arrow_code


class TestEigenRate:
    def test_boundary_diffusion_limit(self):
        assert eigen_rate(5.0, 5.0).k == 1e10

    def test_favorable_stays_at_diffusion_limit(self):
        assert eigen_rate(3.0, 10.0).k == 1e10

    def test_hand_evaluated_unfavorable(self):
        # dpKa = 5: k = 1e5, passes the heteroatom cutoff
        assert eigen_rate(10.0, 5.0).k == pytest.approx(1e5)
        # dpKa = 7.5: ~3.16e2, excluded under the heteroatom cutoff
        k = eigen_rate(10.0, 2.5).k
        assert k == pytest.approx(10 ** 2.5)
        assert k < 1e3

    def test_monotone_nonincreasing_and_continuous_at_zero(self):
        ks = [eigen_rate(d, 0.0).k for d in (-2.0, -0.5, 0.0, 0.5, 2.0, 8.0)]
        assert all(a >= b for a, b in zip(ks, ks[1:]))
        assert eigen_rate(1e-9, 0.0).k == pytest.approx(1e10, rel=1e-6)

    def test_smooth_form(self):
        assert eigen_rate(0.0, 0.0, form="smooth").k == pytest.approx(5e9)


class TestBernasconiRate:
    def test_delta_zero_gives_intrinsic(self):
        assert bernasconi_rate(5.0, 5.0, 2.0).k == pytest.approx(100.0)

    def test_hand_evaluated(self):
        assert bernasconi_rate(9.0, 5.0, 2.0).k == pytest.approx(1.0)
        assert bernasconi_rate(13.0, 5.0, 2.0).k == pytest.approx(1e-2)

    def test_capped_at_diffusion(self):
        assert bernasconi_rate(0.0, 40.0, 2.0).k == 1e10


def fixture_inventories():
    acid_rows = [
        ("CC(=O)O", 3, 4.76, "heteroatom"),
        ("O", 0, 15.7, "heteroatom"),
        ("[OH3+]", 0, -1.7, "heteroatom"),
        ("c1ccccc1O", 6, 10.0, "heteroatom"),
        ("CS", 1, 10.3, "heteroatom"),
        ("C[NH3+]", 1, 10.6, "heteroatom"),
        ("OO", 0, 11.6, "heteroatom"),
        ("C[N+](=O)[O-]", 0, 10.2, "carbon"),
        ("CC(=O)CC(=O)C", 3, 9.0, "carbon"),
        ("CC(=O)C", 0, 19.3, "carbon"),
    ]
    base_rows = [
        ("[OH-]", 0, 15.7, "heteroatom"),
        ("O", 0, -1.7, "heteroatom"),
        ("CN", 1, 10.6, "heteroatom"),
        ("N", 0, 9.25, "heteroatom"),
        ("CC([O-])=O", 2, 4.76, "heteroatom"),
        ("C[O-]", 1, 15.5, "heteroatom"),
        ("[F-]", 0, 3.2, "heteroatom"),
        ("[SH-]", 0, 7.0, "heteroatom"),
        ("c1ccncc1", 3, 5.2, "heteroatom"),
        ("[Cl-]", 0, -7.0, "heteroatom"),
    ]
    acids = [AcidRecord(parse_single(s), i, p, c) for s, i, p, c in acid_rows]
    bases = [BaseRecord(parse_single(s), i, p, c) for s, i, p, c in base_rows]
    return acids, bases


def oracle_generate(acids, bases, het_cutoff, carbon_cutoff, intrinsic_log_k0=2.0):
    """Independent enumerator: rates from first principles, products via
    explicit arrow application on remapped reactants."""
    out = {}
    for acid in acids:
        for base in bases:
            delta = acid.pka - base.pka
            if acid.site_class == "carbon":
                k = 10.0 ** min(10.0, intrinsic_log_k0 - delta / 2.0)
                cutoff = carbon_cutoff
            else:
                k = 1e10 * 10.0 ** (-max(0.0, delta))
                cutoff = het_cutoff
            if k < cutoff:
                continue
            # rebuild the pair: acid atoms mapped 1.., proton 500, base 600..
            amol = acid.molecule
            atoms = []
            for i, a in enumerate(amol.atoms):
                extra = {"map_number": i + 1}
                if i == acid.site:
                    extra["hydrogens"] = a.hydrogens - 1
                atoms.append(
                    type(a)(a.element, a.charge,
                            extra.get("hydrogens", a.hydrogens),
                            extra["map_number"], a.aromatic, a.stereo)
                )
            from mechrxn.chem.mol import AtomNode, Bond, Molecule

            h = AtomNode(1, map_number=500)
            acid_mol = Molecule(
                tuple(atoms + [h]),
                amol.bonds + (Bond(acid.site, len(atoms), 1),),
            )
            bmol = base.molecule
            base_mol = Molecule(
                tuple(
                    type(a)(a.element, a.charge, a.hydrogens, 600 + i,
                            a.aromatic, a.stereo)
                    for i, a in enumerate(bmol.atoms)
                ),
                bmol.bonds,
            )
            arrow = parse_arrow_code(f"LP:{600 + base.site}>SS:500-{acid.site + 1}")
            products = apply_arrow((acid_mol, base_mol), arrow)
            r_key = canonical_key((acid_mol, base_mol))
            p_key = canonical_key(products)
            if r_key == p_key:
                continue
            out.setdefault((r_key, p_key), k)
    return out


class TestGenerateOracle:
    def test_10x10_exact_set_equality(self):
        acids, bases = fixture_inventories()
        produced = {}
        for step in generate(acids, bases):
            key = (canonical_key(step.reactants), canonical_key(step.products))
            produced[key] = step.rate
        expected = oracle_generate(acids, bases, 1e3, 1e-1)
        assert set(produced) == set(expected)
        for key in produced:
            assert produced[key] == pytest.approx(expected[key], rel=1e-9)

    def test_every_step_balanced_with_arrow(self):
        acids, bases = fixture_inventories()
        for step in generate(acids, bases):
            assert step.balance.balanced
            applied = apply_arrow(step.reactants, step.arrow)
            assert canonical_key(applied) == canonical_key(step.products)

    def test_cutoff_monotonicity(self):
        acids, bases = fixture_inventories()

        def key_set(het, carbon):
            cfg = GenerateConfig(heteroatom_cutoff=het, carbon_cutoff=carbon)
            return {
                (canonical_key(s.reactants), canonical_key(s.products))
                for s in generate(acids, bases, cfg)
            }

        for ladder in ([1e1, 1e3, 1e6], [1e2, 1e4, 1e8], [1e-1, 1e0, 1e5]):
            sets = [key_set(h, h * 1e-4) for h in ladder]
            assert sets[2] <= sets[1] <= sets[0]

    def test_acetic_acid_hydroxide_diffusion_limited(self):
        acid = AcidRecord(parse_single("CC(=O)O"), 3, 4.76, "heteroatom")
        base = BaseRecord(parse_single("[OH-]"), 0, 15.7, "heteroatom")
        steps = list(generate([acid], [base]))
        assert len(steps) == 1
        assert steps[0].rate == 1e10
        assert steps[0].rate_model == "eigen"

    def test_degenerate_pair_skipped(self):
        # water/hydroxide in both roles: products identical to reactants
        acid = AcidRecord(parse_single("O"), 0, 15.7, "heteroatom")
        base = BaseRecord(parse_single("[OH-]"), 0, 15.7, "heteroatom")
        assert list(generate([acid], [base])) == []

    def test_invalid_records_rejected(self):
        with pytest.raises(InventoryError, match="hydrogen"):
            AcidRecord(parse_single("[Cl-]"), 0, 7.0, "heteroatom")
        with pytest.raises(InventoryError, match="lone pair"):
            BaseRecord(parse_single("C"), 0, 10.0, "heteroatom")
        with pytest.raises(InventoryError, match="finite"):
            AcidRecord(parse_single("O"), 0, float("nan"), "heteroatom")


class TestSampling:
    def test_zero(self):
        assert sample_for_training(iter(range(100)), 0) == []

    def test_oversized_returns_all(self):
        assert sample_for_training(iter(range(5)), 50) == [0, 1, 2, 3, 4]

    def test_deterministic(self):
        a = sample_for_training(iter(range(1000)), 20, seed=9)
        b = sample_for_training(iter(range(1000)), 20, seed=9)
        assert a == b
        c = sample_for_training(iter(range(1000)), 20, seed=10)
        assert a != c


def test_load_inventory_round_trip(tmp_path):
    path = tmp_path / "acids.csv"
    path.write_text(
        "smiles,site_atom_map,pka,site_class\n"
        "[OH:1]C=O,1,3.75,heteroatom\n"
        "C[NH3+:2],2,10.6,heteroatom\n"
    )
    records = load_inventory(path, "acid")
    assert len(records) == 2
    assert records[0].pka == pytest.approx(3.75)
    assert records[1].site_class == "heteroatom"

    bad = tmp_path / "bad.csv"
    bad.write_text("smiles,site_atom_map,pka,site_class\nCCO,7,16.0,heteroatom\n")
    with pytest.raises(InventoryError, match="site map"):
        load_inventory(bad, "acid")
