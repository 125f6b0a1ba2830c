"""Elementary-step layer: arrows, application mechanics, balance, records."""

import random
from pathlib import Path

import pytest

from mechrxn.chem import canonical_key, parse_smiles
from mechrxn.reaction import (
    ArrowError,
    ArrowSpec,
    ElementaryStep,
    OrbitalRef,
    StepError,
    apply_arrow,
    check_balance,
    extract_labels,
    format_step_record,
    parse_arrow_code,
    parse_step_record,
)

DATA = Path(__file__).parent / "data"


def fixture_lines():
    raw = (DATA / "arrow_fixtures.txt").read_text().splitlines()
    return [l for l in raw if l.strip() and not l.startswith("#")]


class TestArrowCodes:
    def test_round_trip(self):
        for text in ["LP:10>SS:20-30", "PI:1-2>EO:3", "SB:5-2>PS:6-7"]:
            assert parse_arrow_code(text).code() == text

    def test_bond_kind_requires_far_atom(self):
        with pytest.raises(StepError):
            OrbitalRef("sigma_bond", 1)
        with pytest.raises(StepError):
            OrbitalRef("lone_pair", 1, 2)

    def test_source_sink_kinds_enforced(self):
        with pytest.raises(StepError):
            ArrowSpec(OrbitalRef("empty_orbital", 1), OrbitalRef("empty_orbital", 2))

    def test_malformed(self):
        with pytest.raises(StepError):
            parse_arrow_code("XX:1>EO:2")


class TestApplyArrow:
    def test_sn2(self):
        reactants = parse_smiles("[Br-:10].[CH3:20][Cl:30]")
        products = apply_arrow(reactants, parse_arrow_code("LP:10>SS:20-30"))
        assert canonical_key(products) == canonical_key(parse_smiles("CBr.[Cl-]"))
        br = next(a for m in products for a in m.atoms if a.symbol == "Br")
        cl = next(a for m in products for a in m.atoms if a.symbol == "Cl")
        assert br.charge == 0 and cl.charge == -1

    def test_proton_transfer_two_waters(self):
        reactants = parse_smiles("[OH-:1].[OH2+:2][H:3]")
        products = apply_arrow(reactants, parse_arrow_code("LP:1>SS:3-2"))
        assert canonical_key(products) == canonical_key(parse_smiles("O.O"))

    def test_meisenheimer_adduct(self):
        reactants = parse_smiles(
            "[OH-:1].[Cl:2][C:3]1=[CH:4][CH:5]=[C:6]"
            "([N+:7](=[O:8])[O-:9])[CH:10]=[CH:11]1"
        )
        products = apply_arrow(reactants, parse_arrow_code("LP:1>PS:3-4"))
        assert len(products) == 1
        assert check_balance(reactants, products).balanced
        # ipso carbon now carries both OH and Cl
        adduct = products[0]
        ipso = adduct.atom_by_map(3)
        symbols = sorted(
            adduct.atoms[j].symbol for j, _ in adduct.neighbors[ipso]
        )
        assert "Cl" in symbols and "O" in symbols

    def test_unresolvable_map(self):
        with pytest.raises(ArrowError, match="not found"):
            apply_arrow(parse_smiles("[CH4:1]"), parse_arrow_code("LP:9>EO:1"))

    def test_source_without_lone_pair(self):
        with pytest.raises(ArrowError, match="lone pair"):
            apply_arrow(
                parse_smiles("[CH4:1].[CH3+:2]"), parse_arrow_code("LP:1>EO:2")
            )

    def test_self_pair_rejected(self):
        with pytest.raises(ArrowError, match="no net change"):
            apply_arrow(parse_smiles("[OH-:1]"), parse_arrow_code("LP:1>EO:1"))

    def test_full_sink_rejected(self):
        # ammonium N has no empty orbital
        with pytest.raises(ArrowError, match="empty orbital"):
            apply_arrow(
                parse_smiles("[OH-:1].[NH4+:2]"), parse_arrow_code("LP:1>EO:2")
            )

    def test_same_bond_rejected(self):
        with pytest.raises(ArrowError, match="same bond"):
            apply_arrow(
                parse_smiles("[CH3:1][Cl:2]"), parse_arrow_code("SB:1-2>SS:2-1")
            )

    def test_all_fixtures_reproduce_recorded_products(self):
        for line in fixture_lines():
            rec = parse_step_record(line)
            applied = apply_arrow(rec.reactants, rec.arrow)
            assert canonical_key(applied) == canonical_key(rec.products), line
            assert check_balance(rec.reactants, applied).balanced, line

    def test_conservation_property(self):
        for line in fixture_lines():
            rec = parse_step_record(line)
            report = check_balance(rec.reactants, apply_arrow(rec.reactants, rec.arrow))
            assert report.verdict == "balanced"

    def test_output_permutation_invariant(self):
        rng = random.Random(3)
        rec = parse_step_record(fixture_lines()[9])  # Meisenheimer
        base = canonical_key(apply_arrow(rec.reactants, rec.arrow))
        big = rec.reactants[1]
        for _ in range(10):
            order = list(range(len(big.atoms)))
            rng.shuffle(order)
            shuffled = (rec.reactants[0], big.permuted(order))
            assert canonical_key(apply_arrow(shuffled, rec.arrow)) == base


class TestBalance:
    def test_identity_balanced(self):
        a = parse_smiles("CC(=O)O.[Na+]")
        report = check_balance(a, a)
        assert report.verdict == "balanced"
        assert report.element_delta == ()
        assert report.charge_delta == 0

    def test_deleted_hydrogen_detected(self):
        report = check_balance(parse_smiles("C"), parse_smiles("[CH3-]"))
        assert dict(report.element_delta) == {1: -1}
        assert report.charge_delta == -1
        assert report.verdict == "unbalanced"

    def test_acid_base_hand_count(self):
        report = check_balance(
            parse_smiles("O.Cl"), parse_smiles("[OH3+].[Cl-]")
        )
        assert report.verdict == "balanced"

    def test_describe(self):
        report = check_balance(parse_smiles("CO"), parse_smiles("C"))
        assert "O-1" in report.describe()


class TestLabels:
    def test_fig6_style_labels(self):
        rec = parse_step_record(
            "[Br-:10].[CH3:20][Cl:30]>>[Br:10][CH3:20].[Cl-:30] | LP:10>SS:20-30"
        )
        assert extract_labels(rec) == (10, 20)

    def test_proton_transfer_sink_is_hydrogen(self):
        rec = parse_step_record(
            "[OH-:1].[OH2+:2][H:3]>>[OH:1][H:3].[OH2:2] | LP:1>SS:3-2"
        )
        assert extract_labels(rec) == (1, 3)

    def test_missing_arrow(self):
        step = ElementaryStep(reactants=parse_smiles("C"), products=parse_smiles("C"))
        with pytest.raises(StepError):
            extract_labels(step)


class TestStepRecords:
    def test_sn2_record(self):
        rec = parse_step_record(
            "[Br-:10].[CH3:20][Cl:30]>>[Br:10][CH3:20].[Cl-:30] | LP:10>SS:20-30"
        )
        assert rec.arrow is not None
        assert rec.balance.balanced
        assert rec.arrow_consistent is True

    def test_inconsistent_record_flagged(self):
        rec = parse_step_record(
            "[Br-:10].[CH3:20][Cl:30]>>[Br-:10].[CH3:20][Cl:30] | LP:10>SS:20-30"
        )
        assert rec.arrow_consistent is False

    def test_empty_arrow_field(self):
        rec = parse_step_record("CCO>>CCO")
        assert rec.arrow is None
        assert rec.arrow_consistent is None

    def test_score_field(self):
        rec = parse_step_record("CCO>>CCO | | 1.198")
        assert rec.score == pytest.approx(1.198)

    def test_metadata_fields(self):
        rec = parse_step_record("CCO>>CCO | | k=1e10 model=eigen")
        assert rec.rate == pytest.approx(1e10)
        assert rec.rate_model == "eigen"

    def test_format_round_trip(self):
        line = "[Br-:10].[CH3:20][Cl:30]>>[Br:10][CH3:20].[Cl-:30] | LP:10>SS:20-30"
        rec = parse_step_record(line)
        again = parse_step_record(format_step_record(rec))
        assert again.key() == rec.key()
        assert again.arrow.code() == rec.arrow.code()

    def test_malformed_reaction(self):
        with pytest.raises(StepError):
            parse_step_record("CCO | LP:1>EO:2")
