"""Dataset plumbing: load/save, splits, mixed set, stats, top-N scoring."""

import pytest

from mechrxn.chem import parse_smiles
from mechrxn.dataio import (
    DataError,
    Dataset,
    SplitSpec,
    build_mixed,
    dataset_stats,
    load_dataset,
    save_dataset,
    split,
    top_n_accuracy,
)

SN2 = "[Br-:10].[CH3:20][Cl:30]>>[Br:10][CH3:20].[Cl-:30] | LP:10>SS:20-30"
PT = "[OH-:1].[OH2+:2][H:3]>>[OH:1][H:3].[OH2:2] | LP:1>SS:3-2"
PLAIN = "CCO>>CCO"


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return path


class TestLoad:
    def test_empty_file(self, tmp_path):
        ds = load_dataset(write_lines(tmp_path / "d.steps", []))
        assert len(ds) == 0

    def test_three_records_stable_order(self, tmp_path):
        ds = load_dataset(write_lines(tmp_path / "d.steps", [SN2, PT, PLAIN]))
        assert len(ds) == 3
        assert ds.steps[0].arrow.code() == "LP:10>SS:20-30"

    def test_bad_line_reported(self, tmp_path):
        lines = [SN2] * 9 + ["garbage without reaction"]
        ds = load_dataset(write_lines(tmp_path / "d.steps", lines),
                          max_error_fraction=0.2)
        assert len(ds) == 9
        assert len(ds.errors) == 1
        assert ds.errors[0][0] == 10

    def test_too_many_errors_aborts(self, tmp_path):
        lines = [SN2, "junk", "more junk"]
        with pytest.raises(DataError, match="malformed"):
            load_dataset(write_lines(tmp_path / "d.steps", lines))

    def test_load_save_load_identity(self, tmp_path):
        ds = load_dataset(write_lines(tmp_path / "a.steps", [SN2, PT]))
        save_dataset(ds, tmp_path / "b.steps")
        again = load_dataset(tmp_path / "b.steps")
        assert [s.key() for s in again.steps] == [s.key() for s in ds.steps]


class TestSplit:
    def make(self, n):
        from mechrxn.reaction import parse_step_record

        return Dataset([parse_step_record(SN2) for _ in range(n)])

    def test_ten_records_8_1_1(self):
        train, val, test = split(self.make(10), SplitSpec(seed=1))
        assert (len(train), len(val), len(test)) == (8, 1, 1)

    def test_deterministic_per_seed(self):
        ds = Dataset(
            [s for s in self.make(20).steps]
        )
        a = split(ds, SplitSpec(seed=3))
        b = split(ds, SplitSpec(seed=3))
        for part_a, part_b in zip(a, b):
            assert [id(s) for s in part_a.steps] == [id(s) for s in part_b.steps]

    def test_partition_laws(self):
        ds = self.make(23)
        for seed in range(5):
            train, val, test = split(ds, SplitSpec(seed=seed))
            ids = [id(s) for s in train.steps + val.steps + test.steps]
            assert sorted(ids) == sorted(id(s) for s in ds.steps)
            assert len(set(ids)) == len(ids)

    def test_fractions_validated(self):
        with pytest.raises(DataError):
            SplitSpec(fractions=(0.5, 0.1, 0.1))

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            split(Dataset([]), SplitSpec())


class TestMixed:
    def test_zero_additions(self):
        train = TestSplit().make(5)
        mixed = build_mixed(train, iter([]), n=0)
        assert len(mixed) == 5
        assert mixed.provenance == "mixed"

    def test_size_additive(self):
        from mechrxn.reaction import parse_step_record

        train = TestSplit().make(5)
        stream = (parse_step_record(PT) for _ in range(7))
        mixed = build_mixed(train, stream, n=100, seed=1)
        assert len(mixed) == 12

    def test_val_test_untouched(self):
        ds = TestSplit().make(20)
        train, val, test = split(ds, SplitSpec(seed=0))
        before = [s.key() for s in val.steps + test.steps]
        build_mixed(train, iter([]), n=0)
        assert [s.key() for s in val.steps + test.steps] == before


class TestStats:
    def test_single_water_record(self, tmp_path):
        ds = load_dataset(write_lines(tmp_path / "w.steps", ["O>>O"]))
        report = dataset_stats(ds)
        assert report.size_histogram == {3: 1}

    def test_methane_elements(self, tmp_path):
        ds = load_dataset(write_lines(tmp_path / "m.steps", ["C>>C"]))
        report = dataset_stats(ds)
        assert report.element_histogram == {"C": 1, "H": 4}

    def test_totals_match_record_count(self, tmp_path):
        ds = load_dataset(write_lines(tmp_path / "d.steps", [SN2, PT, PLAIN]))
        assert dataset_stats(ds).record_count() == 3

    def test_csv_emission(self, tmp_path):
        ds = load_dataset(write_lines(tmp_path / "d.steps", [SN2]))
        report = dataset_stats(ds)
        report.write_csv(tmp_path / "sizes.csv", tmp_path / "elements.csv")
        assert "atoms_per_reaction" in (tmp_path / "sizes.csv").read_text()


class TestTopN:
    def test_oracle_predictor_perfect(self):
        ref = parse_smiles("CBr.[Cl-]")
        rows = [([ref], ref)] * 4
        table = top_n_accuracy(rows)
        assert table[1] == 100.0

    def test_rank_four_miss_at_three_hit_at_five(self):
        ref = parse_smiles("CBr.[Cl-]")
        decoys = [parse_smiles(s) for s in ("C", "CC", "CCC")]
        rows = [(decoys + [ref], ref)]
        table = top_n_accuracy(rows)
        assert table[3] == 0.0
        assert table[5] == 100.0

    def test_monotone_in_n(self):
        ref = parse_smiles("CBr.[Cl-]")
        decoy = parse_smiles("C")
        rows = [([decoy, ref], ref), ([decoy], ref), ([ref], ref)]
        table = top_n_accuracy(rows)
        values = [table[n] for n in sorted(table)]
        assert values == sorted(values)

    def test_resonance_flag(self):
        ref = parse_smiles("[O-]C=C")
        shifted = parse_smiles("[CH2-]C=O")
        rows = [([shifted], ref)]
        assert top_n_accuracy(rows)[1] == 0.0
        assert top_n_accuracy(rows, resonance_tolerant=True)[1] == 100.0

    def test_empty(self):
        assert top_n_accuracy([]) == {1: 0.0, 3: 0.0, 5: 0.0, 10: 0.0}
