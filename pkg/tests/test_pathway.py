"""BFS pathway search: planted chains, shortcuts, selection, benchmark."""

import pytest

from mechrxn.chem import canonical_key, parse_smiles
from mechrxn.pathway import (
    BenchmarkError,
    Pathway,
    SearchConfig,
    TargetSpec,
    eval_benchmark,
    match_target,
    parse_benchmark_line,
    search,
    select_pathway,
)
from mechrxn.reaction import ElementaryStep


def chain_predictor(chain, noise_per_node=2, noise_score=0.1):
    """Mock predictor with one planted chain plus inert noise children."""
    keys = [canonical_key(m) for m in chain]

    def predict(node, k):
        out = []
        key = canonical_key(node)
        if key in keys[:-1]:
            i = keys.index(key)
            out.append(
                ElementaryStep(
                    reactants=node, products=chain[i + 1],
                    score=1.0 + i, provenance="mock",
                )
            )
        for j in range(noise_per_node):
            size = (len(key) + j) % 6 + 2
            noise = parse_smiles("C" * size)
            out.append(
                ElementaryStep(
                    reactants=node, products=noise,
                    score=noise_score, provenance="mock",
                )
            )
        return out

    return predict


def alkane_chain(length):
    """Distinct molsets: successive dehydrogenation-like mock states."""
    base = "CCCCCCCC"
    out = [parse_smiles(base)]
    for i in range(length):
        out.append(parse_smiles(base[: 7 - i] + "=C" + ".O" * (i + 1)))
    return out


class TestMatchTarget:
    def test_structure_subset(self):
        node = parse_smiles("CCO.[Na+].[Cl-]")
        spec = TargetSpec(mode="structure", structure=parse_smiles("CCO"))
        assert match_target(node, spec)

    def test_resonance_variant_matches(self):
        node = parse_smiles("[CH2-]C=O.[Na+]")
        spec = TargetSpec(mode="structure", structure=parse_smiles("[O-]C=C"))
        assert match_target(node, spec)

    def test_byproduct_only_false(self):
        node = parse_smiles("[Cl-]")
        spec = TargetSpec(mode="structure", structure=parse_smiles("CCO"))
        assert not match_target(node, spec)

    def test_formula_mode(self):
        spec = TargetSpec.from_text("C10H16N2O5S")
        node = parse_smiles("CS(=O)(=O)OCC=CNC(=O)C1CCC(=O)N1C.[Cl-]")
        assert match_target(node, spec)
        assert not match_target(parse_smiles("[Cl-]"), spec)

    def test_formula_charge(self):
        spec = TargetSpec.from_text("HO-")
        assert match_target(parse_smiles("[OH-].C"), spec)
        assert not match_target(parse_smiles("O.C"), spec)


class TestSearch:
    def test_depth_zero_match(self):
        reactants = parse_smiles("CCO")
        config = SearchConfig(
            target=TargetSpec(mode="structure", structure=reactants)
        )
        result = search(reactants, config, chain_predictor([reactants]))
        assert result.stop_reason == "target_found"
        assert result.nodes_expanded == 0
        assert result.selected.depth == 0

    def test_planted_three_step_chain(self):
        chain = alkane_chain(3)
        config = SearchConfig(
            target=TargetSpec(mode="structure", structure=chain[-1]),
            branching=5, max_depth=5, time_budget=60.0,
        )
        result = search(chain[0], config, chain_predictor(chain))
        assert result.stop_reason == "target_found"
        assert result.selected.depth == 3
        found = [canonical_key(s.products) for s in result.selected.steps]
        assert found == [canonical_key(m) for m in chain[1:]]

    def test_budget_stop(self):
        import time

        chain = alkane_chain(5)

        def slow(node, k):
            time.sleep(0.05)
            return chain_predictor(chain, noise_per_node=4)(node, k)

        config = SearchConfig(
            target=TargetSpec(mode="structure", structure=parse_smiles("CCCCCCCCCC")),
            branching=5, max_depth=5, time_budget=0.2,
        )
        t0 = time.monotonic()
        result = search(chain[0], config, slow)
        assert result.stop_reason == "budget"
        assert time.monotonic() - t0 < 2.0

    def test_predictor_failure_partial_result(self):
        def boom(node, k):
            raise RuntimeError("model went away")

        config = SearchConfig(
            target=TargetSpec(mode="structure", structure=parse_smiles("CC")),
        )
        result = search(parse_smiles("C"), config, boom)
        assert result.stop_reason == "predictor_failure"
        assert "model went away" in result.error

    def test_known_intermediate_shortcut_reduces_expansions(self):
        chain = alkane_chain(4)
        target = TargetSpec(mode="structure", structure=chain[-1])
        predictor = chain_predictor(chain, noise_per_node=4)
        base_config = SearchConfig(
            target=target, branching=6, max_depth=6, time_budget=60.0
        )
        plain = search(chain[0], base_config, predictor)
        shortcut_config = SearchConfig(
            target=target, branching=6, max_depth=6, time_budget=60.0,
            known_intermediates=tuple(tuple(m) for m in chain[1:-1]),
        )
        fast = search(chain[0], shortcut_config, predictor)
        assert plain.stop_reason == fast.stop_reason == "target_found"
        assert fast.nodes_expanded <= plain.nodes_expanded

    def test_visited_dedup(self):
        a = parse_smiles("CC")

        def looping(node, k):
            return [
                ElementaryStep(reactants=node, products=a, score=1.0,
                               provenance="mock")
            ]

        config = SearchConfig(
            target=TargetSpec(mode="structure", structure=parse_smiles("CCCC")),
            branching=3, max_depth=7, time_budget=10.0,
        )
        result = search(parse_smiles("C"), config, looping)
        assert result.stop_reason == "exhausted"
        assert result.nodes_expanded <= 2


class TestSelection:
    def test_single_pathway(self):
        p = Pathway.from_steps([], 0.1)
        assert select_pathway([p]) is p

    def test_snar_scores(self):
        one = Pathway(steps=[], depth=1, min_step_score=0.08, wall_time_found=0.1)
        two = Pathway(steps=[], depth=2, min_step_score=1.198, wall_time_found=0.4)
        assert select_pathway([one, two], "first_found") is one
        assert select_pathway([one, two], "max_min_step") is two

    def test_tie_break_shorter_depth(self):
        a = Pathway(steps=[], depth=3, min_step_score=1.0, wall_time_found=0.1)
        b = Pathway(steps=[], depth=2, min_step_score=1.0, wall_time_found=0.2)
        assert select_pathway([a, b], "max_min_step") is b

    def test_empty(self):
        with pytest.raises(ValueError):
            select_pathway([])


class TestBenchmark:
    def test_parse_line(self):
        record = parse_benchmark_line("CCO.[Na+] | C2H6O | 2 | CC=C;O")
        assert record.depth == 2
        assert record.target.mode == "formula"
        assert len(record.intermediates) == 2

    def test_bad_depth(self):
        with pytest.raises(BenchmarkError):
            parse_benchmark_line("C | C | 9")

    def test_planted_benchmark_recovery(self, tmp_path):
        chains = [alkane_chain(d) for d in (1, 2, 3)]
        lines = []
        from mechrxn.chem import write_molset

        for chain in chains:
            lines.append(
                f"{write_molset(chain[0])} | {write_molset(chain[-1])} | {len(chain) - 1}"
            )
        bench = tmp_path / "bench.txt"
        bench.write_text("\n".join(lines) + "\n")

        def predictor(node, k):
            for chain in chains:
                keys = [canonical_key(m) for m in chain]
                key = canonical_key(node)
                if key in keys[:-1]:
                    i = keys.index(key)
                    return [
                        ElementaryStep(
                            reactants=node, products=chain[i + 1],
                            score=1.0, provenance="mock",
                        )
                    ]
            return []

        journal = tmp_path / "journal.jsonl"
        table = eval_benchmark(
            bench, predictor, branching=5, time_budget=30.0, journal_path=journal
        )
        assert table["recovered"] == 3
        assert table["per_depth"][2]["recovered"] == 1

        # resumability: a second run consumes the journal without searching
        def exploding(node, k):
            raise AssertionError("should not be called on resume")

        table2 = eval_benchmark(
            bench, exploding, branching=5, time_budget=30.0, journal_path=journal
        )
        assert table2["recovered"] == 3

    def test_empty_benchmark(self, tmp_path):
        bench = tmp_path / "empty.txt"
        bench.write_text("")
        table = eval_benchmark(bench, lambda n, k: [])
        assert table["total"] == 0
        assert table["per_depth"] == {}
