import random

import pytest

from beamforge.errors import HorizonError, InfeasibleChromosomeError, UnknownPatternError
from beamforge.evaluation import (
    Chromosome,
    classify_infeasibility,
    decode_schedule,
    exhaustive_optimum,
    fitness,
    fitness_cm,
)
from beamforge.patterns import generate_patterns

from conftest import (
    beam_type,
    cwp000_optimal_genes,
    find_cutting,
    find_packing,
    make_instance,
)


class TestDecode:
    def test_reference_packing_layout(self, cwp000, cwp000_patterns):
        genes = [(find_packing(cwp000_patterns, 1, (2, 1)).id, 4),
                 (find_packing(cwp000_patterns, 1, (1, 3)).id, 2)]
        schedule = decode_schedule(Chromosome(genes), cwp000, cwp000_patterns)
        assert schedule.loads == [1, 1, 1, 1, 2]
        assert schedule.makespan == 2
        assert schedule.used_periods == [True, True, False]
        assert schedule.bar_requirements == {1: 4, 2: 2}

    def test_empty_chromosome(self, cwp000, cwp000_patterns):
        schedule = decode_schedule(Chromosome([]), cwp000, cwp000_patterns)
        assert schedule.makespan == 0
        assert schedule.used_periods == [False, False, False]

    def test_horizon_overflow(self, cwp000, cwp000_patterns):
        genes = [(find_packing(cwp000_patterns, 1, (1, 3)).id, 4)]
        with pytest.raises(HorizonError):
            decode_schedule(Chromosome(genes), cwp000, cwp000_patterns)

    def test_unknown_id(self, cwp000, cwp000_patterns):
        with pytest.raises(UnknownPatternError):
            decode_schedule(Chromosome([(999, 1)]), cwp000, cwp000_patterns)

    def test_prefix_occupancy(self, cwp000, cwp000_patterns):
        # Occupied periods of every mold form a contiguous prefix.
        genes = [(find_packing(cwp000_patterns, 1, (5, 0)).id, 3),
                 (find_packing(cwp000_patterns, 1, (2, 1)).id, 5)]
        schedule = decode_schedule(Chromosome(genes), cwp000, cwp000_patterns)
        for m, starts in enumerate(schedule.assignments):
            periods = sorted(t for _, t in starts)
            assert periods == list(range(1, len(periods) + 1))


class TestFitness:
    def test_reference_optimum_value(self, cwp000, cwp000_patterns):
        ch = Chromosome(cwp000_optimal_genes(cwp000_patterns))
        value = fitness(ch, cwp000, cwp000_patterns)
        assert value == pytest.approx(2.3, abs=1e-12)
        assert fitness_cm(ch, cwp000, cwp000_patterns) == 230

    def test_breakdown_terms(self, cwp000, cwp000_patterns):
        ch = Chromosome(cwp000_optimal_genes(cwp000_patterns))
        schedule = decode_schedule(ch, cwp000, cwp000_patterns)
        assert schedule.new_bar_waste_cm == 20  # 0.1 + 2 * 0.05 on new bars
        assert schedule.new_leftover_waste_cm == 0
        assert schedule.reuse_waste_cm == 10  # 2 * 0.05 on leftover bars
        assert schedule.objective_breakdown == (2.0, 0.2, 0.0, 0.1)

    def test_weight_scaling(self, cwp000_text, cwp000_patterns):
        from beamforge.instance import parse_instance

        inst = parse_instance(cwp000_text)
        inst.weights = (2.0, 1.0, 1.0, 1.0)
        ch = Chromosome(cwp000_optimal_genes(cwp000_patterns))
        schedule = decode_schedule(ch, inst, cwp000_patterns)
        assert schedule.objective_breakdown[0] == 4.0
        assert schedule.objective_breakdown[1:] == (0.2, 0.0, 0.1)

    def test_infeasible_raises_with_report(self, cwp000, cwp000_patterns):
        genes = cwp000_optimal_genes(cwp000_patterns)[:1]
        with pytest.raises(InfeasibleChromosomeError) as err:
            fitness(Chromosome(genes), cwp000, cwp000_patterns)
        assert err.value.report.type1

    def test_gene_order_does_not_change_waste(self, cwp000, cwp000_patterns):
        genes = cwp000_optimal_genes(cwp000_patterns)
        rng = random.Random(5)
        base = decode_schedule(Chromosome(genes), cwp000, cwp000_patterns)
        for _ in range(10):
            shuffled = list(genes)
            rng.shuffle(shuffled)
            schedule = decode_schedule(Chromosome(shuffled), cwp000, cwp000_patterns)
            assert schedule.new_bar_waste_cm == base.new_bar_waste_cm
            assert schedule.new_leftover_waste_cm == base.new_leftover_waste_cm
            assert schedule.reuse_waste_cm == base.reuse_waste_cm


class TestClassify:
    def test_optimal_genes_clean(self, cwp000, cwp000_patterns):
        report = classify_infeasibility(
            Chromosome(cwp000_optimal_genes(cwp000_patterns)), cwp000, cwp000_patterns
        )
        assert report.feasible

    def test_missing_long_casts(self, cwp000, cwp000_patterns):
        genes = [g for g in cwp000_optimal_genes(cwp000_patterns)
                 if g != (find_packing(cwp000_patterns, 1, (1, 3)).id, 2)]
        report = classify_infeasibility(Chromosome(genes), cwp000, cwp000_patterns)
        assert report.type1  # the 3.3 m demand is short
        assert report.type3  # long bars are overproduced
        assert not report.type2

    def test_stock_blowout(self, cwp000, cwp000_patterns):
        genes = cwp000_optimal_genes(cwp000_patterns)
        reuse = find_cutting(cwp000_patterns, 4, (1, 0), (0, 0, 0, 0)).id
        genes = [(pid, 99 if pid == reuse else freq) for pid, freq in genes]
        report = classify_infeasibility(Chromosome(genes), cwp000, cwp000_patterns)
        assert report.type2
        assert report.stock_excess == {4: 99 - 25}


class TestOracle:
    def test_reference_optimum(self, cwp000, cwp000_patterns):
        result = exhaustive_optimum(cwp000, cwp000_patterns, max_freq=10, max_genes=8)
        assert result is not None
        ch, value = result
        assert value == pytest.approx(2.3, abs=1e-12)
        schedule = decode_schedule(ch, cwp000, cwp000_patterns)
        assert schedule.makespan == 2
        assert classify_infeasibility(ch, cwp000, cwp000_patterns).feasible

    def test_zero_demand(self):
        inst = make_instance(
            beam_types=[beam_type([330], [0])], mold_lengths=[595], horizon=1
        )
        pats = generate_patterns(inst)
        ch, value = exhaustive_optimum(inst, pats, max_freq=4, max_genes=4)
        assert ch.genes == []
        assert value == 0

    def test_unfillable_demand(self):
        inst = make_instance(
            beam_types=[beam_type([330], [5])],
            mold_lengths=[595],
            horizon=9,
            bar_lengths=(600,),
            num_bar_kinds=1,
            stock=(1,),  # one bar cannot cover five casts
        )
        pats = generate_patterns(inst)
        assert exhaustive_optimum(inst, pats, max_freq=9, max_genes=4) is None

    def test_budget_exceeded(self, cwp000, cwp000_patterns):
        from beamforge.errors import BudgetExceededError

        with pytest.raises(BudgetExceededError):
            exhaustive_optimum(cwp000, cwp000_patterns, max_freq=10, max_genes=8, budget=50)

    def test_multi_class_cut_found(self):
        # A 20 m bar yields one short and one long item in a single cut
        # (waste 2.1 m), far cheaper than two single-item cuts (22.1 m).
        inst = make_instance(
            beam_types=[beam_type([330, 1100], [1, 1])],
            mold_lengths=[595, 1195],
            horizon=2,
            bar_lengths=(2000,),
            num_bar_kinds=1,
            stock=(5,),
        )
        pats = generate_patterns(inst)
        assert any(p.item_counts == (1, 1) for p in pats.cutting)
        ch, value = exhaustive_optimum(inst, pats, max_freq=5, max_genes=6)
        assert value == pytest.approx(3.1, abs=1e-12)
        used = {pats.by_id(pid).item_counts for pid, _ in ch.genes if pid in
                {p.id for p in pats.cutting}}
        assert (1, 1) in used

    def test_search_floor_admissible_for_multi_class_cuts(self):
        # Regression: spreading a cut's waste over the items of one class only
        # overestimates the remaining-waste floor and prunes the true optimum
        # on instances whose bars span both mold lengths.  Value frozen from a
        # prune-free exhaustive run.
        inst = make_instance(
            beam_types=[beam_type([688, 749], [3, 2])],
            mold_lengths=[800, 1250],
            horizon=6,
            bar_lengths=(2330,),
            num_bar_kinds=1,
            stock=(8,),
        )
        pats = generate_patterns(inst)
        _, value = exhaustive_optimum(inst, pats, max_freq=6, max_genes=6)
        assert value == pytest.approx(11.4, abs=1e-9)
