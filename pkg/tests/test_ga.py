import random

import pytest

from beamforge.evaluation import (
    Chromosome,
    classify_infeasibility,
    decode_schedule,
    evaluate,
    exhaustive_optimum,
    fitness,
)
from beamforge.errors import HorizonError, InfeasibleInstanceError
from beamforge.ga import (
    GaParams,
    coin_union_genes,
    crossover1,
    init_population,
    local_search_insert,
    mean_union_genes,
    mutate,
    random_solution,
    repair,
    run,
)
from beamforge.instance import parse_instance
from beamforge.patterns import generate_patterns

from conftest import (
    beam_type,
    cwp000_optimal_genes,
    find_cutting,
    find_packing,
    make_instance,
)


class FakeRng:
    """Scripted random() values for coin-flip tests."""

    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


def feasible_and_schedulable(ch, inst, pats):
    if not classify_infeasibility(ch, inst, pats).feasible:
        return False
    try:
        decode_schedule(ch, inst, pats)
    except HorizonError:
        return False
    return True


class TestConstruction:
    def test_always_feasible_or_rejected(self, cwp000, cwp000_patterns):
        rng = random.Random(0)
        produced = 0
        for _ in range(300):
            ch = random_solution(cwp000, cwp000_patterns, rng)
            if ch is None:
                continue
            produced += 1
            assert feasible_and_schedulable(ch, cwp000, cwp000_patterns)
            assert all(freq >= 1 for _, freq in ch.genes)
            assert len({pid for pid, _ in ch.genes}) == ch.gene_count
        assert produced > 0

    def test_zero_demand_gives_empty(self):
        inst = make_instance(
            beam_types=[beam_type([330], [0])], mold_lengths=[595], horizon=1
        )
        pats = generate_patterns(inst)
        ch = random_solution(inst, pats, random.Random(1))
        assert ch is not None and ch.genes == []
        assert fitness(ch, inst, pats) == 0

    def test_multi_class_cuts_selected_once(self):
        # A bar spanning both mold lengths shows up in both class pools; it
        # must still end up as at most one gene.
        inst = make_instance(
            beam_types=[beam_type([688, 749], [3, 2])],
            mold_lengths=[800, 1250],
            horizon=6,
            bar_lengths=(2330,),
            num_bar_kinds=1,
            stock=(8,),
        )
        pats = generate_patterns(inst)
        rng = random.Random(0)
        produced = 0
        for _ in range(200):
            ch = random_solution(inst, pats, rng)
            if ch is None:
                continue
            produced += 1
            ids = [pid for pid, _ in ch.genes]
            assert len(set(ids)) == len(ids)
            assert feasible_and_schedulable(ch, inst, pats)
        assert produced > 0

    def test_long_bars_only_from_splices_when_stock_forces_it(self, cwp000_text):
        inst = parse_instance(cwp000_text)
        inst.stock = [0, 0, 0, 28, 29]
        pats = generate_patterns(inst)
        rng = random.Random(3)
        produced = 0
        for _ in range(120):
            ch = random_solution(inst, pats, rng)
            if ch is None:
                continue
            produced += 1
            assert feasible_and_schedulable(ch, inst, pats)
            for pid, _ in ch.genes:
                pattern = pats.by_id(pid)
                if getattr(pattern, "item_counts", None) is not None:
                    assert pattern.item_counts[1] == 0  # no long bars from cuts
        assert produced > 0


class TestCrossoverArithmetic:
    def test_mean_shared_gene(self):
        genes = mean_union_genes(Chromosome([(2, 4)]), Chromosome([(2, 2)]), 0.0, FakeRng([]))
        assert genes == [(2, 3)]

    def test_mean_absent_counts_as_zero(self):
        genes = mean_union_genes(Chromosome([(2, 4)]), Chromosome([(6, 2)]), 0.0, FakeRng([]))
        assert genes == [(2, 2), (6, 1)]

    def test_full_mutation_empties(self):
        genes = mean_union_genes(
            Chromosome([(2, 4)]), Chromosome([(6, 2)]), 1.0, FakeRng([0.0, 0.0])
        )
        assert genes == []

    def test_coin_union_shared_always_kept(self):
        a, b = Chromosome([(2, 4), (11, 2)]), Chromosome([(2, 2)])
        kept = coin_union_genes(a, b, FakeRng([0.4]))
        dropped = coin_union_genes(a, b, FakeRng([0.6]))
        assert kept == [(2, 3), (11, 2)]
        assert dropped == [(2, 3)]

    def test_coin_union_identical_parents(self):
        a = Chromosome([(2, 4), (11, 2)])
        assert coin_union_genes(a, a, FakeRng([])) == [(2, 4), (11, 2)]

    def test_coin_union_disjoint_all_zero(self):
        genes = coin_union_genes(
            Chromosome([(2, 4)]), Chromosome([(6, 2)]), FakeRng([0.9, 0.9])
        )
        assert genes == []

    def test_crossover1_empty_offspring_rejected(self, cwp000, cwp000_patterns):
        a = Chromosome(cwp000_optimal_genes(cwp000_patterns))
        assert crossover1(a, a, cwp000, cwp000_patterns, 1.0, FakeRng([0.0] * 10)) is None


class TestRepair:
    def test_surplus_trim(self, cwp000, cwp000_patterns):
        pats = cwp000_patterns
        genes = cwp000_optimal_genes(pats)
        surplus = [(genes[0][0], 9)] + genes[1:]
        repaired = repair(Chromosome(surplus), cwp000, pats)
        assert repaired is not None
        assert repaired.genes[0] == (genes[0][0], 4)
        assert repaired.genes[1:] == genes[1:]
        assert feasible_and_schedulable(repaired, cwp000, pats)

    def test_cannot_add_absent_patterns(self, cwp000, cwp000_patterns):
        genes = cwp000_optimal_genes(cwp000_patterns)[:2]  # packing only
        assert repair(Chromosome(genes), cwp000, cwp000_patterns) is None

    def test_feasible_input_only_trimmed(self, cwp000, cwp000_patterns):
        genes = cwp000_optimal_genes(cwp000_patterns)
        repaired = repair(Chromosome(genes), cwp000, cwp000_patterns)
        assert repaired.genes == genes

    def test_swap_to_leftover_making_cut(self, cwp000, cwp000_patterns):
        # Replace the double-item cut by the cut that sets a 6 m piece aside;
        # the bar balance is restored on the remaining single-class cut gene.
        pats = cwp000_patterns
        genes = cwp000_optimal_genes(pats)
        double_cut = find_cutting(pats, 1, (2, 0), (0, 0, 0, 0)).id
        with_leftover = find_cutting(pats, 1, (1, 0), (0, 0, 1, 0)).id
        swapped = [(with_leftover, f) if pid == double_cut else (pid, f) for pid, f in genes]
        repaired = repair(Chromosome(swapped), cwp000, pats)
        assert repaired is not None
        assert feasible_and_schedulable(repaired, cwp000, pats)

    def test_stock_excess_reduced(self, cwp000, cwp000_patterns):
        pats = cwp000_patterns
        genes = cwp000_optimal_genes(pats)
        reuse = find_cutting(pats, 4, (1, 0), (0, 0, 0, 0)).id
        blown = [(pid, 99 if pid == reuse else f) for pid, f in genes]
        repaired = repair(Chromosome(blown), cwp000, pats)
        assert repaired is not None
        assert feasible_and_schedulable(repaired, cwp000, pats)

    def test_idempotent_on_corruptions(self, cwp000, cwp000_patterns):
        pats = cwp000_patterns
        rng = random.Random(11)
        base = random_solution(cwp000, pats, rng)
        assert base is not None
        for _ in range(200):
            genes = [
                (pid, max(1, freq + rng.randint(-3, 3)))
                for pid, freq in base.genes
                if rng.random() > 0.2
            ]
            repaired = repair(Chromosome(genes), cwp000, pats)
            if repaired is None:
                continue
            assert classify_infeasibility(repaired, cwp000, pats).feasible
            again = repair(repaired, cwp000, pats)
            assert again is not None and again.genes == repaired.genes


class TestMutate:
    def test_contract(self, cwp000, cwp000_patterns):
        rng = random.Random(2)
        base = Chromosome(cwp000_optimal_genes(cwp000_patterns))
        outcomes = {"ok": 0, "rejected": 0}
        for _ in range(100):
            child = mutate(base.copy(), cwp000, cwp000_patterns, rng)
            if child is None:
                outcomes["rejected"] += 1
                continue
            outcomes["ok"] += 1
            assert classify_infeasibility(child, cwp000, cwp000_patterns).feasible
        assert outcomes["ok"] > 0

    def test_all_patterns_present_fails(self):
        inst = make_instance(
            beam_types=[beam_type([330], [1])],
            mold_lengths=[595],
            horizon=2,
            bar_lengths=(600,),
            num_bar_kinds=1,
            stock=(5,),
        )
        pats = generate_patterns(inst)
        genes = [(p.id, 1) for p in pats.packing] + [(p.id, 1) for p in pats.cutting]
        with pytest.raises(ValueError):
            mutate(Chromosome(genes), inst, pats, random.Random(0))


class TestLocalSearch:
    def test_never_worse_and_single_gene_fixed(self, cwp000, cwp000_patterns):
        ch = Chromosome(cwp000_optimal_genes(cwp000_patterns))
        before = decode_schedule(ch, cwp000, cwp000_patterns).makespan
        after = local_search_insert(ch, cwp000, cwp000_patterns)
        assert decode_schedule(after, cwp000, cwp000_patterns).makespan <= before
        single = Chromosome([ch.genes[0]])
        assert local_search_insert(single, cwp000, cwp000_patterns).genes == single.genes

    def test_strict_improvement_found(self):
        # Two equal molds; short casts scheduled first leave the long cast to
        # stack on top, while the reversed order runs it in parallel.
        inst = make_instance(
            beam_types=[
                beam_type([330], [2], curing=1, bars=0),
                beam_type([330], [1], curing=2, bars=0),
            ],
            mold_lengths=[595, 595],
            horizon=3,
        )
        pats = generate_patterns(inst)
        short = find_packing(pats, 1, (1,)).id
        long = find_packing(pats, 2, (1,)).id
        ch = Chromosome([(short, 2), (long, 1)])
        assert decode_schedule(ch, inst, pats).makespan == 3
        improved = local_search_insert(ch, inst, pats)
        assert decode_schedule(improved, inst, pats).makespan == 2
        oracle = exhaustive_optimum(inst, pats, max_freq=3, max_genes=4)
        assert oracle is not None and oracle[1] == 2.0


class TestInitPopulation:
    def test_sorted_distinct_bounded(self, cwp000, cwp000_patterns):
        params = GaParams(population_size=10, generations=1, construction_pool=80, rng_seed=4)
        pop = init_population(params, cwp000, cwp000_patterns, random.Random(4))
        assert len(pop.members) <= 10
        assert pop.fitnesses == sorted(pop.fitnesses)
        keys = {m.key() for m in pop.members}
        assert len(keys) == len(pop.members)

    def test_infeasible_instance_raises(self):
        inst = make_instance(
            beam_types=[beam_type([330], [5])],
            mold_lengths=[595],
            horizon=9,
            bar_lengths=(600,),
            num_bar_kinds=1,
            stock=(1,),
        )
        pats = generate_patterns(inst)
        params = GaParams(
            population_size=5, generations=1, construction_pool=20, restart_elites=2
        )
        with pytest.raises(InfeasibleInstanceError):
            init_population(params, inst, pats, random.Random(0))


class TestRun:
    def test_reaches_reference_optimum(self, cwp000, cwp000_patterns):
        params = GaParams.defaults(cwp000_patterns.num_packing, seed=123)
        result = run(cwp000, cwp000_patterns, params)
        assert result.fitness == pytest.approx(2.3, abs=1e-9)
        assert result.makespan == 2

    def test_zero_generations(self, cwp000, cwp000_patterns):
        params = GaParams(
            population_size=5,
            generations=0,
            construction_pool=50,
            restart_elites=2,
            rng_seed=9,
        )
        result = run(cwp000, cwp000_patterns, params)
        assert result.trace == []
        value, _ = evaluate(result.chromosome, cwp000, cwp000_patterns)
        assert value == result.fitness

    def test_deterministic(self, cwp000, cwp000_patterns):
        params = GaParams(
            population_size=8,
            generations=400,
            construction_pool=60,
            restart_patience=100,
            rng_seed=77,
        )
        a = run(cwp000, cwp000_patterns, params)
        b = run(cwp000, cwp000_patterns, params)
        assert a.fitness == b.fitness
        assert a.chromosome.genes == b.chromosome.genes
        assert a.trace == b.trace

    def test_trace_nonincreasing(self, cwp000, cwp000_patterns):
        params = GaParams(
            population_size=8,
            generations=600,
            construction_pool=60,
            restart_patience=80,
            restart_elites=2,
            rng_seed=5,
        )
        result = run(cwp000, cwp000_patterns, params)
        bests = [s.best_fitness for s in result.trace]
        assert all(b2 <= b1 + 1e-12 for b1, b2 in zip(bests, bests[1:]))

    def test_params_validation(self):
        with pytest.raises(ValueError):
            GaParams(population_size=1)
        with pytest.raises(ValueError):
            GaParams(population_size=5, restart_elites=5)
        with pytest.raises(ValueError):
            GaParams(mutation_rate=1.5)

    def test_final_population_invariants(self, cwp000, cwp000_patterns):
        params = GaParams(
            population_size=10,
            generations=300,
            construction_pool=80,
            restart_patience=60,
            restart_elites=3,
            rng_seed=21,
        )
        result = run(cwp000, cwp000_patterns, params)
        pop = result.population
        assert pop.fitnesses == sorted(pop.fitnesses)
        keys = [m.key() for m in pop.members]
        assert len(set(keys)) == len(keys)  # no duplicate gene multisets
        for member in pop.members:
            assert feasible_and_schedulable(member, cwp000, cwp000_patterns)

    def test_single_candidate_population(self, cwp000, cwp000_patterns):
        params = GaParams(
            population_size=4,
            generations=0,
            construction_pool=1,
            restart_elites=1,
            rng_seed=3,
        )
        pop = init_population(params, cwp000, cwp000_patterns, random.Random(3))
        assert len(pop.members) == 1
