"""Steady-state genetic algorithm with infeasibility repair.

One offspring per generation: two random distinct parents, one of two
crossovers, optional mutation, repair, and replace-worst insertion.  The
population restarts from its elite after a stagnation streak, and every
member of the final population gets an insert-move local search.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import HorizonError, InfeasibleInstanceError
from .evaluation import (
    Chromosome,
    Gene,
    bar_usage,
    bars_produced,
    bars_required,
    beam_production,
    classify_infeasibility,
    decode_schedule,
    evaluate,
)
from .instance import Instance
from .patterns import CuttingPattern, OverlappingPattern, PackingPattern, PatternSet


@dataclass
class GaParams:
    population_size: int = 25  # TP
    generations: int = 1000  # NG
    mutation_rate: float = 0.05  # MUT
    restart_patience: int = 200  # RST, stagnant generations before a restart
    construction_pool: int = 100  # AS, pseudo-random draws per (re)initialization
    crossover_kind: int = 1  # CRS
    restart_elites: int = 5  # TER
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be in [0, 1]")
        if self.restart_elites >= self.population_size:
            raise ValueError("restart_elites must be smaller than population_size")
        if self.generations < 0:
            raise ValueError("generations must be nonnegative")

    @classmethod
    def defaults(cls, num_packing_patterns: int, seed: int = 0) -> "GaParams":
        """Tuned configuration, scaled by the packing pattern count."""
        ng = 1000 * num_packing_patterns
        return cls(
            population_size=25,
            generations=ng,
            mutation_rate=0.05,
            restart_patience=math.ceil(0.2 * ng),
            construction_pool=100 * num_packing_patterns,
            crossover_kind=1,
            restart_elites=5,
            rng_seed=seed,
        )


@dataclass
class Population:
    members: list[Chromosome]
    fitnesses: list[float]
    best_history: list[float] = field(default_factory=list)
    rejected_constructions: int = 0

    def keys(self) -> set:
        return {m.key() for m in self.members}


@dataclass
class GenerationStat:
    generation: int
    best_fitness: float
    mean_fitness: float


@dataclass
class GaResult:
    chromosome: Chromosome
    fitness: float
    makespan: int
    trace: list[GenerationStat]
    rejected_constructions: int
    population: Population | None = None


# -- pseudo-random construction --------------------------------------------


def random_solution(inst: Instance, pats: PatternSet, rng: random.Random) -> Chromosome | None:
    """Build a feasible chromosome or reject.

    Packing patterns are drawn without replacement; each selected pattern is
    used as often as needed to cover the demand of the lengths it contains,
    capped so every use still fits inside the horizon.  Bars are then supplied
    class by class from random cutting patterns and, if short, splices.
    """
    genes: list[tuple[int, int]] = []
    deficits = {
        (c, k): d
        for c, bt in enumerate(inst.beam_types, start=1)
        for k, d in enumerate(bt.demands, start=1)
    }
    loads = {g: [0] * len(inst.molds_in_class(g)) for g in range(1, inst.num_mold_classes + 1)}
    unpicked = list(pats.packing)
    while any(v > 0 for v in deficits.values()):
        if not unpicked:
            return None
        pattern = unpicked.pop(rng.randrange(len(unpicked)))
        covers = any(
            count > 0 and deficits[(pattern.beam_type, k)] > 0
            for k, count in enumerate(pattern.counts, start=1)
        )
        if not covers:
            continue
        wanted = max(
            -(-deficits[(pattern.beam_type, k)] // count)
            for k, count in enumerate(pattern.counts, start=1)
            if count > 0 and deficits[(pattern.beam_type, k)] > 0
        )
        # Cap the uses so each one still finishes within the horizon.
        class_loads = loads[pattern.mold_class]
        freq = 0
        for _ in range(wanted):
            i = class_loads.index(min(class_loads))
            if class_loads[i] + pattern.duration > inst.horizon:
                break
            class_loads[i] += pattern.duration
            freq += 1
        if freq == 0:
            continue
        genes.append((pattern.id, freq))
        for k, count in enumerate(pattern.counts, start=1):
            key = (pattern.beam_type, k)
            deficits[key] = max(0, deficits[key] - count * freq)

    needed = {g: 0 for g in range(1, inst.num_mold_classes + 1)}
    for pid, freq in genes:
        pattern = pats.by_id(pid)
        bars = inst.beam_types[pattern.beam_type - 1].bars_per_beam
        needed[pattern.mold_class] += bars * freq
    remaining = list(inst.stock)
    produced = {g: 0 for g in needed}

    def addable(pattern, deficit_by_class) -> int:
        """Max uses without overshooting any class target or the stock."""
        limit = None
        if isinstance(pattern, CuttingPattern):
            for g, count in enumerate(pattern.item_counts, start=1):
                if count > 0:
                    room = deficit_by_class[g] // count
                    limit = room if limit is None else min(limit, room)
            limit = min(limit, remaining[pattern.source_bar - 1])
        else:
            limit = deficit_by_class[pattern.produced_class]
            for v, count in enumerate(pattern.leftover_counts, start=1):
                if count:
                    limit = min(limit, remaining[inst.num_bar_kinds + v - 1] // count)
        return max(0, limit)

    def consume(pattern, freq):
        if isinstance(pattern, CuttingPattern):
            remaining[pattern.source_bar - 1] -= freq
            for g, count in enumerate(pattern.item_counts, start=1):
                produced[g] += count * freq
        else:
            for v, count in enumerate(pattern.leftover_counts, start=1):
                remaining[inst.num_bar_kinds + v - 1] -= count * freq
            produced[pattern.produced_class] += freq

    chosen: set[int] = set()
    for g in sorted(needed):
        for pool in (pats.cutting_producing(g), pats.overlapping_producing(g)):
            candidates = [p for p in pool if p.id not in chosen]
            while produced[g] < needed[g] and candidates:
                pattern = candidates.pop(rng.randrange(len(candidates)))
                chosen.add(pattern.id)
                deficit_by_class = {h: needed[h] - produced[h] for h in needed}
                freq = addable(pattern, deficit_by_class)
                if freq <= 0:
                    continue
                consume(pattern, freq)
                genes.append((pattern.id, freq))
        if produced[g] < needed[g]:
            return None
    ch = Chromosome(genes)
    if not classify_infeasibility(ch, inst, pats).feasible:
        return None
    return ch


# -- repair -----------------------------------------------------------------


def _trim_packing_surplus(genes, inst, pats):
    """Lower each packing gene, in order, to the least frequency that keeps
    the demand covered given every other gene."""
    ch = Chromosome(genes)
    produced = beam_production(ch, inst, pats)
    for i, (pid, freq) in enumerate(genes):
        pattern = pats.by_id(pid)
        if not isinstance(pattern, PackingPattern) or freq == 0:
            continue
        bt = inst.beam_types[pattern.beam_type - 1]
        minimal = 0
        for k, count in enumerate(pattern.counts, start=1):
            if count == 0:
                continue
            others = produced[(pattern.beam_type, k)] - freq * count
            missing = bt.demands[k - 1] - others
            if missing > 0:
                minimal = max(minimal, -(-missing // count))
        if minimal < freq:
            for k, count in enumerate(pattern.counts, start=1):
                produced[(pattern.beam_type, k)] -= (freq - minimal) * count
            genes[i] = (pid, minimal)


def _fix_demand(genes, inst, pats):
    """Raise frequencies of covering packing genes until every demand is met.

    Returns False when some demanded length is covered by no gene.
    """
    while True:
        ch = Chromosome([gene for gene in genes if gene[1] > 0])
        produced = beam_production(ch, inst, pats)
        progress = False
        satisfied = True
        for c, bt in enumerate(inst.beam_types, start=1):
            for k, demand in enumerate(bt.demands, start=1):
                missing = demand - produced[(c, k)]
                if missing <= 0:
                    continue
                satisfied = False
                for i, (pid, freq) in enumerate(genes):
                    pattern = pats.by_id(pid)
                    if (
                        isinstance(pattern, PackingPattern)
                        and pattern.beam_type == c
                        and pattern.counts[k - 1] > 0
                    ):
                        extra = -(-missing // pattern.counts[k - 1])
                        genes[i] = (pid, freq + extra)
                        produced = beam_production(Chromosome(genes), inst, pats)
                        progress = True
                        break
        if satisfied:
            return True
        if not progress:
            return False


def _fix_stock(genes, inst, pats):
    """Reduce cutting, then overlapping, frequencies until stock holds."""
    for w in range(1, inst.num_bar_kinds + inst.num_leftover_kinds + 1):
        usage = bar_usage(Chromosome(genes), inst, pats)[w]
        if usage <= inst.stock[w - 1]:
            continue
        for i, (pid, freq) in enumerate(genes):
            pattern = pats.by_id(pid)
            if not isinstance(pattern, CuttingPattern) or pattern.source_bar != w or freq == 0:
                continue
            over = usage - inst.stock[w - 1]
            cut = min(freq, over)
            genes[i] = (pid, freq - cut)
            usage -= cut
            if usage <= inst.stock[w - 1]:
                break
        if usage <= inst.stock[w - 1]:
            continue
        if w <= inst.num_bar_kinds:
            continue
        v = w - inst.num_bar_kinds
        for i, (pid, freq) in enumerate(genes):
            pattern = pats.by_id(pid)
            if not isinstance(pattern, OverlappingPattern) or freq == 0:
                continue
            per_use = pattern.leftover_counts[v - 1]
            if per_use == 0:
                continue
            over = usage - inst.stock[w - 1]
            cut = min(freq, over // per_use)
            genes[i] = (pid, freq - cut)
            usage -= cut * per_use
            if usage <= inst.stock[w - 1]:
                break


def _fix_balance(genes, inst, pats):
    """Align produced bars with required bars class by class.

    Only frequencies of genes already present are adjusted; surplus is cut
    first from single-class cutting genes, then splices; deficits are filled
    the same way within the remaining stock.
    """
    for g in range(1, inst.num_mold_classes + 1):
        def state():
            ch = Chromosome([gene for gene in genes if gene[1] > 0])
            return (
                bars_produced(ch, inst, pats)[g],
                bars_required(ch, inst, pats)[g],
                bar_usage(ch, inst, pats),
            )

        produced, required, _ = state()
        if produced > required:
            for i, (pid, freq) in enumerate(genes):
                pattern = pats.by_id(pid)
                if (
                    not isinstance(pattern, CuttingPattern)
                    or freq == 0
                    or pattern.item_counts[g - 1] == 0
                    or pattern.total_items != pattern.item_counts[g - 1]
                ):
                    continue
                over = produced - required
                if over <= 0:
                    break
                per_use = pattern.item_counts[g - 1]
                cut = min(freq, -(-over // per_use))
                genes[i] = (pid, freq - cut)
                produced -= cut * per_use
        if produced > required:
            for i, (pid, freq) in enumerate(genes):
                pattern = pats.by_id(pid)
                if (
                    not isinstance(pattern, OverlappingPattern)
                    or freq == 0
                    or pattern.produced_class != g
                ):
                    continue
                over = produced - required
                if over <= 0:
                    break
                cut = min(freq, over)
                genes[i] = (pid, freq - cut)
                produced -= cut
        if produced < required:
            for i, (pid, freq) in enumerate(genes):
                pattern = pats.by_id(pid)
                if (
                    not isinstance(pattern, CuttingPattern)
                    or pattern.item_counts[g - 1] == 0
                    or pattern.total_items != pattern.item_counts[g - 1]
                ):
                    continue
                missing = required - produced
                if missing <= 0:
                    break
                per_use = pattern.item_counts[g - 1]
                _, _, usage = state()
                room = inst.stock[pattern.source_bar - 1] - usage[pattern.source_bar]
                add = min(missing // per_use, max(0, room))
                if add > 0:
                    genes[i] = (pid, freq + add)
                    produced += add * per_use
        if produced < required:
            for i, (pid, freq) in enumerate(genes):
                pattern = pats.by_id(pid)
                if not isinstance(pattern, OverlappingPattern) or pattern.produced_class != g:
                    continue
                while produced < required:
                    _, _, usage = state()
                    fits = all(
                        usage[inst.num_bar_kinds + v] + count <= inst.stock[inst.num_bar_kinds + v - 1]
                        for v, count in enumerate(pattern.leftover_counts, start=1)
                        if count
                    )
                    if not fits:
                        break
                    freq += 1
                    genes[i] = (pid, freq)
                    produced += 1
                if produced >= required:
                    break


def repair(ch: Chromosome, inst: Instance, pats: PatternSet) -> Chromosome | None:
    """Dispatch the three fixing procedures; feasible chromosome or None.

    Unmet demand is fixed first, surplus packing is trimmed (always, so that
    repairing a repaired chromosome is a no-op), then stock overruns, then the
    bar balance; a final classification decides.
    """
    genes = list(ch.genes)
    report = classify_infeasibility(Chromosome([g for g in genes if g[1] > 0]), inst, pats)
    if report.type1:
        if not _fix_demand(genes, inst, pats):
            return None
    _trim_packing_surplus(genes, inst, pats)
    report = classify_infeasibility(Chromosome([g for g in genes if g[1] > 0]), inst, pats)
    if report.type2:
        _fix_stock(genes, inst, pats)
    report = classify_infeasibility(Chromosome([g for g in genes if g[1] > 0]), inst, pats)
    if report.type3:
        _fix_balance(genes, inst, pats)
    result = Chromosome([g for g in genes if g[1] > 0])
    if not classify_infeasibility(result, inst, pats).feasible:
        return None
    return result


# -- variation operators ------------------------------------------------------


def _merged_gene_order(a: Chromosome, b: Chromosome) -> list[int]:
    order = [pid for pid, _ in a.genes]
    seen = set(order)
    for pid, _ in b.genes:
        if pid not in seen:
            order.append(pid)
            seen.add(pid)
    return order


def mean_union_genes(a: Chromosome, b: Chromosome, mut: float, rng: random.Random) -> list[Gene]:
    """Gene union with rounded-up mean frequencies and per-gene zeroing."""
    fa = dict(a.genes)
    fb = dict(b.genes)
    genes = []
    for pid in _merged_gene_order(a, b):
        freq = -(-(fa.get(pid, 0) + fb.get(pid, 0)) // 2)
        if mut > 0 and rng.random() < mut:
            freq = 0
        if freq > 0:
            genes.append((pid, freq))
    return genes


def coin_union_genes(a: Chromosome, b: Chromosome, rng: random.Random) -> list[Gene]:
    """Shared genes get the rounded-up mean; single-parent genes flip a coin."""
    fa = dict(a.genes)
    fb = dict(b.genes)
    genes = []
    for pid in _merged_gene_order(a, b):
        if pid in fa and pid in fb:
            freq = -(-(fa[pid] + fb[pid]) // 2)
        else:
            freq = (fa.get(pid) or fb.get(pid)) if rng.random() < 0.5 else 0
        if freq > 0:
            genes.append((pid, freq))
    return genes


def crossover1(
    a: Chromosome,
    b: Chromosome,
    inst: Instance,
    pats: PatternSet,
    mut: float,
    rng: random.Random,
) -> Chromosome | None:
    return repair(Chromosome(mean_union_genes(a, b, mut, rng)), inst, pats)


def crossover2(
    a: Chromosome,
    b: Chromosome,
    inst: Instance,
    pats: PatternSet,
    rng: random.Random,
) -> Chromosome | None:
    return repair(Chromosome(coin_union_genes(a, b, rng)), inst, pats)


def mutate(
    ch: Chromosome,
    inst: Instance,
    pats: PatternSet,
    rng: random.Random,
) -> Chromosome | None:
    """Swap a present pattern for an absent one, keeping the frequency."""
    if not ch.genes:
        return None
    present = ch.pattern_ids()
    absent = [pid for pid in range(1, pats.total + 1) if pid not in present]
    if not absent:
        raise ValueError("every pattern is already in the chromosome")
    i = rng.randrange(len(ch.genes))
    replacement = absent[rng.randrange(len(absent))]
    genes = list(ch.genes)
    genes[i] = (replacement, genes[i][1])
    return repair(Chromosome(genes), inst, pats)


def local_search_insert(ch: Chromosome, inst: Instance, pats: PatternSet) -> Chromosome:
    """One pass of insert moves, keeping the best strict makespan improvement."""
    best = ch
    try:
        best_makespan = decode_schedule(ch, inst, pats).makespan
    except HorizonError:
        return ch
    n = len(ch.genes)
    for i in range(n - 1):
        for k in range(i + 1, n):
            genes = list(ch.genes)
            gene = genes.pop(i)
            genes.insert(k, gene)
            neighbor = Chromosome(genes)
            try:
                makespan = decode_schedule(neighbor, inst, pats).makespan
            except HorizonError:
                continue
            if makespan < best_makespan:
                best, best_makespan = neighbor, makespan
    return best


# -- main loop ----------------------------------------------------------------


def init_population(
    params: GaParams, inst: Instance, pats: PatternSet, rng: random.Random
) -> Population:
    members, fitnesses, rejected = _draw_population(
        params.construction_pool, params.population_size, [], [], inst, pats, rng
    )
    if not members:
        raise InfeasibleInstanceError(
            f"no feasible solution in {params.construction_pool} construction attempts"
        )
    return Population(members=members, fitnesses=fitnesses, rejected_constructions=rejected)


def _draw_population(pool, size, seed_members, seed_fitnesses, inst, pats, rng):
    candidates = list(zip(seed_members, seed_fitnesses))
    rejected = 0
    for _ in range(pool):
        ch = random_solution(inst, pats, rng)
        if ch is None:
            rejected += 1
            continue
        try:
            value, _ = evaluate(ch, inst, pats)
        except HorizonError:
            rejected += 1
            continue
        candidates.append((ch, value))
    candidates.sort(key=lambda item: (item[1], item[0].key()))
    members, fitnesses, seen = [], [], set()
    for ch, value in candidates:
        key = ch.key()
        if key in seen:
            continue
        seen.add(key)
        members.append(ch)
        fitnesses.append(value)
        if len(members) == size:
            break
    return members, fitnesses, rejected


def run(inst: Instance, pats: PatternSet, params: GaParams) -> GaResult:
    """Run the full solver; deterministic for a fixed seed."""
    rng = random.Random(params.rng_seed)
    pop = init_population(params, inst, pats, rng)
    rejected = pop.rejected_constructions
    keys = pop.keys()
    trace: list[GenerationStat] = []
    stagnation = 0
    prev_best = pop.fitnesses[0]
    for generation in range(1, params.generations + 1):
        offspring = _make_offspring(pop, inst, pats, params, rng)
        if offspring is not None:
            try:
                value, _ = evaluate(offspring, inst, pats)
            except HorizonError:
                value = None
            if value is not None:
                key = offspring.key()
                if key not in keys:
                    if len(pop.members) < params.population_size:
                        _insert_sorted(pop, keys, offspring, value, key)
                    elif value < pop.fitnesses[-1]:
                        worst = pop.members.pop()
                        pop.fitnesses.pop()
                        keys.discard(worst.key())
                        _insert_sorted(pop, keys, offspring, value, key)
        best = pop.fitnesses[0]
        if best < prev_best:
            stagnation = 0
            prev_best = best
        else:
            stagnation += 1
        pop.best_history.append(best)
        trace.append(
            GenerationStat(
                generation=generation,
                best_fitness=best,
                mean_fitness=sum(pop.fitnesses) / len(pop.fitnesses),
            )
        )
        if stagnation >= params.restart_patience:
            elites = pop.members[: params.restart_elites]
            elite_fit = pop.fitnesses[: params.restart_elites]
            members, fitnesses, extra = _draw_population(
                params.construction_pool,
                params.population_size,
                elites,
                elite_fit,
                inst,
                pats,
                rng,
            )
            rejected += extra
            pop.members, pop.fitnesses = members, fitnesses
            keys = pop.keys()
            stagnation = 0
            prev_best = pop.fitnesses[0]
    # Final polish: reorder genes of every member for a shorter makespan.
    polished = []
    for member in pop.members:
        improved_member = local_search_insert(member, inst, pats)
        value, schedule = evaluate(improved_member, inst, pats)
        polished.append((value, improved_member.key(), improved_member, schedule))
    polished.sort(key=lambda item: (item[0], item[1]))
    pop.members = [item[2] for item in polished]
    pop.fitnesses = [item[0] for item in polished]
    best_value, _, best_member, best_schedule = polished[0]
    return GaResult(
        chromosome=best_member,
        fitness=best_value,
        makespan=best_schedule.makespan,
        trace=trace,
        rejected_constructions=rejected,
        population=pop,
    )


def _insert_sorted(pop: Population, keys: set, ch: Chromosome, value: float, key) -> None:
    idx = 0
    while idx < len(pop.fitnesses) and pop.fitnesses[idx] <= value:
        idx += 1
    pop.members.insert(idx, ch)
    pop.fitnesses.insert(idx, value)
    keys.add(key)


def _make_offspring(pop, inst, pats, params, rng) -> Chromosome | None:
    if len(pop.members) < 2:
        return random_solution(inst, pats, rng)
    i, j = rng.sample(range(len(pop.members)), 2)
    a, b = pop.members[i], pop.members[j]
    if params.crossover_kind == 1:
        child = crossover1(a, b, inst, pats, params.mutation_rate, rng)
    else:
        child = crossover2(a, b, inst, pats, rng)
    if (
        child is not None
        and 0 < len(child.genes) < pats.total  # a pattern must be left to swap in
        and rng.random() < params.mutation_rate
    ):
        child = mutate(child, inst, pats, rng)
    return child
