"""Chromosome encoding, schedule decoding, fitness and the exhaustive oracle."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    BudgetExceededError,
    HorizonError,
    InfeasibleChromosomeError,
    UnknownPatternError,
)
from .instance import Instance
from .patterns import CuttingPattern, OverlappingPattern, PackingPattern, PatternSet

Gene = tuple[int, int]  # (pattern id, frequency >= 1)


@dataclass
class Chromosome:
    """Ordered list of (pattern id, frequency) genes encoding a production plan."""

    genes: list[Gene]

    @property
    def gene_count(self) -> int:
        return len(self.genes)

    def key(self) -> tuple[Gene, ...]:
        """Order-insensitive identity used for population distinctness."""
        return tuple(sorted(self.genes))

    def copy(self) -> "Chromosome":
        return Chromosome(list(self.genes))

    def pattern_ids(self) -> set[int]:
        return {pid for pid, _ in self.genes}


@dataclass
class Schedule:
    """Decoded mold-by-period plan with its objective ingredients."""

    assignments: list[list[tuple[int, int]]]  # per mold: (pattern id, start period)
    loads: list[int]  # occupied periods per mold (contiguous prefix)
    makespan: int
    used_periods: list[bool]  # one flag per period of the horizon
    bar_requirements: dict[int, int]  # per mold class
    new_bar_waste_cm: int
    new_leftover_waste_cm: int
    reuse_waste_cm: int
    weights: tuple[float, float, float, float]

    @property
    def objective_breakdown(self) -> tuple[float, float, float, float]:
        return objective_terms(
            self.weights,
            self.makespan,
            self.new_bar_waste_cm,
            self.new_leftover_waste_cm,
            self.reuse_waste_cm,
        )

    @property
    def objective(self) -> float:
        terms = self.objective_breakdown
        return terms[0] + terms[1] + terms[2] + terms[3]


@dataclass
class InfeasibilityReport:
    """Which feasibility conditions a chromosome violates, with diagnostics."""

    demand_shortfall: dict[tuple[int, int], int] = field(default_factory=dict)
    stock_excess: dict[int, int] = field(default_factory=dict)
    balance_mismatch: dict[int, tuple[int, int]] = field(default_factory=dict)

    @property
    def type1(self) -> bool:  # unmet beam demand
        return bool(self.demand_shortfall)

    @property
    def type2(self) -> bool:  # bar stock exceeded
        return bool(self.stock_excess)

    @property
    def type3(self) -> bool:  # produced bars != required bars
        return bool(self.balance_mismatch)

    @property
    def feasible(self) -> bool:
        return not (self.type1 or self.type2 or self.type3)

    def summary(self) -> str:
        parts = []
        if self.type1:
            parts.append(f"demand shortfall {self.demand_shortfall}")
        if self.type2:
            parts.append(f"stock excess {self.stock_excess}")
        if self.type3:
            parts.append(f"bar balance {self.balance_mismatch}")
        return "; ".join(parts) if parts else "feasible"


def objective_terms(weights, makespan, new_bar_waste_cm, new_leftover_waste_cm, reuse_waste_cm):
    """The four weighted objective terms; shared by fitness and model checking."""
    l1, l2, l3, l4 = weights
    return (
        l1 * makespan,
        l2 * (new_bar_waste_cm / 100.0),
        l3 * (new_leftover_waste_cm / 100.0),
        l4 * (reuse_waste_cm / 100.0),
    )


def combine_objective(weights, makespan, new_bar_waste_cm, new_leftover_waste_cm, reuse_waste_cm):
    t = objective_terms(weights, makespan, new_bar_waste_cm, new_leftover_waste_cm, reuse_waste_cm)
    return t[0] + t[1] + t[2] + t[3]


def waste_buckets_cm(ch: Chromosome, inst: Instance, pats: PatternSet) -> tuple[int, int, int]:
    """Total waste (cm) per objective bucket: new-bar cuts, leftover-making cuts,
    leftover reuse (leftover cuts plus splices)."""
    new_bar = new_leftover = reuse = 0
    for pid, freq in ch.genes:
        pattern = pats.by_id(pid)
        if isinstance(pattern, CuttingPattern):
            if pattern.source_bar > inst.num_bar_kinds:
                reuse += pattern.waste * freq
            elif pattern.makes_leftover:
                new_leftover += pattern.waste * freq
            else:
                new_bar += pattern.waste * freq
        elif isinstance(pattern, OverlappingPattern):
            reuse += pattern.waste * freq
    return new_bar, new_leftover, reuse


def beam_production(ch: Chromosome, inst: Instance, pats: PatternSet) -> dict[tuple[int, int], int]:
    """Beams produced per (type, length index), both 1-based."""
    produced: dict[tuple[int, int], int] = {}
    for c, bt in enumerate(inst.beam_types, start=1):
        for k in range(1, bt.num_lengths + 1):
            produced[(c, k)] = 0
    for pid, freq in ch.genes:
        pattern = pats.by_id(pid)
        if isinstance(pattern, PackingPattern):
            for k, count in enumerate(pattern.counts, start=1):
                produced[(pattern.beam_type, k)] += count * freq
    return produced


def bar_usage(ch: Chromosome, inst: Instance, pats: PatternSet) -> dict[int, int]:
    """Stock bars consumed per bar kind (1-based), cuts plus splice inputs."""
    usage = {w: 0 for w in range(1, inst.num_bar_kinds + inst.num_leftover_kinds + 1)}
    for pid, freq in ch.genes:
        pattern = pats.by_id(pid)
        if isinstance(pattern, CuttingPattern):
            usage[pattern.source_bar] += freq
        elif isinstance(pattern, OverlappingPattern):
            for v, count in enumerate(pattern.leftover_counts, start=1):
                if count:
                    usage[inst.num_bar_kinds + v] += count * freq
    return usage


def bars_produced(ch: Chromosome, inst: Instance, pats: PatternSet) -> dict[int, int]:
    """Mold-length bars produced per class by cutting and overlapping genes."""
    produced = {g: 0 for g in range(1, inst.num_mold_classes + 1)}
    for pid, freq in ch.genes:
        pattern = pats.by_id(pid)
        if isinstance(pattern, CuttingPattern):
            for g, count in enumerate(pattern.item_counts, start=1):
                produced[g] += count * freq
        elif isinstance(pattern, OverlappingPattern):
            produced[pattern.produced_class] += freq
    return produced


def bars_required(ch: Chromosome, inst: Instance, pats: PatternSet) -> dict[int, int]:
    """Bars the packing genes call for, per mold class."""
    required = {g: 0 for g in range(1, inst.num_mold_classes + 1)}
    for pid, freq in ch.genes:
        pattern = pats.by_id(pid)
        if isinstance(pattern, PackingPattern):
            bars = inst.beam_types[pattern.beam_type - 1].bars_per_beam
            required[pattern.mold_class] += bars * freq
    return required


def classify_infeasibility(ch: Chromosome, inst: Instance, pats: PatternSet) -> InfeasibilityReport:
    """Check demand coverage, stock limits and bar balance for a chromosome."""
    for pid, _ in ch.genes:
        if pid not in pats:
            raise UnknownPatternError(f"unknown pattern id {pid}")
    report = InfeasibilityReport()
    produced_beams = beam_production(ch, inst, pats)
    for c, bt in enumerate(inst.beam_types, start=1):
        for k, demand in enumerate(bt.demands, start=1):
            short = demand - produced_beams[(c, k)]
            if short > 0:
                report.demand_shortfall[(c, k)] = short
    usage = bar_usage(ch, inst, pats)
    for w, used in usage.items():
        excess = used - inst.stock[w - 1]
        if excess > 0:
            report.stock_excess[w] = excess
    produced = bars_produced(ch, inst, pats)
    required = bars_required(ch, inst, pats)
    for g in produced:
        if produced[g] != required[g]:
            report.balance_mismatch[g] = (produced[g], required[g])
    return report


def decode_schedule(ch: Chromosome, inst: Instance, pats: PatternSet) -> Schedule:
    """Turn gene frequencies into a mold/period plan.

    Genes are scanned in order; every use of a packing gene goes, one at a
    time, to the currently least-loaded mold of its length class (ties to the
    lowest mold index).  Occupied periods therefore form a prefix per mold.
    """
    loads = [0] * inst.num_molds
    assignments: list[list[tuple[int, int]]] = [[] for _ in range(inst.num_molds)]
    bar_requirements = {g: 0 for g in range(1, inst.num_mold_classes + 1)}
    class_molds = {
        g: inst.molds_in_class(g) for g in range(1, inst.num_mold_classes + 1)
    }
    for pid, freq in ch.genes:
        if pid not in pats:
            raise UnknownPatternError(f"unknown pattern id {pid}")
        pattern = pats.by_id(pid)
        if not isinstance(pattern, PackingPattern):
            continue
        molds = class_molds[pattern.mold_class]
        bars = inst.beam_types[pattern.beam_type - 1].bars_per_beam
        for _ in range(freq):
            target = min(molds, key=lambda m: loads[m])
            start = loads[target] + 1
            if loads[target] + pattern.duration > inst.horizon:
                raise HorizonError(
                    f"pattern {pid} cannot finish within the horizon "
                    f"(mold {target + 1} load {loads[target]}, duration {pattern.duration})"
                )
            assignments[target].append((pid, start))
            loads[target] += pattern.duration
            bar_requirements[pattern.mold_class] += bars
    makespan = max(loads) if loads else 0
    w2, w3, w4 = waste_buckets_cm(ch, inst, pats)
    return Schedule(
        assignments=assignments,
        loads=loads,
        makespan=makespan,
        used_periods=[t < makespan for t in range(inst.horizon)],
        bar_requirements=bar_requirements,
        new_bar_waste_cm=w2,
        new_leftover_waste_cm=w3,
        reuse_waste_cm=w4,
        weights=inst.weights,
    )


def evaluate(ch: Chromosome, inst: Instance, pats: PatternSet) -> tuple[float, Schedule]:
    """Fitness plus the decoded schedule; raises on any infeasibility."""
    report = classify_infeasibility(ch, inst, pats)
    if not report.feasible:
        raise InfeasibleChromosomeError(report)
    schedule = decode_schedule(ch, inst, pats)
    return schedule.objective, schedule


def fitness(ch: Chromosome, inst: Instance, pats: PatternSet) -> float:
    value, _ = evaluate(ch, inst, pats)
    return value


def fitness_cm(ch: Chromosome, inst: Instance, pats: PatternSet) -> Fraction:
    """Exact unweighted objective in centi-units: 100*makespan + waste cm."""
    _, schedule = evaluate(ch, inst, pats)
    return Fraction(
        100 * schedule.makespan
        + schedule.new_bar_waste_cm
        + schedule.new_leftover_waste_cm
        + schedule.reuse_waste_cm
    )


# -- exhaustive oracle ------------------------------------------------------


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def tick(self):
        self.used += 1
        if self.used > self.limit:
            raise BudgetExceededError(f"search exceeded {self.limit} nodes")


def _min_makespan_order(
    class_genes: dict[int, list[Gene]],
    inst: Instance,
    pats: PatternSet,
    budget: _Budget,
) -> tuple[int, list[Gene]] | None:
    """Cheapest gene ordering under the decoder, or None if nothing fits.

    Classes are independent under the decoder, so each class is ordered
    separately by trying every permutation of its genes.
    """
    ordered: list[Gene] = []
    worst = 0
    for g, genes in sorted(class_genes.items()):
        if not genes:
            continue
        molds = inst.molds_in_class(g)
        best_ms: int | None = None
        best_perm: tuple[Gene, ...] | None = None
        for perm in itertools.permutations(genes):
            budget.tick()
            loads = [0] * len(molds)
            feasible = True
            for pid, freq in perm:
                duration = pats.by_id(pid).duration
                for _ in range(freq):
                    i = loads.index(min(loads))
                    if loads[i] + duration > inst.horizon:
                        feasible = False
                        break
                    loads[i] += duration
                if not feasible:
                    break
            if not feasible:
                continue
            ms = max(loads)
            if best_ms is None or ms < best_ms:
                best_ms, best_perm = ms, perm
        if best_ms is None:
            return None
        ordered.extend(best_perm)
        worst = max(worst, best_ms)
    return worst, ordered


def _weighted_min_ratio(inst: Instance, pats: PatternSet) -> dict[int, float]:
    """Cheapest weighted waste per produced bar, per class (0 when unproducible).

    Waste is spread over a pattern's total item count so the resulting
    per-class floor stays admissible for patterns producing several classes
    in one cut.
    """
    l2, l3, l4 = inst.weights[1], inst.weights[2], inst.weights[3]
    ratios: dict[int, float] = {}
    for g in range(1, inst.num_mold_classes + 1):
        best = None
        for cut in pats.cutting:
            if cut.item_counts[g - 1] == 0:
                continue
            if cut.source_bar > inst.num_bar_kinds:
                weight = l4
            elif cut.makes_leftover:
                weight = l3
            else:
                weight = l2
            value = weight * cut.waste / cut.total_items / 100.0
            if best is None or value < best:
                best = value
        for over in pats.overlapping:
            if over.produced_class == g:
                value = l4 * over.waste / 100.0
                if best is None or value < best:
                    best = value
        ratios[g] = best if best is not None else 0.0
    return ratios


def _min_waste_plan(
    targets: tuple[int, ...],
    inst: Instance,
    pats: PatternSet,
    max_freq: int,
    max_genes: int,
    budget: _Budget,
    cache: dict,
    ratios: dict[int, float],
) -> tuple[float, tuple[Gene, ...]] | None:
    """Cheapest cutting/overlap gene set producing exactly the target bars.

    Returns (weighted waste, genes) or None when the targets cannot be met
    within stock and the gene budget.
    """
    key = (targets, max_genes)
    if key in cache:
        return cache[key]
    producers = list(pats.cutting) + list(pats.overlapping)
    W = inst.num_bar_kinds
    n_classes = inst.num_mold_classes
    best: tuple[float, tuple[Gene, ...]] | None = None

    def pattern_production(pattern) -> tuple[int, ...]:
        if isinstance(pattern, CuttingPattern):
            return pattern.item_counts
        out = [0] * n_classes
        out[pattern.produced_class - 1] = 1
        return tuple(out)

    def pattern_usage(pattern) -> dict[int, int]:
        if isinstance(pattern, CuttingPattern):
            return {pattern.source_bar: 1}
        return {
            W + v: count
            for v, count in enumerate(pattern.leftover_counts, start=1)
            if count
        }

    def pattern_weighted_waste(pattern) -> float:
        if isinstance(pattern, CuttingPattern):
            if pattern.source_bar > W:
                weight = inst.weights[3]
            elif pattern.makes_leftover:
                weight = inst.weights[2]
            else:
                weight = inst.weights[1]
        else:
            weight = inst.weights[3]
        return weight * pattern.waste / 100.0

    def remaining_bound(deficit: tuple[int, ...]) -> float:
        return sum(d * ratios[g + 1] for g, d in enumerate(deficit) if d > 0)

    def rec(idx: int, produced: list[int], usage: dict[int, int], waste: float, genes: list[Gene]):
        nonlocal best
        budget.tick()
        deficit = tuple(t - p for t, p in zip(targets, produced))
        if all(d == 0 for d in deficit):
            if best is None or waste < best[0]:
                best = (waste, tuple(genes))
            return
        if idx == len(producers) or len(genes) >= max_genes:
            return
        if best is not None and waste + remaining_bound(deficit) >= best[0]:
            return
        pattern = producers[idx]
        production = pattern_production(pattern)
        uses = pattern_usage(pattern)
        limit = max_freq
        for g, count in enumerate(production):
            if count > 0:
                limit = min(limit, deficit[g] // count)
        for w, need in uses.items():
            available = inst.stock[w - 1] - usage.get(w, 0)
            limit = min(limit, available // need)
        # Frequencies high-to-low so complete plans appear early.
        for freq in range(limit, 0, -1):
            for g, count in enumerate(production):
                produced[g] += count * freq
            for w, need in uses.items():
                usage[w] = usage.get(w, 0) + need * freq
            genes.append((pattern.id, freq))
            rec(idx + 1, produced, usage, waste + pattern_weighted_waste(pattern) * freq, genes)
            genes.pop()
            for g, count in enumerate(production):
                produced[g] -= count * freq
            for w, need in uses.items():
                usage[w] -= need * freq
        rec(idx + 1, produced, usage, waste, genes)

    rec(0, [0] * n_classes, {}, 0.0, [])
    cache[key] = best
    return best


def exhaustive_optimum(
    inst: Instance,
    pats: PatternSet,
    max_freq: int = 10,
    max_genes: int = 8,
    budget: int = 20_000_000,
) -> tuple[Chromosome, float] | None:
    """Exact minimum fitness over all feasible chromosomes within the caps.

    Pure enumeration with pruning; independent of the genetic solver.  Returns
    None when no feasible chromosome exists within the caps.
    """
    counter = _Budget(budget)
    packing = pats.packing
    demands = [
        (c, k, d)
        for c, bt in enumerate(inst.beam_types, start=1)
        for k, d in enumerate(bt.demands, start=1)
        if d > 0
    ]
    ratios = _weighted_min_ratio(inst, pats)
    l1 = inst.weights[0]
    cache: dict = {}
    best_value: float | None = None
    best_genes: list[Gene] | None = None

    def makespan_floor(uses: dict[int, int]) -> int:
        worst = 0
        for g, load in uses.items():
            if load:
                molds = len(inst.molds_in_class(g))
                worst = max(worst, -((-load) // molds))
        return worst

    def rec(idx: int, produced: dict, class_load: dict, class_genes: dict, bars: dict, n_genes: int):
        nonlocal best_value, best_genes
        counter.tick()
        waste_floor = sum(bars[g] * ratios[g] for g in bars)
        if best_value is not None and l1 * makespan_floor(class_load) + waste_floor >= best_value:
            return
        covered = all(produced.get((c, k), 0) >= d for c, k, d in demands)
        if covered:
            order = _min_makespan_order(class_genes, inst, pats, counter)
            if order is not None:
                makespan, packing_genes = order
                lower = l1 * makespan + waste_floor
                if best_value is None or lower < best_value:
                    plan = _min_waste_plan(
                        tuple(bars[g] for g in sorted(bars)),
                        inst,
                        pats,
                        max_freq,
                        max_genes - len(packing_genes),
                        counter,
                        cache,
                        ratios,
                    )
                    if plan is not None:
                        value = l1 * makespan + plan[0]
                        if best_value is None or value < best_value:
                            best_value = value
                            best_genes = list(packing_genes) + list(plan[1])
        if idx == len(packing) or n_genes >= max_genes:
            return
        pattern = packing[idx]
        bt = inst.beam_types[pattern.beam_type - 1]
        g = pattern.mold_class
        capacity = len(inst.molds_in_class(g)) * inst.horizon
        limit = min(max_freq, (capacity - class_load[g]) // pattern.duration)
        for freq in range(1, limit + 1):
            for k, count in enumerate(pattern.counts, start=1):
                key = (pattern.beam_type, k)
                produced[key] = produced.get(key, 0) + count * freq
            class_load[g] += pattern.duration * freq
            class_genes[g].append((pattern.id, freq))
            bars[g] += bt.bars_per_beam * freq
            rec(idx + 1, produced, class_load, class_genes, bars, n_genes + 1)
            bars[g] -= bt.bars_per_beam * freq
            class_genes[g].pop()
            class_load[g] -= pattern.duration * freq
            for k, count in enumerate(pattern.counts, start=1):
                key = (pattern.beam_type, k)
                produced[key] -= count * freq
        rec(idx + 1, produced, class_load, class_genes, bars, n_genes)

    classes = range(1, inst.num_mold_classes + 1)
    rec(0, {}, {g: 0 for g in classes}, {g: [] for g in classes}, {g: 0 for g in classes}, 0)
    if best_genes is None:
        return None
    return Chromosome(best_genes), best_value
