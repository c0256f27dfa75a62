"""Enumeration of packing, cutting and overlapping patterns.

Pattern ids are global and contiguous: packing patterns take 1..r, cutting
patterns r+1..r+H and overlapping patterns r+H+1..r+H+O, in a deterministic
order so that chromosomes and emitted models are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

from .instance import Instance


@dataclass(frozen=True)
class PackingPattern:
    """Beams of one type cast together in a mold of one length class.

    A pattern is maximal for its class: no further beam of its type fits.
    """

    id: int
    beam_type: int  # 1-based
    counts: tuple[int, ...]  # per length of the beam type
    mold_class: int  # 1-based class the pattern is maximal for
    used_capacity: int  # cm
    duration: int  # periods (curing time of the beam type)


@dataclass(frozen=True)
class CuttingPattern:
    """Recipe cutting one stock bar into mold-length items plus leftovers."""

    id: int
    source_bar: int  # 1-based index into bar_lengths
    item_counts: tuple[int, ...]  # per mold class
    leftover_counts: tuple[int, ...]  # per leftover kind; at most one kind positive
    waste: int  # cm

    @property
    def total_items(self) -> int:
        return sum(self.item_counts)

    @property
    def makes_leftover(self) -> bool:
        return any(self.leftover_counts)

    @property
    def leftover_kind(self) -> int | None:
        """1-based kind of the produced leftover, if any."""
        for v, count in enumerate(self.leftover_counts, start=1):
            if count:
                return v
        return None


@dataclass(frozen=True)
class OverlappingPattern:
    """Two leftovers spliced into one mold-length bar."""

    id: int
    produced_class: int  # 1-based
    leftover_counts: tuple[int, ...]  # per leftover kind, summing to 2
    waste: int  # cm, at least the splice loss


@dataclass
class PatternSet:
    """All patterns of an instance under the global id scheme."""

    packing: list[PackingPattern]
    cutting: list[CuttingPattern]
    overlapping: list[OverlappingPattern]

    def __post_init__(self):
        self._by_id = {}
        for p in self.packing:
            self._by_id[p.id] = p
        for p in self.cutting:
            self._by_id[p.id] = p
        for p in self.overlapping:
            self._by_id[p.id] = p

    @property
    def num_packing(self) -> int:
        return len(self.packing)

    @property
    def num_cutting(self) -> int:
        return len(self.cutting)

    @property
    def num_overlapping(self) -> int:
        return len(self.overlapping)

    @property
    def total(self) -> int:
        return len(self._by_id)

    def __contains__(self, pattern_id: int) -> bool:
        return pattern_id in self._by_id

    def by_id(self, pattern_id: int):
        return self._by_id[pattern_id]

    def packing_in_class(self, mold_class: int) -> list[PackingPattern]:
        return [p for p in self.packing if p.mold_class == mold_class]

    def cutting_producing(self, mold_class: int) -> list[CuttingPattern]:
        return [p for p in self.cutting if p.item_counts[mold_class - 1] > 0]

    def overlapping_producing(self, mold_class: int) -> list[OverlappingPattern]:
        return [p for p in self.overlapping if p.produced_class == mold_class]


def contains(p: PackingPattern, q: PackingPattern) -> bool:
    """True when p packs at least as many beams of every length of the same type."""
    if p.beam_type != q.beam_type:
        return False
    return all(a >= b for a, b in zip(p.counts, q.counts))


def _packing_tuples(inst: Instance, maximal_only: bool):
    """Yield (beam_type, mold_class, counts, used) in deterministic order.

    The count vectors of each (type, class) block are ordered by ascending
    reversed tuple, which lists the variant richest in the first (shortest)
    length first.
    """
    found = []
    for c, bt in enumerate(inst.beam_types, start=1):
        lengths = bt.lengths
        q = len(lengths)
        shortest = min(lengths)
        for g, cap in enumerate(inst.distinct_mold_lengths, start=1):
            lower = cap - shortest if maximal_only else 0
            counts = [0] * q

            def rec(k: int, used: int):
                if k == q:
                    if used > lower and used > 0:
                        found.append((c, g, tuple(counts), used))
                    return
                limit = (cap - used) // lengths[k]
                for n in range(limit + 1):
                    counts[k] = n
                    rec(k + 1, used + n * lengths[k])
                counts[k] = 0

            rec(0, 0)
    found.sort(key=lambda item: (item[0], item[1], tuple(reversed(item[2]))))
    return found


def enumerate_packing_patterns(inst: Instance, maximal_only: bool = True) -> list[PackingPattern]:
    """All packing patterns, maximal for their mold class unless disabled."""
    out = []
    for pid, (c, g, counts, used) in enumerate(_packing_tuples(inst, maximal_only), start=1):
        out.append(
            PackingPattern(
                id=pid,
                beam_type=c,
                counts=counts,
                mold_class=g,
                used_capacity=used,
                duration=inst.beam_types[c - 1].curing_time,
            )
        )
    return out


def _cutting_tuples(inst: Instance):
    """Yield (source_bar, item_counts, leftover_counts, waste), sorted."""
    classes = inst.distinct_mold_lengths
    W = inst.num_bar_kinds
    V = inst.num_leftover_kinds
    found = []
    for w, bar in enumerate(inst.bar_lengths, start=1):
        items = [0] * len(classes)

        def rec(k: int, used: int):
            if k == len(classes):
                if not any(items):
                    return
                remaining = bar - used
                found.append((w, tuple(items), tuple([0] * V), remaining))
                if w <= W:
                    # A cut of a new bar may set aside one leftover kind.
                    for v in range(1, V + 1):
                        piece = inst.leftover_length(v)
                        for n in range(1, remaining // piece + 1):
                            leftovers = [0] * V
                            leftovers[v - 1] = n
                            found.append(
                                (w, tuple(items), tuple(leftovers), remaining - n * piece)
                            )
                return
            limit = (bar - used) // classes[k]
            for n in range(limit + 1):
                items[k] = n
                rec(k + 1, used + n * classes[k])
            items[k] = 0

        rec(0, 0)
    found.sort(key=lambda item: (item[0], item[1], item[2]))
    return found


def enumerate_cutting_patterns(inst: Instance) -> list[CuttingPattern]:
    """All cutting patterns, ids following the packing block."""
    offset = len(_packing_tuples(inst, True))
    return _cutting_list(inst, offset)


def _cutting_list(inst: Instance, offset: int) -> list[CuttingPattern]:
    out = []
    for pid, (w, items, leftovers, waste) in enumerate(_cutting_tuples(inst), start=offset + 1):
        out.append(
            CuttingPattern(
                id=pid,
                source_bar=w,
                item_counts=items,
                leftover_counts=leftovers,
                waste=waste,
            )
        )
    return out


def _overlapping_tuples(inst: Instance):
    """Yield (produced_class, leftover_counts, waste) for all splice pairs."""
    V = inst.num_leftover_kinds
    found = []
    for g, cap in enumerate(inst.distinct_mold_lengths, start=1):
        for v1 in range(1, V + 1):
            for v2 in range(v1, V + 1):
                combined = inst.leftover_length(v1) + inst.leftover_length(v2)
                if combined < cap + inst.overlap_loss:
                    continue
                counts = [0] * V
                counts[v1 - 1] += 1
                counts[v2 - 1] += 1
                found.append((g, tuple(counts), combined - cap))
    found.sort(key=lambda item: (item[0], item[1]))
    return found


def enumerate_overlapping_patterns(inst: Instance) -> list[OverlappingPattern]:
    """All overlapping patterns, ids following the cutting block."""
    offset = len(_packing_tuples(inst, True)) + len(_cutting_tuples(inst))
    return _overlapping_list(inst, offset)


def _overlapping_list(inst: Instance, offset: int) -> list[OverlappingPattern]:
    out = []
    for pid, (g, counts, waste) in enumerate(_overlapping_tuples(inst), start=offset + 1):
        out.append(
            OverlappingPattern(id=pid, produced_class=g, leftover_counts=counts, waste=waste)
        )
    return out


def generate_patterns(inst: Instance, maximal_only: bool = True) -> PatternSet:
    """Enumerate all three pattern kinds and assign the global id scheme."""
    packing = enumerate_packing_patterns(inst, maximal_only=maximal_only)
    cutting = _cutting_list(inst, len(packing))
    overlapping = _overlapping_list(inst, len(packing) + len(cutting))
    return PatternSet(packing=packing, cutting=cutting, overlapping=overlapping)
