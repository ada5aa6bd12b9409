"""Split generation: common-noun-disjoint grouping and plain random splits."""

from __future__ import annotations

import random

from .types import DatasetExample, SplitSpec

Splits = tuple[list[DatasetExample], list[DatasetExample], list[DatasetExample]]


class InfeasibleSplitError(Exception):
    """A common-noun group is too large to fit any split budget."""


def split_random(examples: list[DatasetExample], spec: SplitSpec) -> Splits:
    """Shuffle by ``spec.seed`` and cut at the exact requested sizes."""
    if spec.mode != "random":
        raise ValueError(f"split_random requires mode 'random', got {spec.mode!r}")
    sizes = spec.resolve_sizes(len(examples))
    order = list(range(len(examples)))
    random.Random(spec.seed).shuffle(order)
    shuffled = [examples[i] for i in order]
    train = shuffled[: sizes[0]]
    validation = shuffled[sizes[0] : sizes[0] + sizes[1]]
    test = shuffled[sizes[0] + sizes[1] :]
    return train, validation, test


def split_by_common_noun(examples: list[DatasetExample], spec: SplitSpec) -> Splits:
    """Split so that no common noun appears in more than one set.

    Examples are grouped by common noun; group order is shuffled by
    ``spec.seed`` and then sorted by descending size (stable), and each group
    goes to the split with the largest remaining budget.  The size sort keeps
    realized sizes close to the targets: large groups are placed while
    budgets are roomy and singleton groups top the splits off.
    """
    if spec.mode != "common-noun-disjoint":
        raise ValueError(f"split_by_common_noun requires mode 'common-noun-disjoint', got {spec.mode!r}")
    sizes = spec.resolve_sizes(len(examples))

    groups: dict[str, list[DatasetExample]] = {}
    for example in examples:
        groups.setdefault(example.compound.common_noun, []).append(example)

    group_items = list(groups.items())
    random.Random(spec.seed).shuffle(group_items)
    group_items.sort(key=lambda item: len(item[1]), reverse=True)

    largest_budget = max(sizes)
    budgets = list(sizes)
    assignment: dict[str, int] = {}
    for noun, members in group_items:
        if len(members) > largest_budget:
            raise InfeasibleSplitError(
                f"common-noun group {noun!r} has {len(members)} examples, "
                f"larger than the largest split budget {largest_budget}"
            )
        target = max(range(3), key=lambda i: (budgets[i], -i))
        assignment[noun] = target
        budgets[target] -= len(members)

    splits: Splits = ([], [], [])
    for example in examples:
        splits[assignment[example.compound.common_noun]].append(example)
    return splits
