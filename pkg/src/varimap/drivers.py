"""Variation-driver taxonomy, strength questionnaire, and driver ordering."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import normalize_label


class DriverClass(str, Enum):
    OPERATIONAL = "operational"  # how
    PRODUCT = "product"          # what
    MARKET = "market"            # where
    CUSTOMER = "customer"        # who
    TIME = "time"                # when


class StrengthRating(str, Enum):
    VERY_STRONG = "very_strong"
    STRONG = "strong"
    SOMEWHAT_STRONG = "somewhat_strong"
    NOT_STRONG = "not_strong"


# Strict total order, strongest first.
STRENGTH_ORDER: dict[StrengthRating, int] = {
    StrengthRating.VERY_STRONG: 3,
    StrengthRating.STRONG: 2,
    StrengthRating.SOMEWHAT_STRONG: 1,
    StrengthRating.NOT_STRONG: 0,
}


@dataclass(frozen=True)
class VariationDriver:
    id: str
    name: str
    driver_class: DriverClass
    subcategories: tuple[str, ...]
    strength: StrengthRating
    rationale: str = ""

    def __post_init__(self):
        object.__setattr__(self, "subcategories", tuple(self.subcategories))
        if not self.subcategories:
            raise ValueError(f"driver {self.id!r} needs at least one subcategory")
        seen = [normalize_label(s) for s in self.subcategories]
        if len(seen) != len(set(seen)):
            raise ValueError(f"driver {self.id!r} has duplicate subcategories after normalization")


@dataclass(frozen=True)
class StrengthAnswers:
    q_very_strong: bool
    q_strong: bool
    q_somewhat: bool


# The three-question wizard, strongest first. A yes to the first question
# that applies fixes the rating; all-no means NotStrong. The first entry
# reads inverted in its source material (it asks whether a merger would be
# impossible without top-management backing); a yes here means exactly that.
STRENGTH_QUESTIONS: tuple[tuple[StrengthRating, str], ...] = (
    (StrengthRating.VERY_STRONG,
     "Would a merger of the variants due to this driver be impossible without a "
     "decision from the highest level of management, because it would affect the "
     "business model or structure in a fundamental way?"),
    (StrengthRating.STRONG,
     "Would a merger of the variants (if desirable) require considerable investment, "
     "including noticeable re-organisation, and require a decision from a high level "
     "of management?"),
    (StrengthRating.SOMEWHAT_STRONG,
     "Would a merger of the variants (if desirable) require some investment, include "
     "some re-organisation noticeable to the concerned business unit only, and require "
     "a decision from mid-level management?"),
)


_CATALOG: tuple[tuple[DriverClass, int, str], ...] = (
    (DriverClass.OPERATIONAL, 1, "Are there different ways or modes in which this process is performed (how)?"),
    (DriverClass.PRODUCT, 1, "How many products or services does the process produce (what)?"),
    (DriverClass.MARKET, 1, "In how many markets or locations does the process operate (where)?"),
    (DriverClass.CUSTOMER, 1, "How many different customer segments does the process serve (who)?"),
    (DriverClass.TIME, 1, "Does the process run differently at particular times, seasons, or deadlines (when)?"),
    (DriverClass.OPERATIONAL, 2, "For each mode of operation: which steps differ, and which systems or resources drive the difference?"),
    (DriverClass.PRODUCT, 2, "For each product or service: does its handling differ enough to call it a separate variant?"),
    (DriverClass.MARKET, 2, "For each market or location: which local rules or channels change how the process runs?"),
    (DriverClass.CUSTOMER, 2, "How many sub-segments of customers are served in this process, and does each get distinct treatment?"),
    (DriverClass.TIME, 2, "For each timing condition: what exactly changes - steps, ordering, or responsible roles?"),
)


def elicitation_catalog() -> list[tuple[DriverClass, int, str]]:
    """Static two-round question catalog used to uncover drivers per class."""
    return list(_CATALOG)


def assess_strength(answers: StrengthAnswers) -> StrengthRating:
    """First positive answer wins, walking strongest to weakest."""
    if answers.q_very_strong:
        return StrengthRating.VERY_STRONG
    if answers.q_strong:
        return StrengthRating.STRONG
    if answers.q_somewhat:
        return StrengthRating.SOMEWHAT_STRONG
    return StrengthRating.NOT_STRONG


def order_drivers(drivers: list[VariationDriver]) -> list[VariationDriver]:
    """Stable sort: strength descending, then fewest subcategories, then name."""
    return sorted(
        drivers,
        key=lambda d: (-STRENGTH_ORDER[d.strength], len(d.subcategories), normalize_label(d.name)),
    )
