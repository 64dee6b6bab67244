from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class Role(str, Enum):
    COORDINATOR = "coordinator"
    GATEKEEPER = "gatekeeper"
    REPRESENTATIVE = "representative"
    ITINERANT = "itinerant"
    LIAISON = "liaison"

    @property
    def code(self) -> int:
        return _ROLE_CODES[self]


ROLES: tuple[Role, ...] = tuple(Role)
_ROLE_CODES = {role: i for i, role in enumerate(ROLES)}


class BrokerageMode(str, Enum):
    WEIGHTED = "wngf"
    BINARY = "binary"


@dataclass(frozen=True, eq=False)
class RoleCounts:
    """Raw role counts, one row per node (graph index order), one column per Role."""

    nodes: tuple[str, ...]
    counts: np.ndarray  # shape (n, 5), int64

    def __post_init__(self) -> None:
        self.counts.setflags(write=False)

    def of(self, node: str) -> dict[Role, int]:
        row = self.counts[self.nodes.index(node)]
        return {role: int(row[role.code]) for role in ROLES}

    def total(self, node: str) -> int:
        return int(self.counts[self.nodes.index(node)].sum())

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RoleCounts):
            return NotImplemented
        return self.nodes == other.nodes and np.array_equal(self.counts, other.counts)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class BrokerageProfile:
    nodes: tuple[str, ...]
    groups: tuple[str, ...]
    counts: np.ndarray        # c_r^i, (n, 5) int64
    denominators: np.ndarray  # n_b^i, (n, 5) int64
    scores: np.ndarray        # p_r^i, (n, 5) float64 in [0, 1]

    def __post_init__(self) -> None:
        for arr in (self.counts, self.denominators, self.scores):
            arr.setflags(write=False)

    def index_of(self, node: str) -> int:
        return self.nodes.index(node)

    def score(self, node: str, role: Role) -> float:
        return float(self.scores[self.index_of(node), role.code])

    def count(self, node: str, role: Role) -> int:
        return int(self.counts[self.index_of(node), role.code])

    def role_scores(self, role: Role) -> np.ndarray:
        return self.scores[:, role.code]

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)


class DichotomizationSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: Literal["threshold", "backbone"]
    fraction: Optional[float] = Field(default=None, ge=0.0, lt=1.0)
    alpha: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    keep_weights: bool = False

    @model_validator(mode="after")
    def _one_parameter(self) -> "DichotomizationSpec":
        if self.method == "threshold":
            if self.fraction is None or self.alpha is not None:
                raise ValueError("threshold dichotomization takes a fraction and no alpha")
        elif self.alpha is None or self.fraction is not None:
            raise ValueError("backbone dichotomization takes an alpha and no fraction")
        return self

    @property
    def level(self) -> float:
        return self.fraction if self.method == "threshold" else self.alpha  # type: ignore[return-value]

    def describe(self) -> str:
        if self.method == "threshold":
            return f"threshold fraction={self.fraction:g}"
        return f"backbone alpha={self.alpha:g}"


@dataclass(frozen=True)
class RetentionReport:
    nodes_before: int
    nodes_retained: int
    edges_before: int
    edges_after: int
    isolated: tuple[str, ...] = field(default=())

    @property
    def all_nodes_retained(self) -> bool:
        return self.nodes_retained == self.nodes_before

    def summary(self) -> str:
        return (
            f"nodes {self.nodes_retained}/{self.nodes_before} retained, "
            f"edges {self.edges_after}/{self.edges_before} kept"
        )
