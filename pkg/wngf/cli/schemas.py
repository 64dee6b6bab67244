from __future__ import annotations

from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.config import settings
from ..domain.models import BrokerageMode, DichotomizationSpec

Command = Literal["compute", "dichotomize", "compare", "ecdf", "sweep"]


class RunConfig(BaseModel):
    """Validated form of one CLI invocation."""

    model_config = ConfigDict(frozen=True)

    command: Command
    edges: Optional[Path] = None
    matrices: List[Path] = Field(default_factory=list)
    aggregate: bool = False
    groups: Optional[Path] = None
    mode: BrokerageMode = BrokerageMode.WEIGHTED
    drop_self_loops: bool = False
    include_isolates: bool = False
    delimiter: str = ","
    no_header: bool = False

    method: Optional[Literal["threshold", "backbone"]] = None
    fraction: Optional[float] = None
    alpha: Optional[float] = None
    levels: Optional[List[float]] = None

    out: Optional[Path] = None
    matrix_out: Optional[Path] = None
    groups_out: Optional[Path] = None
    a: Optional[Path] = None
    b: Optional[Path] = None
    label_a: Optional[str] = None
    label_b: Optional[str] = None
    profiles: List[Path] = Field(default_factory=list)
    top_k: int = Field(default=settings.top_k, ge=1)
    top: Optional[int] = Field(default=None, ge=1)

    oracle_check: bool = False
    workers: Optional[int] = Field(default=None, ge=1)
    verbose: bool = False

    @model_validator(mode="after")
    def _check_inputs(self) -> "RunConfig":
        if self.command in ("compute", "dichotomize", "sweep"):
            if (self.edges is None) == (not self.matrices):
                raise ValueError("--edges/--matrix: give exactly one input source")
            if len(self.matrices) > 1 and not self.aggregate:
                raise ValueError("--matrix: several matrices need --aggregate")
        if self.command == "compute":
            if self.groups is None:
                raise ValueError("--groups: required for compute")
            if self.method is not None and self.mode is not BrokerageMode.BINARY:
                raise ValueError("--method: dichotomization only applies to --mode binary")
        if self.command in ("compute", "dichotomize") and self.method is None:
            if self.fraction is not None or self.alpha is not None:
                raise ValueError("--method: --fraction/--alpha need a dichotomization method")
        if self.command == "dichotomize" and self.method is None:
            raise ValueError("--method: required for dichotomize")
        if self.groups_out is not None and self.groups is None:
            raise ValueError("--groups-out: needs --groups")
        if self.command == "sweep" and self.method is None:
            raise ValueError("--method: required for sweep")
        if self.command == "compare" and (self.a is None or self.b is None):
            raise ValueError("--a/--b: compare needs two profiles")
        if self.command == "ecdf" and not self.profiles:
            raise ValueError("--profiles: at least one profile is required")
        return self

    def dichotomization(self) -> Optional[DichotomizationSpec]:
        if self.method is None or self.command == "sweep":
            return None
        return DichotomizationSpec(method=self.method, fraction=self.fraction, alpha=self.alpha)
