"""Evaluation report rows and aggregate summaries."""

from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, Field

CSV_COLUMNS = ["problem_id", "time_s", "success", "ftr", "bsd", "var", "n_feasible"]


class ReportRow(BaseModel):
    problem_id: int
    time_s: float = Field(ge=0)
    success: bool
    ftr: float = Field(ge=0, le=1)
    bsd: Optional[float] = None
    var: float = Field(ge=0)
    n_feasible: int = Field(ge=0)
    n_samples: int = Field(ge=1)
    bsd_undefined: bool = False
    var_flagged: bool = False

    def csv_row(self) -> List[str]:
        return [
            str(self.problem_id),
            repr(self.time_s),
            str(int(self.success)),
            repr(self.ftr),
            "" if self.bsd is None else repr(self.bsd),
            repr(self.var),
            str(self.n_feasible),
        ]


class MetricSummary(BaseModel):
    mean: Optional[float] = None
    std: Optional[float] = None
    count: int = 0


class ReportSummary(BaseModel):
    label: str
    problems: int
    metrics: Dict[str, MetricSummary] = Field(default_factory=dict)


MODE_COLUMNS = ["problem_id", "n_feasible", "modes", "split_obstacles"]
SWEEP_COLUMNS = ["w", "problems", "time_s", "success", "ftr", "bsd", "var", "multimodal"]


class ModeRow(BaseModel):
    problem_id: int
    n_feasible: int = Field(ge=0)
    modes: int = Field(ge=0)
    split_obstacles: int = Field(ge=0)

    def csv_row(self) -> List[str]:
        return [str(self.problem_id), str(self.n_feasible), str(self.modes), str(self.split_obstacles)]


class SweepRow(BaseModel):
    """Problem means for one guidance strength; ``multimodal`` is the share of problems with two or more modes."""

    w: float
    problems: int = Field(ge=0)
    time_s: Optional[float] = None
    success: Optional[float] = None
    ftr: Optional[float] = None
    bsd: Optional[float] = None
    var: Optional[float] = None
    multimodal: Optional[float] = None

    def csv_row(self) -> List[str]:
        values = [self.time_s, self.success, self.ftr, self.bsd, self.var, self.multimodal]
        return [repr(self.w), str(self.problems), *("" if v is None else repr(v) for v in values)]
