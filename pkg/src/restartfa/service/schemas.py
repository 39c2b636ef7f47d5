"""Pydantic request/response models for the simulation service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class RolesModel(BaseModel):
    nonhalting: list[int]
    accepting: list[int]
    rejecting: list[int]
    reset_targets: dict[str, int] = Field(default_factory=dict)


class MachineModel(BaseModel):
    """The on-disk machine document; complex entries are [re, im] pairs."""

    kind: Literal["quantum", "probabilistic"]
    motion: Literal["one-way", "two-way"]
    alphabet: list[str]
    state_labels: list[str]
    roles: RolesModel
    initial: int
    directions: list[int]
    orientation: Literal["column", "row"]
    transitions: dict[str, list[list[list[float]]]]


class LanguageRef(BaseModel):
    family: Literal["suffix", "modlen", "exactlen", "palindrome", "balanced"]
    m: Optional[int] = None
    alphabet: list[str]


class BuildRequest(BaseModel):
    family: Literal["am", "am-pfa", "bm", "cm", "pal", "leq", "leq-pfa"]
    m: Optional[int] = Field(default=None, ge=1)
    eps: float = Field(gt=0.0, lt=0.5)
    variant: Literal["base", "wrapped"] = "wrapped"


class BuildResponse(BaseModel):
    machine_id: str
    states: int
    language: LanguageRef
    machine: MachineModel


class EvalRequest(BaseModel):
    machine: MachineModel
    words: list[str]
    language: Optional[LanguageRef] = None
    eps: Optional[float] = Field(default=None, gt=0.0, lt=0.5)
    machine_id: str = "machine"


class RowModel(BaseModel):
    machine: str
    word: str
    p_acc: float
    p_rej: float
    p_reset_total: float
    P_acc: float
    P_rej: float
    expected_steps: Optional[float]
    lemma4_bound: Optional[float]
    verdict: str


class EvalResponse(BaseModel):
    rows: list[RowModel]


class SweepRequest(BaseModel):
    family: Literal["am", "am-pfa", "bm", "cm", "pal", "leq", "leq-pfa"]
    m_values: list[int] = Field(default_factory=list)
    eps_values: list[float]
    max_len: int = Field(default=6, ge=0, le=12)
    variant: Literal["base", "wrapped"] = "wrapped"


class SampleRequest(BaseModel):
    machine: MachineModel
    word: str
    n: int = Field(ge=1)
    seed: int = 0
    max_rounds: int = Field(default=1_000_000, ge=1)
    step_cap: Optional[int] = Field(default=None, ge=1)


class SampleResponse(BaseModel):
    n: int
    accepted: int
    rejected: int
    censored: int
    mean_steps: float
    stderr_acc: float
    mean_rounds: float
    acceptance: float


class VerifyRequest(BaseModel):
    checks: Optional[list[str]] = None
    family: Optional[Literal["am", "am-pfa", "bm", "cm", "pal", "leq", "leq-pfa"]] = None
    m: Optional[int] = Field(default=None, ge=1)
    eps: Optional[float] = Field(default=None, gt=0.0, lt=0.5)


class CheckModel(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class VerifyResponse(BaseModel):
    passed: bool
    results: list[CheckModel]
