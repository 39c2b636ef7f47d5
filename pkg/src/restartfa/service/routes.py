"""Service endpoints wrapping the core simulation package."""

from __future__ import annotations

import math

from fastapi import APIRouter, HTTPException

from .. import verification
from ..machine import MachineFormatError, spec_from_jsonable, spec_to_jsonable, tape_word, validate_machine
from ..montecarlo import sample_runs
from ..registry import build_family
from ..reports import evaluate_words
from ..zoo import LanguageId, membership
from .schemas import (
    BuildRequest,
    BuildResponse,
    CheckModel,
    EvalRequest,
    EvalResponse,
    LanguageRef,
    MachineModel,
    RowModel,
    SampleRequest,
    SampleResponse,
    SweepRequest,
    VerifyRequest,
    VerifyResponse,
)

router = APIRouter()


def _decode_machine(model: MachineModel):
    try:
        spec = spec_from_jsonable(model.model_dump())
    except MachineFormatError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    problems = validate_machine(spec)
    if problems:
        raise HTTPException(status_code=400, detail=f"invalid machine: {problems[0]}")
    return spec


def _language_fn(ref: LanguageRef | None):
    if ref is None:
        return None
    lang = LanguageId(ref.family, ref.m, tuple(ref.alphabet))
    return lambda w: membership(lang, w)


def _finite(x: float):
    return x if math.isfinite(x) else None


def _rows_to_models(rows) -> list[RowModel]:
    return [
        RowModel(
            machine=r.machine, word=r.word, p_acc=r.p_acc, p_rej=r.p_rej,
            p_reset_total=r.p_reset_total, P_acc=r.P_acc, P_rej=r.P_rej,
            expected_steps=_finite(r.expected_steps),
            lemma4_bound=_finite(r.lemma4_bound), verdict=r.verdict,
        )
        for r in rows
    ]


@router.get("/healthz")
def healthz():
    return {"status": "ok"}


@router.post("/zoo/build", response_model=BuildResponse)
def zoo_build(req: BuildRequest) -> BuildResponse:
    try:
        built = build_family(req.family, req.m, req.eps, req.variant)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return BuildResponse(
        machine_id=built.machine_id,
        states=built.spec.n_states,
        language=LanguageRef(family=built.language.family, m=built.language.m,
                             alphabet=list(built.language.alphabet)),
        machine=MachineModel(**spec_to_jsonable(built.spec)),
    )


@router.post("/eval", response_model=EvalResponse)
def eval_words(req: EvalRequest) -> EvalResponse:
    spec = _decode_machine(req.machine)
    for w in req.words:
        bad = [c for c in w if c not in spec.alphabet]
        if bad:
            raise HTTPException(
                status_code=400,
                detail=f"word {w!r} uses symbols {bad} outside the machine alphabet",
            )
    member = _language_fn(req.language)
    rows = evaluate_words(spec, req.words, req.machine_id, member, req.eps)
    return EvalResponse(rows=_rows_to_models(rows))


@router.post("/sweep", response_model=EvalResponse)
def sweep(req: SweepRequest) -> EvalResponse:
    from ..closure import words_up_to
    from ..registry import PARAMETRIC

    m_values: list[int | None] = list(req.m_values) or [None]
    if PARAMETRIC[req.family] and m_values == [None]:
        raise HTTPException(status_code=400, detail=f"family {req.family!r} needs m_values")
    rows = []
    for m in m_values:
        for eps in req.eps_values:
            try:
                built = build_family(req.family, m, eps, req.variant)
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            words = list(words_up_to(built.spec.alphabet, req.max_len))
            member = (lambda w, lang=built.language: membership(lang, w))
            rows.extend(evaluate_words(built.spec, words, built.machine_id, member, eps))
    rows.sort(key=lambda r: (r.machine, len(r.word), r.word))
    return EvalResponse(rows=_rows_to_models(rows))


@router.post("/sample", response_model=SampleResponse)
def sample(req: SampleRequest) -> SampleResponse:
    spec = _decode_machine(req.machine)
    try:
        word = tape_word(req.word, spec.alphabet)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    try:
        stats = sample_runs(spec, word, req.n, req.seed,
                            max_rounds=req.max_rounds, step_cap=req.step_cap)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return SampleResponse(
        n=stats.n, accepted=stats.accepted, rejected=stats.rejected,
        censored=stats.censored, mean_steps=stats.mean_steps,
        stderr_acc=stats.stderr_acc, mean_rounds=stats.mean_rounds,
        acceptance=stats.acceptance if stats.accepted + stats.rejected else 0.0,
    )


@router.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest) -> VerifyResponse:
    if req.family is not None:
        if req.eps is None:
            raise HTTPException(status_code=400, detail="family verification needs eps")
        try:
            results = verification.family_battery(req.family, req.m, req.eps)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
    else:
        results = verification.run_all(req.checks)
        if not results:
            raise HTTPException(status_code=400, detail="no matching checks")
    return VerifyResponse(
        passed=all(r.passed for r in results),
        results=[CheckModel(name=r.name, passed=r.passed, detail=r.detail) for r in results],
    )
