"""Name-keyed access to the machine families for the service and CLI."""

from __future__ import annotations

from dataclasses import dataclass

from . import zoo
from .machine import MachineSpec
from .zoo import LanguageId


@dataclass
class BuiltMachine:
    spec: MachineSpec
    language: LanguageId
    machine_id: str
    check_eps: float


FAMILIES = ("am", "am-pfa", "bm", "cm", "pal", "leq", "leq-pfa")
PARAMETRIC = {"am": True, "am-pfa": True, "bm": True, "cm": True,
              "pal": False, "leq": False, "leq-pfa": False}


def build_family(family: str, m: int | None, eps: float,
                 variant: str = "wrapped") -> BuiltMachine:
    """Build one machine; ``variant`` picks base or wrapped where both exist."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    if variant not in ("base", "wrapped"):
        raise ValueError(f"variant must be 'base' or 'wrapped', got {variant!r}")
    if PARAMETRIC[family] and m is None:
        raise ValueError(f"family {family!r} needs a value for m")

    if family == "am":
        spec = zoo.build_am_qfa(m, eps)
        lang = LanguageId("suffix", m, spec.alphabet)
    elif family == "am-pfa":
        spec = zoo.build_am_pfa(m, eps)
        lang = LanguageId("suffix", m, spec.alphabet)
    elif family == "bm":
        base, wrapped = zoo.build_bm(m, eps)
        spec = base if variant == "base" else wrapped
        lang = LanguageId("modlen", m, spec.alphabet)
    elif family == "cm":
        base, wrapped = zoo.build_cm(m, eps)
        spec = base if variant == "base" else wrapped
        lang = LanguageId("exactlen", m, spec.alphabet)
    elif family == "pal":
        base, wrapped = zoo.build_pal(eps)
        spec = base if variant == "base" else wrapped
        lang = LanguageId("palindrome", None, spec.alphabet)
    else:
        if family == "leq":
            base, wrapped = zoo.build_leq_qfa(eps)
            spec = base if variant == "base" else wrapped
        else:
            spec = zoo.build_leq_pfa(eps)
        lang = LanguageId("balanced", None, spec.alphabet)

    tag = f"m={m}," if PARAMETRIC[family] else ""
    suffix = ":base" if variant == "base" and family in ("bm", "cm", "pal", "leq") else ""
    machine_id = f"{family}{suffix}({tag}eps={eps:g})"
    return BuiltMachine(spec, lang, machine_id, eps)
