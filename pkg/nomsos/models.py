"""
Output Records
The machine-readable shapes behind `--json`. Field order is declaration order and every
collection is sorted before it is stored, so the dumps are byte-stable.
"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from nomsos.services.engine import AtomPool, ProofTree, Transition, split_residual
from nomsos.services.formats import FormatReport, Obligation
from nomsos.services.properties import SuiteOutcome
from nomsos.services.terms import term_text
from nomsos.services.translate import DiffResult


class ProofRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    rule: str
    transition: str
    atoms: List[List[str]] = Field(default_factory=list)
    actions: List[List[str]] = Field(default_factory=list)
    heads: List[List[str]] = Field(default_factory=list)
    discharged: List[str] = Field(default_factory=list)
    premises: List["ProofRecord"] = Field(default_factory=list)

    @classmethod
    def of(cls, pt: ProofTree) -> "ProofRecord":
        return cls(
            rule=pt.rule_id,
            transition=str(pt.root),
            atoms=[[name, str(value)] for name, value in pt.atoms],
            actions=[[name, term_text(value)] for name, value in pt.actions],
            heads=[[name, value] for name, value in pt.heads],
            discharged=sorted(str(x) for x in pt.discharged),
            premises=[cls.of(child) for child in pt.children],
        )


class TransitionRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    source: str
    abstracted: Optional[str] = None
    action: Optional[str] = None
    target: str
    residual: str
    style: str
    proof: Optional[ProofRecord] = None

    @classmethod
    def of(cls, t: Transition, proof: Optional[ProofTree] = None) -> "TransitionRecord":
        binder, action, target = split_residual(t.residual)
        return cls(
            source=str(t.source),
            abstracted=None if binder is None else str(binder),
            action=None if action is None else str(action),
            target=str(target),
            residual=str(t.residual),
            style="plain" if binder is None else "abstraction",
            proof=None if proof is None else ProofRecord.of(proof),
        )


class StepReport(BaseModel):
    calculus: str
    state: str
    pool: str
    fuel: int
    incomplete: bool = False
    transitions: List[TransitionRecord] = Field(default_factory=list)


class ObligationRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    rule: str
    case: str
    atom: str
    kind: str
    passed: bool
    premises: str
    goal: str

    @classmethod
    def of(cls, x: Obligation) -> "ObligationRecord":
        names = dict(x.names)
        return cls(
            rule=x.rule_id,
            case=x.case,
            atom=x.atom,
            kind=x.kind,
            passed=x.passed,
            premises=x.premises.text(names),
            goal=x.goal.text(names),
        )


class CheckReport(BaseModel):
    calculus: str
    format: str
    passed: bool
    verdicts: List[str] = Field(default_factory=list)
    obligations: List[ObligationRecord] = Field(default_factory=list)
    issues: List[str] = Field(default_factory=list)

    @classmethod
    def of(cls, calculus: str, report: FormatReport) -> "CheckReport":
        return cls(
            calculus=calculus,
            format=report.format,
            passed=report.ok,
            verdicts=[v.line() for v in report.verdicts],
            obligations=[ObligationRecord.of(x) for x in report.obligations],
            issues=list(report.issues),
        )


class DiffReport(BaseModel):
    source: str
    target: str
    state: str
    pool: str
    equal: bool
    missing: List[str] = Field(default_factory=list)
    extra: List[str] = Field(default_factory=list)
    witnesses: List[str] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)

    @classmethod
    def of(cls, source: str, target: str, state: str, pool: AtomPool, diff: DiffResult) -> "DiffReport":
        return cls(
            source=source,
            target=target,
            state=state,
            pool=str(pool),
            equal=diff.equal,
            missing=[str(t) for t in diff.missing],
            extra=[str(t) for t in diff.extra],
            witnesses=[str(t) for t in diff.witnesses],
            notes=list(diff.notes),
        )


class SuiteResult(BaseModel):
    suite: str
    passed: bool
    cases: int
    failures: int
    counterexamples: List[str] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)

    @classmethod
    def of(cls, outcome: SuiteOutcome) -> "SuiteResult":
        return cls(
            suite=outcome.name,
            passed=outcome.ok,
            cases=outcome.cases,
            failures=outcome.failures,
            counterexamples=list(outcome.counterexamples),
            notes=list(outcome.notes),
        )


class SelftestReport(BaseModel):
    seed: int
    passed: bool
    suites: List[SuiteResult] = Field(default_factory=list)


ProofRecord.model_rebuild()
