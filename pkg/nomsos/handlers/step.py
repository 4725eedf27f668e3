"""
Step Handler - transitions of one state, and traces through several.
"""

import random

from loguru import logger

from nomsos.models import StepReport, TransitionRecord
from nomsos.services.engine import derive, split_residual, trace
from nomsos.services.nominal import alpha_text
from nomsos.utils.helpers import (
    add_system_flags,
    dump_json,
    echo,
    pool_for,
    read_state,
    resolve_bundle,
    transition_line,
)


def register(subparsers):
    step = subparsers.add_parser("step", help="list the transitions of a state")
    add_system_flags(step)
    step.add_argument("term", help="the state, e.g. \"(tau (null))\"")
    step.add_argument("--proof", action="store_true", help="print a proof tree under every transition")
    step.add_argument("--alpha", action="store_true", help="keep the binder names as typed")
    step.set_defaults(handler=cmd_step)

    walk = subparsers.add_parser("trace", help="follow transitions from a state")
    add_system_flags(walk)
    walk.add_argument("term")
    walk.add_argument("--steps", type=int, default=10)
    walk.add_argument("--random", action="store_true", help="pick a seeded random transition at each step")
    walk.add_argument("--proof", action="store_true")
    walk.set_defaults(handler=cmd_trace)


def cmd_step(args) -> int:
    b = resolve_bundle(args.calculus, args.rules, args.bn)
    raw, state = read_state(b, args.term)
    pool = pool_for(b, state, args.extra_fresh)
    result = derive(b.nrtss, state, pool, args.fuel)
    logger.info(f"{b.name}: {len(result)} transition(s) from {state}")

    if args.json:
        report = StepReport(
            calculus=b.name,
            state=str(state),
            pool=str(pool),
            fuel=args.fuel,
            incomplete=result.incomplete,
            transitions=[TransitionRecord.of(t, proof) for t, proof in result.items()],
        )
        print(dump_json(report))
        return 0

    shown = alpha_text(state, raw) if args.alpha else str(state)
    lines = [f"state {shown}", f"pool {pool}", f"{len(result)} transition(s)"]
    if result.incomplete:
        lines.append(f"fuel {args.fuel} exhausted; the listing may be incomplete")
    for t, proof in result.items():
        lines.append(transition_line(t))
        if args.proof:
            lines.extend(proof.render(1))
    echo(lines)
    return 0


def cmd_trace(args) -> int:
    b = resolve_bundle(args.calculus, args.rules, args.bn)
    _, state = read_state(b, args.term)
    rng = random.Random(args.seed) if args.random else None
    taken = trace(b.nrtss, state, args.steps, args.extra_fresh, args.fuel, rng)

    if args.json:
        report = StepReport(
            calculus=b.name,
            state=str(state),
            pool="per step",
            fuel=args.fuel,
            transitions=[TransitionRecord.of(t, proof if args.proof else None) for t, proof in taken],
        )
        print(dump_json(report))
        return 0

    lines = [f"state {state}"]
    for i, (t, proof) in enumerate(taken, 1):
        lines.append(f"{i}. {transition_line(t)}  [{proof.rule_id}]")
        if args.proof:
            lines.extend(proof.render(1))
    if len(taken) < args.steps:
        final = split_residual(taken[-1][0].residual)[2] if taken else state
        lines.append(f"stopped after {len(taken)} step(s): {final} has no transition")
    echo(lines)
    return 0
