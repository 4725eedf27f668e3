"""
Property Suites
Seeded, randomised checks of the laws the services rely on: permutation and renaming
algebra, the term and nominal actions, simplification and entailment of freshness
environments, rule schemas, derived transition sets, the format checkers and the
translations between residual styles.

Every suite takes a SuiteOptions and returns a SuiteOutcome. The test suite runs them with
small counts; `selftest` runs them at full scale.
"""

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

from loguru import logger

from nomsos.errors import InstantiationError, NomsosError
from nomsos.services.calculi import CALCULI, CalculusBundle, bundle
from nomsos.services.engine import AtomPool, Transition, check_proof, derive, split_residual
from nomsos.services.formats import check_acr, check_ba, check_equivariant, test_stratification
from nomsos.services.foundation import (
    CH,
    Atom,
    Permutation,
    Renaming,
    as_renaming,
    fresh_atoms,
    perm_conjugate_renaming,
    ren_apply,
    ren_compose,
    ren_support,
)
from nomsos.services.freshness import (
    FreshAssertion,
    FreshnessEnv,
    entails,
    find_mediator,
    holds,
    is_reduced,
    simplify,
    simplify_randomly,
    substitute_env,
)
from nomsos.services.nominal import (
    NominalTerm,
    abstract,
    concrete,
    interpret,
    is_fresh,
    nominal_perm,
    nominal_supp,
)
from nomsos.services.nrtss import parse_ruleset, print_ruleset, rule_instantiate, rule_perm
from nomsos.services.syntax import parse_term
from nomsos.services.terms import (
    UNIT,
    Abs,
    AbsSort,
    App,
    AtomTm,
    BaseSort,
    FunSymbol,
    Moderated,
    ProdSort,
    RawTerm,
    Signature,
    Substitution,
    TupleTm,
    Var,
    compose,
    free_atoms,
    ground_terms,
    perm_act_term,
    push_renaming,
    random_term,
    ren_act_term,
    substitute,
    subterms,
    term_size,
    term_support,
    term_text,
)
from nomsos.services.translate import (
    ABSTRACTION,
    TransitionSet,
    ba_witnesses,
    compare_derived,
    roundtrip_abs,
    roundtrip_plain,
)

MAX_COUNTEREXAMPLES = 5

# A small signature for random terms: constants, atoms, binders and pairs.
TM = BaseSort("tm")
TINY = Signature(
    base_sorts={"tm": TM},
    atom_sorts={"ch": CH},
    functions={
        "leaf": FunSymbol("leaf", UNIT, TM),
        "at": FunSymbol("at", CH, TM),
        "bind": FunSymbol("bind", AbsSort(CH, TM), TM),
        "two": FunSymbol("two", ProdSort((TM, TM)), TM),
    },
)
LEAF = App("leaf", TupleTm(()), TM)

PAIRS = (("early", "early-abs"), ("late", "late-abs"))

# Random processes lean towards parallel outputs and inputs, so communications turn up.
PROCESS_WEIGHTS = {"par": 3, "new": 2, "out": 3, "in": 3}
COMMUNICATING = (
    "(par (out a b (null)) (in a ([c] (null))))",
    "(par (new ([b] (out a b (null)))) (in a ([c] (out c c (null)))))",
    "(new ([b] (par (out a b (null)) (in a ([c] (out c a (null)))))))",
)


@dataclass
class SuiteOptions:
    """Unset sizes fall back to each suite's own default; `states` is the default count of
    the suites that derive transitions from random states."""

    count: Optional[int] = None
    seed: int = 2017
    atoms: Optional[int] = None
    depth: Optional[int] = None
    fuel: int = 16
    fresh_slack: int = 2
    states: int = 50

    def sizes(self, count: int, atoms: int, depth: int) -> Tuple[int, int, int]:
        return self.count or count, self.atoms or atoms, self.depth or depth


@dataclass
class SuiteOutcome:
    name: str
    cases: int = 0
    failures: int = 0
    counterexamples: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def check(self, passed: bool, describe: Callable[[], str]) -> bool:
        """Count one case; a failing case keeps its description (up to a few)."""
        self.cases += 1
        if not passed:
            self.failures += 1
            if len(self.counterexamples) < MAX_COUNTEREXAMPLES:
                text = describe()
                logger.debug(f"{self.name}: counterexample {text}")
                self.counterexamples.append(text)
        return passed

    def lines(self) -> List[str]:
        verdict = "PASS" if self.ok else "FAIL"
        found = [f"{self.name}: {self.cases} case(s), {self.failures} counterexample(s) -> {verdict}"]
        found += [f"  note: {note}" for note in self.notes]
        for text in self.counterexamples:
            found.append("  counterexample:")
            found += [f"    {line}" for line in text.splitlines()]
        return found


# ==================== GENERATORS ====================

def universe(count: int) -> List[Atom]:
    """The first `count` channel atoms: a, b, c, ..."""
    return [Atom(CH, i) for i in range(count)]


def random_permutation(rng: random.Random, atoms: Sequence[Atom]) -> Permutation:
    shuffled = list(atoms)
    rng.shuffle(shuffled)
    return Permutation(dict(zip(atoms, shuffled)))


def random_renaming(rng: random.Random, atoms: Sequence[Atom], size: int = 2) -> Renaming:
    moved = rng.sample(list(atoms), rng.randint(0, min(size, len(atoms))))
    return Renaming({a: rng.choice(atoms) for a in moved})


def random_open_term(rng: random.Random, atoms: Sequence[Atom], variables: Sequence[Var], depth: int) -> RawTerm:
    """A term of sort tm that may contain variables and delayed renamings."""
    kinds = ["leaf", "at"] + (["var"] if variables else [])
    if depth > 0:
        kinds += ["bind", "two", "two", "mod"]
    kind = rng.choice(kinds)
    if kind == "leaf":
        return LEAF
    if kind == "at":
        return App("at", AtomTm(rng.choice(atoms)), TM)
    if kind == "var":
        x = rng.choice(variables)
        return Moderated(x, random_renaming(rng, atoms)) if rng.random() < 0.5 else x
    if kind == "bind":
        return App("bind", Abs(rng.choice(atoms), random_open_term(rng, atoms, variables, depth - 1)), TM)
    if kind == "two":
        items = tuple(random_open_term(rng, atoms, variables, depth - 1) for _ in range(2))
        return App("two", TupleTm(items), TM)
    return Moderated(random_open_term(rng, atoms, variables, depth - 1), random_renaming(rng, atoms))


def random_env(rng: random.Random, atoms: Sequence[Atom], variables: Sequence[Var], size: int, depth: int) -> FreshnessEnv:
    assertions = []
    for _ in range(rng.randint(1, size)):
        if rng.random() < 0.15:
            term: RawTerm = AtomTm(rng.choice(atoms))
        else:
            term = random_open_term(rng, atoms, variables, rng.randint(0, depth))
        assertions.append(FreshAssertion(rng.choice(atoms), term))
    return FreshnessEnv(frozenset(assertions))


def variables_named(names: str) -> List[Var]:
    return [Var(name, TM) for name in names]


def ground_instance(rng: random.Random, atoms: Sequence[Atom], variables: Sequence[Var], depth: int) -> Substitution:
    return Substitution({x: random_term(TINY, TM, atoms, depth, rng) for x in variables})


def random_states(b: CalculusBundle, count: int, atoms: int, depth: int, seed: int) -> List[NominalTerm]:
    """Seeded random ground states; bundles sharing a signature get the same states."""
    rng = random.Random(seed)
    rsig = b.nrtss.signature
    pool = universe(atoms)
    states = []
    if set(PROCESS_WEIGHTS) <= set(rsig.signature.functions):
        for text in COMMUNICATING:
            s = interpret(parse_term(text, rsig.signature, rsig.state_sort))
            if s.support <= set(pool):
                states.append(s)
    states = states[:count]
    while len(states) < count:
        t = random_term(rsig.signature, rsig.state_sort, pool, rng.randint(1, depth), rng, PROCESS_WEIGHTS)
        states.append(interpret(t))
    return states


def _listing(label: str, transitions) -> str:
    return "\n".join([label] + [f"  {t}" for t in sorted(transitions, key=Transition.sort_key)])


# ==================== ATOMS, TERMS, NOMINAL TERMS ====================

def suite_permutations(opts: SuiteOptions) -> SuiteOutcome:
    """Group laws for permutations, monoid laws for renamings, supp equivariance."""
    outcome = SuiteOutcome("permutations")
    count, atoms, _ = opts.sizes(200, 6, 0)
    rng = random.Random(opts.seed)
    pool = universe(atoms)
    identity = Permutation.identity()
    for i in range(count):
        p, q, r = (random_permutation(rng, pool) for _ in range(3))
        outcome.check(
            all(p.compose(q).compose(r).apply(a) == p.compose(q.compose(r)).apply(a) for a in pool),
            lambda: f"case {i}: composition of {p}, {q}, {r} is not associative",
        )
        outcome.check(
            p.compose(identity) == p == identity.compose(p),
            lambda: f"case {i}: identity is not neutral for {p}",
        )
        outcome.check(
            p.compose(p.inverse()).is_identity() and p.inverse().compose(p).is_identity(),
            lambda: f"case {i}: {p.inverse()} is not the inverse of {p}",
        )

        r1, r2, r3 = (random_renaming(rng, pool, size=3) for _ in range(3))
        outcome.check(
            r1.then(r2).then(r3) == r1.then(r2.then(r3)) and r1.then(Renaming()) == r1 == Renaming().then(r1),
            lambda: f"case {i}: monoid laws fail for {r1}, {r2}, {r3}",
        )
        moved = frozenset(p.apply(a) for a in ren_support(r1))
        outcome.check(
            ren_support(perm_conjugate_renaming(p, r1)) == moved,
            lambda: f"case {i}: supp({p}·{r1}) is not {sorted(moved)}",
        )
        outcome.check(
            all(ren_apply(p, a) == as_renaming(p).apply(a) for a in pool)
            and all(ren_apply(ren_compose(p, r1), a) == r1.apply(p.apply(a)) for a in pool),
            lambda: f"case {i}: {p} does not act as a renaming",
        )
    return outcome


def suite_terms(opts: SuiteOptions) -> SuiteOutcome:
    """Free atoms against support, the two actions, and substitution laws on open terms."""
    outcome = SuiteOutcome("terms")
    count, atoms, depth = opts.sizes(200, 4, 3)
    rng = random.Random(opts.seed)
    pool = universe(atoms)
    xs = variables_named("xyz")
    for i in range(count):
        t = random_open_term(rng, pool, xs, depth)
        p = random_permutation(rng, pool)
        rho = random_renaming(rng, pool)
        text = term_text(t)
        outcome.check(free_atoms(t) <= term_support(t), lambda: f"case {i}: fa({text}) is not within supp")
        outcome.check(
            perm_act_term(p, ren_act_term(t, rho)) == ren_act_term(perm_act_term(p, t), perm_conjugate_renaming(p, rho)),
            lambda: f"case {i}: {p} does not commute with {rho} on {text}",
        )
        outcome.check(
            term_support(perm_act_term(p, t)) == frozenset(p.apply(a) for a in term_support(t)),
            lambda: f"case {i}: supp({p}·{text}) differs from the permuted support",
        )

        phi = Substitution({x: random_open_term(rng, pool, xs, 1) for x in xs})
        phi_p = Substitution({x: perm_act_term(p, value) for x, value in phi.items()})
        outcome.check(
            perm_act_term(p, substitute(phi, t)) == substitute(phi_p, perm_act_term(p, t)),
            lambda: f"case {i}: {p}·{phi}({text}) differs from the conjugated substitution",
        )
        ground = ground_instance(rng, pool, xs, 2)
        outcome.check(
            substitute(compose(ground, phi), t) == substitute(ground, substitute(phi, t)),
            lambda: f"case {i}: composition of {ground} after {phi} fails on {text}",
        )
    return outcome


def suite_nominal(opts: SuiteOptions) -> SuiteOutcome:
    """Equivariance of interpretation, moderations, abstraction and freshness."""
    outcome = SuiteOutcome("nominal")
    count, atoms, depth = opts.sizes(200, 4, 3)
    rng = random.Random(opts.seed)
    pool = universe(atoms)
    for i in range(count):
        t = random_term(TINY, TM, pool, depth, rng)
        s = interpret(t)
        p = random_permutation(rng, pool)
        moved = nominal_perm(p, s)
        outcome.check(interpret(perm_act_term(p, t)) == moved, lambda: f"case {i}: interpretation of {p}·{s} is not equivariant")
        outcome.check(
            interpret(Moderated(t, p.as_renaming())) == moved,
            lambda: f"case {i}: {term_text(t)}[{p}] is not {moved}",
        )
        a = rng.choice(pool)
        abstraction = abstract(a, s)
        outcome.check(concrete(abstraction, a) == s, lambda: f"case {i}: [{a}]{s} concreted at {a} is not {s}")
        outcome.check(
            nominal_supp(abstraction) == s.support - {a},
            lambda: f"case {i}: supp([{a}]{s}) is not supp minus {a}",
        )
        outcome.check(
            all(is_fresh(b, s) == is_fresh(p.apply(b), moved) for b in pool),
            lambda: f"case {i}: freshness for {s} is not preserved by {p}",
        )
    return outcome


# ==================== FRESHNESS LOGIC ====================

def _env_size(env: FreshnessEnv) -> int:
    return sum(term_size(x.term) for x in env.assertions)


def suite_simplification(opts: SuiteOptions) -> SuiteOutcome:
    """Two randomised rewriting strategies reach the same normal form, of reduced shapes
    only, within a polynomial number of steps; normalising keeps ground truth."""
    outcome = SuiteOutcome("simplification")
    count, atoms, depth = opts.sizes(1000, 4, 4)
    rng = random.Random(opts.seed)
    pool = universe(atoms)
    xs = variables_named("xyz")
    for i in range(count):
        env = random_env(rng, pool, xs, 6, depth)
        first, steps1 = simplify_randomly(env, random.Random(rng.getrandbits(32)))
        second, steps2 = simplify_randomly(env, random.Random(rng.getrandbits(32)))
        outcome.check(
            first == second == simplify(env),
            lambda: f"case {i}: normal forms of {env} differ\n{first}\n{second}",
        )
        outcome.check(all(is_reduced(x) for x in first), lambda: f"case {i}: {first} is not reduced")
        bound = _env_size(env) ** 2 + 1
        outcome.check(max(steps1, steps2) <= bound, lambda: f"case {i}: {max(steps1, steps2)} steps for {env}")
        for _ in range(3):
            phi = ground_instance(rng, pool, xs, 2)
            outcome.check(
                holds(substitute_env(phi, env)) == holds(substitute_env(phi, first)),
                lambda: f"case {i}: {phi} separates {env} from its normal form {first}",
            )
    return outcome


def _as_tm(t: RawTerm) -> RawTerm:
    return App("at", t, TM) if t.sort == CH else t


def _consequence(rng: random.Random, env: FreshnessEnv, atoms: Sequence[Atom]) -> FreshnessEnv:
    """An environment that every ground instance satisfying `env` also satisfies."""
    picked = rng.sample(env.sorted(), rng.randint(1, len(env)))
    found = []
    for x in picked:
        move = rng.randrange(4)
        if move == 0:
            found.append(x)
        elif move == 1:
            items = (_as_tm(x.term), LEAF) if rng.random() < 0.5 else (LEAF, _as_tm(x.term))
            found.append(FreshAssertion(x.atom, App("two", TupleTm(items), TM)))
        elif move == 2:
            p = random_permutation(rng, atoms)
            found.append(FreshAssertion(p.apply(x.atom), Moderated(x.term, p.as_renaming())))
        else:
            binder = rng.choice(atoms)
            found.append(FreshAssertion(x.atom, App("bind", Abs(binder, _as_tm(x.term)), TM)))
    if rng.random() < 0.3:
        a = rng.choice(atoms)
        found.append(FreshAssertion(a, App("bind", Abs(a, App("at", AtomTm(a), TM)), TM)))
    return FreshnessEnv(frozenset(found))


def _occurrences(envs: Sequence[FreshnessEnv]) -> Dict[Var, Set[Renaming]]:
    """For every variable, the renamings its occurrences carry once moderations are pushed."""
    found: Dict[Var, Set[Renaming]] = {}
    for env in envs:
        for x in env.assertions:
            for node in subterms(push_renaming(x.term)):
                if isinstance(node, Moderated):
                    found.setdefault(node.term, set()).add(node.renaming)
                elif isinstance(node, Var):
                    found.setdefault(node, set()).add(Renaming())
    return found


def oracle_counterexample(env1: FreshnessEnv, env2: FreshnessEnv, instances: Sequence[RawTerm]) -> Optional[Substitution]:
    """A ground instantiation over `instances` satisfying env1 but not env2, if any.

    Whether a ground instance satisfies an assertion depends on each variable only through
    the free atoms of its value under the renamings that variable carries, so one value per
    such profile is tried.
    """
    occurrences = _occurrences([env1, env2])
    xs = sorted(occurrences, key=lambda v: v.name)
    choices = []
    for x in xs:
        renamings = sorted(occurrences[x], key=str)
        profiles: Dict[tuple, RawTerm] = {}
        for u in instances:
            profiles.setdefault(tuple(free_atoms(push_renaming(u, r)) for r in renamings), u)
        choices.append(list(profiles.values()))
    for values in itertools.product(*choices):
        phi = Substitution(dict(zip(xs, values)))
        if holds(substitute_env(phi, env1)) and not holds(substitute_env(phi, env2)):
            return phi
    return None


def suite_entailment(opts: SuiteOptions) -> SuiteOutcome:
    """Entailment is sound against brute force over a bounded universe. `depth` counts
    nested function symbols in the ground values given to the variables."""
    outcome = SuiteOutcome("entailment-oracle")
    count, atoms, depth = opts.sizes(500, 4, 2)
    rng = random.Random(opts.seed)
    pool = universe(atoms)
    xs = variables_named("xy")
    instances = ground_terms(TINY, TM, pool, max(depth - 1, 0))
    entailed = 0
    for i in range(count):
        env1 = random_env(rng, pool, xs, 4, 2)
        env2 = _consequence(rng, env1, pool) if rng.random() < 0.5 else random_env(rng, pool, xs, 3, 2)
        if not entails(env1, env2):
            outcome.cases += 1
            continue
        entailed += 1
        phi = oracle_counterexample(env1, env2, instances)
        outcome.check(phi is None, lambda: f"case {i}: {env1} |- {env2}, but {phi} satisfies only the left side")
    outcome.notes.append(f"{entailed} of {count} pair(s) entailed, {len(instances)} ground value(s) per variable")
    return outcome


def suite_mediator(opts: SuiteOptions) -> SuiteOutcome:
    """Every mediator found satisfies both defining equations, checked pointwise."""
    outcome = SuiteOutcome("mediator")
    count, atoms, _ = opts.sizes(500, 4, 0)
    rng = random.Random(opts.seed)
    pool = universe(atoms)
    found = 0
    for i in range(count):
        r1 = random_renaming(rng, pool)
        a1 = rng.choice(pool)
        if rng.random() < 0.6:
            p = random_permutation(rng, pool)
            r2, a2 = r1.then(p.as_renaming()), p.apply(a1)
        else:
            r2, a2 = random_renaming(rng, pool), rng.choice(pool)
        pi = find_mediator(a1, r1, a2, r2)
        if pi is None:
            outcome.cases += 1
            continue
        found += 1
        scope = r1.support() | r2.support() | {a1, a2}
        points = sorted(scope) + fresh_atoms(CH, scope, 2)
        outcome.check(
            pi.apply(a1) == a2 and all(pi.apply(r1.apply(c)) == r2.apply(c) for c in points),
            lambda: f"case {i}: {pi} does not mediate {a1}{r1} and {a2}{r2}",
        )
    outcome.notes.append(f"mediators found for {found} of {count} pair(s)")
    return outcome


# ==================== RULE SETS ====================

def _random_assignment(rng: random.Random, b: CalculusBundle, r, pool: Sequence[Atom]):
    rsig = b.nrtss.signature
    atom_env = {p.name: rng.choice(pool) for p in r.atom_params}
    action_env = {}
    for p in r.action_params:
        symbol = rng.choice(p.allowed(rsig))
        action_env[p.name] = App(symbol.name, random_term(rsig.signature, symbol.arg, pool, 0, rng), symbol.result)
    head_env = {p.name: rng.choice(p.heads) for p in r.head_params}
    return atom_env, action_env, head_env


def suite_rulesets(opts: SuiteOptions) -> SuiteOutcome:
    """Printed rule sets parse back unchanged; permuted instances are instances."""
    outcome = SuiteOutcome("rulesets")
    count, atoms, _ = opts.sizes(20, 4, 0)
    rng = random.Random(opts.seed)
    pool = universe(atoms)
    skipped = 0
    for name in CALCULI:
        b = bundle(name)
        outcome.check(
            parse_ruleset(print_ruleset(b.nrtss)) == b.nrtss,
            lambda: f"{name}: the printed rule set does not parse back to itself",
        )
        for r in b.nrtss.rules:
            for _ in range(count):
                atom_env, action_env, head_env = _random_assignment(rng, b, r, pool)
                p = random_permutation(rng, pool)
                try:
                    instance = rule_instantiate(r, atom_env, action_env, head_env)
                    permuted = rule_instantiate(
                        r,
                        {k: p.apply(v) for k, v in atom_env.items()},
                        {k: perm_act_term(p, v) for k, v in action_env.items()},
                        head_env,
                    )
                except InstantiationError:
                    skipped += 1
                    continue
                outcome.check(
                    rule_perm(p, instance) == permuted,
                    lambda: f"{name}/{r.id}: {p} applied to\n{instance.text()}\nis not the instance\n{permuted.text()}",
                )
    if skipped:
        outcome.notes.append(f"{skipped} assignment(s) did not instantiate")
    return outcome


# ==================== DERIVED TRANSITION SETS ====================

def _pool(b: CalculusBundle, state: NominalTerm, slack: int) -> AtomPool:
    return AtomPool.around([state], b.nrtss.signature.signature.atom_sorts.values(), slack)


def _derived(b: CalculusBundle, state: NominalTerm, pool: AtomPool, fuel: int):
    return derive(b.nrtss, state, pool, fuel)


def _check_pool_symmetry(outcome: SuiteOutcome, b: CalculusBundle, state: NominalTerm, pool: AtomPool, found: Set[Transition], fuel: int):
    atoms = sorted(pool.atoms)
    for a, c in itertools.combinations(atoms, 2):
        if a.sort != c.sort:
            continue
        p = Permutation.swap(a, c)
        moved_state = nominal_perm(p, state)
        moved = found if moved_state == state else set(_derived(b, moved_state, pool, fuel).proofs)
        expected = {Transition(nominal_perm(p, t.source), nominal_perm(p, t.residual)) for t in found}
        outcome.check(
            expected == moved,
            lambda: "\n".join([
                f"{b.name}: transposing {p} on {state}",
                _listing("missing:", expected - moved),
                _listing("extra:", moved - expected),
            ]),
        )


def _check_alpha(outcome: SuiteOutcome, b: CalculusBundle, pool: AtomPool, found: Set[Transition]):
    for t in sorted(found, key=Transition.sort_key):
        _, action, _ = split_residual(t.residual)
        for bound in sorted(b.bn.bn(action.term)):
            for c in pool.of_sort(bound.sort):
                if c == bound or c in t.residual.support:
                    continue
                variant = Transition(t.source, nominal_perm(Permutation.swap(bound, c), t.residual))
                outcome.check(variant in found, lambda: f"{b.name}: {t} is derived but its variant {variant} is not")


def suite_derivations(opts: SuiteOptions) -> SuiteOutcome:
    """On random processes of every shipped calculus: proofs revalidate, derivation is
    reproducible, the derived set is closed under transpositions of pool atoms and under
    alpha-conversion of binding residuals, and abstraction residuals satisfy the BA
    property."""
    outcome = SuiteOutcome("derivations")
    count, atoms, depth = opts.sizes(opts.states, 3, 4)
    for name in CALCULI:
        b = bundle(name)
        total = 0
        for i, state in enumerate(random_states(b, count, atoms, depth, opts.seed)):
            pool = _pool(b, state, opts.fresh_slack)
            result = _derived(b, state, pool, opts.fuel)
            found = set(result.proofs)
            total += len(found)
            for t, proof in result.items():
                outcome.check(check_proof(b.nrtss, proof), lambda: f"{name}: proof of {t} does not revalidate")
            if i < 5:
                again = set(_derived(b, state, pool, opts.fuel).proofs)
                outcome.check(again == found, lambda: f"{name}: two derivations of {state} differ")
            _check_pool_symmetry(outcome, b, state, pool, found, opts.fuel)
            if b.abstraction_style:
                witnesses = ba_witnesses(TransitionSet.of(found, ABSTRACTION))
                outcome.check(not witnesses, lambda: _listing(f"{name}: abstracted atom free in the target", witnesses))
            elif b.bn is not None:
                _check_alpha(outcome, b, pool, found)
        outcome.notes.append(f"{name}: {count} state(s), {total} transition(s)")
    return outcome


def suite_roundtrips(opts: SuiteOptions) -> SuiteOutcome:
    """Trans after TransAbs on closed plain sets, TransAbs after Trans on abstraction sets."""
    outcome = SuiteOutcome("roundtrips")
    count, atoms, depth = opts.sizes(opts.states, 3, 4)
    for name in CALCULI:
        b = bundle(name)
        for state in random_states(b, count, atoms, depth, opts.seed):
            pool = _pool(b, state, opts.fresh_slack)
            found = _derived(b, state, pool, opts.fuel).proofs
            if b.abstraction_style:
                diff = roundtrip_abs(TransitionSet.of(found, ABSTRACTION), pool)
            else:
                diff = roundtrip_plain(TransitionSet.of(found), b.bn, pool)
            outcome.check(diff.equal, lambda: "\n".join([f"{name}: round trip on {state}"] + diff.lines()))
    return outcome


def suite_translation(opts: SuiteOptions) -> SuiteOutcome:
    """TransAbs of the plain derived set equals the abstraction derived set, and Trans of
    the abstraction set equals the closed plain set."""
    outcome = SuiteOutcome("translation")
    count, atoms, depth = opts.sizes(opts.states, 3, 4)
    for plain_name, abs_name in PAIRS:
        plain, abstraction = bundle(plain_name), bundle(abs_name)
        for state in random_states(plain, count, atoms, depth, opts.seed):
            for source, target in ((plain, abstraction), (abstraction, plain)):
                diff, _ = compare_derived(source, target, state, opts.fresh_slack, opts.fuel)
                outcome.check(
                    diff.equal,
                    lambda: "\n".join([f"{source.name} translated against {target.name} on {state}"] + diff.lines()),
                )
    return outcome


# ==================== FORMATS ====================

def suite_formats(opts: SuiteOptions) -> SuiteOutcome:
    """The shipped calculi are in their formats; the unfiltered ACR check fails at Res."""
    outcome = SuiteOutcome("formats")
    for name in CALCULI:
        b = bundle(name)
        report = check_equivariant(b.nrtss)
        outcome.check(report.ok, lambda: "\n".join([f"{name}: not equivariant"] + report.lines()))
        if b.abstraction_style:
            report = check_ba(b.nrtss, b.strat)
        else:
            report = check_acr(b.nrtss, b.bn, b.strat, b.inert)
        outcome.check(report.ok, lambda: "\n".join([f"{name}: format check fails"] + report.lines()))

    early = bundle("early")
    unfiltered = check_acr(early.nrtss, early.bn, early.strat, early.inert, no_nf_filter=True)
    outcome.check(
        any(x.rule_id == "Res" and x.kind == "i" for x in unfiltered.failures()),
        lambda: "early: without the candidate filter Res (i) should fail",
    )
    return outcome


def suite_stratification(opts: SuiteOptions) -> SuiteOutcome:
    """The shipped measures against bounded enumeration of derived proof trees."""
    outcome = SuiteOutcome("stratification")
    count, atoms, depth = opts.sizes(20, 2, 3)
    for name in CALCULI:
        b = bundle(name)
        report = test_stratification(
            b.nrtss, b.strat, universe(atoms), depth, bn=b.bn, fuel=min(opts.fuel, 8),
            samples=count, seed=opts.seed, fresh_slack=opts.fresh_slack,
        )
        outcome.check(report.ok, lambda: "\n".join([name] + report.lines()))
        outcome.notes.append(f"{name}: {report.states} state(s), {report.nodes} node(s)")
    return outcome


def suite_forced_failure(opts: SuiteOptions) -> SuiteOutcome:
    """Checks the BA property on a transition built to break it."""
    outcome = SuiteOutcome("forced-failure")
    sig = bundle("early-abs").nrtss.signature.signature
    a = Atom(CH, 0)
    target = sig.app("out", AtomTm(a), AtomTm(a), sig.app("null"))
    source = interpret(sig.app("tau", target))
    residual = interpret(Abs(a, TupleTm((sig.app("tauA"), target))))
    witnesses = ba_witnesses(TransitionSet.of([Transition(source, residual)], ABSTRACTION))
    outcome.check(not witnesses, lambda: _listing("abstracted atom free in the target:", witnesses))
    return outcome


SUITES: Dict[str, Callable[[SuiteOptions], SuiteOutcome]] = {
    "permutations": suite_permutations,
    "terms": suite_terms,
    "nominal": suite_nominal,
    "simplification": suite_simplification,
    "entailment-oracle": suite_entailment,
    "mediator": suite_mediator,
    "rulesets": suite_rulesets,
    "formats": suite_formats,
    "stratification": suite_stratification,
    "derivations": suite_derivations,
    "roundtrips": suite_roundtrips,
    "translation": suite_translation,
}


def run_suites(names: Optional[Sequence[str]], opts: SuiteOptions, force_failure: bool = False) -> List[SuiteOutcome]:
    """Run the named suites (all when `names` is empty) in registry order."""
    wanted = list(names or SUITES)
    unknown = [name for name in wanted if name not in SUITES]
    if unknown:
        raise NomsosError(f"unknown suite(s): {', '.join(unknown)}; known: {', '.join(SUITES)}")
    outcomes = []
    for name in SUITES:
        if name in wanted:
            logger.info(f"running suite {name} (seed {opts.seed})")
            outcome = SUITES[name](opts)
            logger.info(f"suite {name}: {outcome.cases} case(s), {outcome.failures} failure(s)")
            outcomes.append(outcome)
    if force_failure:
        outcomes.append(suite_forced_failure(opts))
    return outcomes
