"""Parsing and serialization for the STRIPS + typing subset of PDDL.

Only positive conjunctive preconditions and add/delete effects are accepted.
Anything else (negation, quantifiers, conditional effects, numeric fluents,
durative actions, derived predicates) raises :class:`UnsupportedFeature`
naming the offending token and its line, rather than being dropped.

Identifiers are case-insensitive and normalized to lower case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence, Union

ROOT_TYPE = "object"
SUPPORTED_REQUIREMENTS = (":strips", ":typing")

# Constructs recognized well enough to be rejected with a precise message.
_UNSUPPORTED_KEYWORDS = {
    "not": "negative literal",
    "or": "disjunction",
    "imply": "implication",
    "forall": "universal quantifier",
    "exists": "existential quantifier",
    "when": "conditional effect",
    "increase": "numeric fluent",
    "decrease": "numeric fluent",
    "assign": "numeric fluent",
    "scale-up": "numeric fluent",
    "scale-down": "numeric fluent",
    "=": "equality",
    ":functions": "numeric fluents",
    ":durative-action": "durative action",
    ":derived": "derived predicate",
    ":axiom": "axiom",
    ":metric": "plan metric",
    ":constraints": "trajectory constraint",
    ":timed-initial-literals": "timed initial literal",
}


class ParseError(ValueError):
    """Base class for every PDDL parsing failure."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PDDLSyntaxError(ParseError):
    """Malformed s-expression or misplaced token."""


class UnsupportedFeature(ParseError):
    """Valid PDDL outside the STRIPS + typing subset."""


class SemanticError(ParseError):
    """Well-formed text that is inconsistent with its domain."""


# ---------------------------------------------------------------------------
# s-expressions


class Token(str):
    """A lower-cased symbol that remembers the line it came from."""

    line: int

    def __new__(cls, text: str, line: int) -> "Token":
        tok = super().__new__(cls, text)
        tok.line = line
        return tok


class SList(list):
    """A parenthesized list; ``line`` is the line of its opening paren."""

    def __init__(self, items: Iterable = (), line: int = 0):
        super().__init__(items)
        self.line = line


SExpr = Union[Token, SList]


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0]
        for piece in line.replace("(", " ( ").replace(")", " ) ").split():
            tokens.append(Token(piece.lower(), lineno))
    return tokens


def parse_sexprs(text: str) -> list[SExpr]:
    """Parse every top-level s-expression in ``text``."""
    stack: list[SList] = [SList(line=1)]
    for tok in tokenize(text):
        if tok == "(":
            stack.append(SList(line=tok.line))
        elif tok == ")":
            if len(stack) == 1:
                raise PDDLSyntaxError("unbalanced ')'", tok.line)
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) > 1:
        raise PDDLSyntaxError("unbalanced '(' (missing ')')", stack[-1].line)
    return list(stack[0])


def _line(x: SExpr) -> int:
    return getattr(x, "line", 0)


def _expect_list(x: SExpr, what: str) -> SList:
    if not isinstance(x, SList):
        raise PDDLSyntaxError(f"expected {what}, found '{x}'", _line(x))
    return x


def _expect_symbol(x: SExpr, what: str) -> Token:
    if isinstance(x, SList):
        raise PDDLSyntaxError(f"expected {what}, found a list", _line(x))
    if x in ("(", ")") or x.startswith(":"):
        raise PDDLSyntaxError(f"expected {what}, found '{x}'", _line(x))
    return x


def _reject_unsupported(tok: Token) -> None:
    if tok in _UNSUPPORTED_KEYWORDS:
        raise UnsupportedFeature(
            f"'{tok}' ({_UNSUPPORTED_KEYWORDS[tok]}) is outside the STRIPS subset", tok.line
        )


def parse_typed_list(items: Sequence[SExpr], what: str) -> list[tuple[Token, str]]:
    """``a b - t c`` -> ``[(a, t), (b, t), (c, object)]``."""
    out: list[tuple[Token, str]] = []
    pending: list[Token] = []
    i = 0
    while i < len(items):
        tok = items[i]
        if isinstance(tok, SList):
            if tok and isinstance(tok[0], Token) and tok[0] == "either":
                raise UnsupportedFeature("'either' types are not supported", tok.line)
            raise PDDLSyntaxError(f"unexpected list in {what}", tok.line)
        if tok == "-":
            if not pending or i + 1 >= len(items):
                raise PDDLSyntaxError(f"dangling '-' in {what}", tok.line)
            type_tok = items[i + 1]
            if isinstance(type_tok, SList):
                if type_tok and type_tok[0] == "either":
                    raise UnsupportedFeature("'either' types are not supported", type_tok.line)
                raise PDDLSyntaxError(f"expected type name in {what}", type_tok.line)
            out.extend((name, str(type_tok)) for name in pending)
            pending = []
            i += 2
            continue
        pending.append(_expect_symbol(tok, what))
        i += 1
    out.extend((name, ROOT_TYPE) for name in pending)
    return out


# ---------------------------------------------------------------------------
# model


class Atom(NamedTuple):
    predicate: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return "(" + " ".join((self.predicate, *self.args)) + ")"


@dataclass(frozen=True)
class Predicate:
    name: str
    params: tuple[tuple[str, str], ...] = ()

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def param_types(self) -> tuple[str, ...]:
        return tuple(t for _, t in self.params)


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[tuple[str, str], ...]
    preconditions: tuple[Atom, ...]
    add_effects: tuple[Atom, ...]
    del_effects: tuple[Atom, ...]


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple[str, ...] = (":strips",)
    types: tuple[tuple[str, str], ...] = ()  # (child, parent) in declaration order
    constants: tuple[tuple[str, str], ...] = ()
    predicates: tuple[Predicate, ...] = ()
    schemas: tuple[ActionSchema, ...] = ()

    @property
    def type_parents(self) -> dict[str, str]:
        return dict(self.types)

    def predicate(self, name: str) -> Predicate | None:
        for p in self.predicates:
            if p.name == name:
                return p
        return None

    def schema(self, name: str) -> ActionSchema | None:
        for s in self.schemas:
            if s.name == name:
                return s
        return None

    def declared_types(self) -> set[str]:
        return {ROOT_TYPE, *(c for c, _ in self.types), *(p for _, p in self.types)}

    def is_subtype(self, child: str, ancestor: str) -> bool:
        parents = self.type_parents
        t: str | None = child
        seen = set()
        while t is not None and t not in seen:
            if t == ancestor:
                return True
            seen.add(t)
            t = parents.get(t, ROOT_TYPE if t != ROOT_TYPE else None)
        return False


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...]
    init: frozenset[Atom] = field(default_factory=frozenset)
    goal: frozenset[Atom] = field(default_factory=frozenset)

    @property
    def object_types(self) -> dict[str, str]:
        return dict(self.objects)


# ---------------------------------------------------------------------------
# domain parsing


def _split_define(exprs: list[SExpr], kind: str) -> tuple[Token, list[SExpr]]:
    if len(exprs) != 1:
        line = _line(exprs[1]) if len(exprs) > 1 else 1
        raise PDDLSyntaxError(f"expected exactly one (define ...) form, found {len(exprs)}", line)
    top = _expect_list(exprs[0], "(define ...)")
    if len(top) < 2 or top[0] != "define":
        raise PDDLSyntaxError("expected (define ...)", top.line)
    header = _expect_list(top[1], f"({kind} <name>)")
    if len(header) != 2 or header[0] != kind:
        raise PDDLSyntaxError(f"expected ({kind} <name>)", header.line)
    return _expect_symbol(header[1], f"{kind} name"), list(top[2:])


def _section_key(sec: SExpr) -> Token:
    sec = _expect_list(sec, "a section")
    if not sec or isinstance(sec[0], SList):
        raise PDDLSyntaxError("section without keyword", sec.line)
    key = sec[0]
    _reject_unsupported(key)
    return key


def _parse_atom(
    x: SExpr,
    preds: dict[str, Predicate] | None,
    where: str,
) -> Atom:
    lst = _expect_list(x, f"an atom in {where}")
    if not lst:
        raise PDDLSyntaxError(f"empty atom in {where}", lst.line)
    head = lst[0]
    if isinstance(head, SList):
        raise PDDLSyntaxError(f"expected predicate name in {where}", lst.line)
    _reject_unsupported(head)
    if head in ("and",):
        raise PDDLSyntaxError(f"nested 'and' in {where}", head.line)
    args = tuple(str(_expect_symbol(a, "atom argument")) for a in lst[1:])
    if preds is not None:
        pred = preds.get(head)
        if pred is None:
            raise SemanticError(f"unknown predicate '{head}' in {where}", head.line)
        if pred.arity != len(args):
            raise SemanticError(
                f"arity mismatch for '{head}' in {where}: expected {pred.arity}, got {len(args)}",
                head.line,
            )
    return Atom(str(head), args)


def _conjunction(x: SExpr, where: str) -> list[SList]:
    """Flatten ``(and a b)`` / ``a`` / ``()`` into a list of literal expressions."""
    lst = _expect_list(x, where)
    if not lst:
        return []
    head = lst[0]
    if isinstance(head, Token) and head == "and":
        return [_expect_list(item, f"a literal in {where}") for item in lst[1:]]
    return [lst]


def _dedupe(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    return tuple(dict.fromkeys(atoms))


def _parse_schema(sec: SList, domain_preds: dict[str, Predicate], dom: "_DomainBuilder") -> ActionSchema:
    if len(sec) < 2:
        raise PDDLSyntaxError("action without name", sec.line)
    name = str(_expect_symbol(sec[1], "action name"))
    params: list[tuple[str, str]] = []
    pre_x: SExpr | None = None
    eff_x: SExpr | None = None
    i = 2
    while i < len(sec):
        key = sec[i]
        if isinstance(key, SList) or not key.startswith(":"):
            raise PDDLSyntaxError(f"unexpected '{key}' in action '{name}'", _line(key))
        if i + 1 >= len(sec):
            raise PDDLSyntaxError(f"missing value for '{key}' in action '{name}'", key.line)
        val = sec[i + 1]
        if key == ":parameters":
            plist = _expect_list(val, "parameter list")
            params = [(str(v), t) for v, t in parse_typed_list(plist, f"parameters of '{name}'")]
        elif key == ":precondition":
            pre_x = val
        elif key == ":effect":
            eff_x = val
        else:
            _reject_unsupported(key)
            raise PDDLSyntaxError(f"unknown action field '{key}'", key.line)
        i += 2

    var_types = {}
    for v, t in params:
        if not v.startswith("?"):
            raise PDDLSyntaxError(f"parameter '{v}' of '{name}' must start with '?'", sec.line)
        if v in var_types:
            raise SemanticError(f"duplicate parameter '{v}' in '{name}'", sec.line)
        if t not in dom.declared_types:
            raise SemanticError(f"unknown type '{t}' for '{v}' in '{name}'", sec.line)
        var_types[v] = t

    def check_terms(atom: Atom, line: int) -> None:
        pred = domain_preds[atom.predicate]
        for arg, ptype in zip(atom.args, pred.param_types):
            if arg.startswith("?"):
                if arg not in var_types:
                    raise SemanticError(f"undeclared variable '{arg}' in '{name}'", line)
                t = var_types[arg]
            elif arg in dom.constants:
                t = dom.constants[arg]
            else:
                raise SemanticError(f"unknown constant '{arg}' in '{name}'", line)
            if not (dom.is_subtype(t, ptype) or dom.is_subtype(ptype, t)):
                raise SemanticError(
                    f"type mismatch in '{name}': '{arg}' of type '{t}' used as '{ptype}' in {atom}",
                    line,
                )

    pre: list[Atom] = []
    if pre_x is not None:
        for lit in _conjunction(pre_x, f"precondition of '{name}'"):
            if lit and lit[0] == "not":
                raise UnsupportedFeature(
                    f"'not' (negative precondition) in '{name}' is outside the STRIPS subset",
                    lit[0].line,
                )
            atom = _parse_atom(lit, domain_preds, f"precondition of '{name}'")
            check_terms(atom, _line(lit))
            pre.append(atom)

    add: list[Atom] = []
    dele: list[Atom] = []
    if eff_x is not None:
        for lit in _conjunction(eff_x, f"effect of '{name}'"):
            if lit and lit[0] == "not":
                if len(lit) != 2:
                    raise PDDLSyntaxError(f"malformed 'not' in effect of '{name}'", lit.line)
                atom = _parse_atom(lit[1], domain_preds, f"effect of '{name}'")
                check_terms(atom, _line(lit))
                dele.append(atom)
            else:
                atom = _parse_atom(lit, domain_preds, f"effect of '{name}'")
                check_terms(atom, _line(lit))
                add.append(atom)

    add_t, del_t = _dedupe(add), _dedupe(dele)
    clash = set(add_t) & set(del_t)
    if clash:
        raise SemanticError(
            f"action '{name}' both adds and deletes {sorted(map(str, clash))}", sec.line
        )
    return ActionSchema(name, tuple(params), _dedupe(pre), add_t, del_t)


class _DomainBuilder:
    def __init__(self) -> None:
        self.types: dict[str, str] = {}
        self.constants: dict[str, str] = {}

    @property
    def declared_types(self) -> set[str]:
        return {ROOT_TYPE, *self.types, *self.types.values()}

    def is_subtype(self, child: str, ancestor: str) -> bool:
        t: str | None = child
        while t is not None:
            if t == ancestor:
                return True
            t = self.types.get(t, ROOT_TYPE if t != ROOT_TYPE else None)
        return False


def parse_domain(text: str) -> Domain:
    """Parse a domain file.

    Raises :class:`PDDLSyntaxError` for malformed s-expressions,
    :class:`UnsupportedFeature` for constructs outside STRIPS + typing and
    :class:`SemanticError` for inconsistent declarations.
    """
    name, sections = _split_define(parse_sexprs(text), "domain")
    b = _DomainBuilder()
    requirements: list[str] = []
    predicates: dict[str, Predicate] = {}
    schema_secs: list[SList] = []
    seen_sections: set[str] = set()

    for sec in sections:
        key = _section_key(sec)
        if key in seen_sections and key != ":action":
            raise PDDLSyntaxError(f"duplicate section '{key}'", key.line)
        seen_sections.add(key)
        if key == ":requirements":
            for r in sec[1:]:
                if isinstance(r, SList) or r not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedFeature(f"requirement '{r}' is not supported", _line(r))
                requirements.append(str(r))
        elif key == ":types":
            for child, parent in parse_typed_list(sec[1:], ":types"):
                if child == ROOT_TYPE:
                    continue
                if child in b.types:
                    raise SemanticError(f"type '{child}' declared twice", child.line)
                b.types[str(child)] = parent
            for parent in list(b.types.values()):
                if parent != ROOT_TYPE and parent not in b.types:
                    b.types[parent] = ROOT_TYPE
            for t in b.types:
                seen: set[str] = set()
                cur = t
                while cur != ROOT_TYPE:
                    if cur in seen:
                        raise SemanticError(f"cyclic type hierarchy through '{t}'", sec.line)
                    seen.add(cur)
                    cur = b.types.get(cur, ROOT_TYPE)
        elif key == ":constants":
            for cname, ctype in parse_typed_list(sec[1:], ":constants"):
                if ctype not in b.declared_types:
                    raise SemanticError(f"unknown type '{ctype}' for constant '{cname}'", cname.line)
                b.constants[str(cname)] = ctype
        elif key == ":predicates":
            for p in sec[1:]:
                p = _expect_list(p, "predicate declaration")
                if not p:
                    raise PDDLSyntaxError("empty predicate declaration", p.line)
                pname = _expect_symbol(p[0], "predicate name")
                _reject_unsupported(pname)
                if pname in predicates:
                    raise SemanticError(f"predicate '{pname}' declared twice", pname.line)
                params = parse_typed_list(p[1:], f"predicate '{pname}'")
                for v, t in params:
                    if t not in b.declared_types:
                        raise SemanticError(f"unknown type '{t}' in predicate '{pname}'", pname.line)
                predicates[str(pname)] = Predicate(str(pname), tuple((str(v), t) for v, t in params))
        elif key == ":action":
            schema_secs.append(sec)
        else:
            raise PDDLSyntaxError(f"unknown domain section '{key}'", key.line)

    schemas: list[ActionSchema] = []
    for sec in schema_secs:
        schema = _parse_schema(sec, predicates, b)
        if any(s.name == schema.name for s in schemas):
            raise SemanticError(f"action '{schema.name}' declared twice", sec.line)
        schemas.append(schema)

    return Domain(
        name=str(name),
        requirements=tuple(requirements),
        types=tuple(b.types.items()),
        constants=tuple(b.constants.items()),
        predicates=tuple(predicates.values()),
        schemas=tuple(schemas),
    )


# ---------------------------------------------------------------------------
# problem parsing


def check_ground_atom(atom: Atom, domain: Domain, objects: dict[str, str], where: str, line: int | None = None) -> None:
    pred = domain.predicate(atom.predicate)
    if pred is None:
        raise SemanticError(f"unknown predicate '{atom.predicate}' in {where}", line)
    if pred.arity != len(atom.args):
        raise SemanticError(
            f"arity mismatch for '{atom.predicate}' in {where}: expected {pred.arity}, got {len(atom.args)}",
            line,
        )
    for arg, ptype in zip(atom.args, pred.param_types):
        if arg not in objects:
            raise SemanticError(f"unknown object '{arg}' in {atom} ({where})", line)
        if not domain.is_subtype(objects[arg], ptype):
            raise SemanticError(
                f"type mismatch in {atom} ({where}): '{arg}' is '{objects[arg]}', expected '{ptype}'",
                line,
            )


def build_problem(
    name: str,
    domain: Domain,
    objects: Iterable[tuple[str, str]],
    init: Iterable[Atom],
    goal: Iterable[Atom],
    domain_name: str | None = None,
) -> Problem:
    """Assemble a type-checked :class:`Problem` from already-tokenized parts."""
    declared = domain.declared_types()
    obj: dict[str, str] = {}
    for oname, otype in objects:
        if otype not in declared:
            raise SemanticError(f"unknown type '{otype}' for object '{oname}'")
        if oname in obj and obj[oname] != otype:
            raise SemanticError(f"object '{oname}' declared with two types")
        obj[oname] = otype
    for cname, ctype in domain.constants:
        obj.setdefault(cname, ctype)
    init_set = frozenset(init)
    goal_set = frozenset(goal)
    for a in sorted(init_set):
        check_ground_atom(a, domain, obj, "init")
    if not goal_set:
        raise SemanticError("goal is empty")
    for a in sorted(goal_set):
        check_ground_atom(a, domain, obj, "goal")
    return Problem(name, domain_name or domain.name, tuple(obj.items()), init_set, goal_set)


def parse_problem(text: str, domain: Domain) -> Problem:
    """Parse a problem file and type-check it against ``domain``."""
    name, sections = _split_define(parse_sexprs(text), "problem")
    dom_name: str | None = None
    objects: list[tuple[str, str]] = []
    init: list[tuple[Atom, int]] = []
    goal: list[tuple[Atom, int]] = []
    seen: set[str] = set()
    for sec in sections:
        key = _section_key(sec)
        if key in seen:
            raise PDDLSyntaxError(f"duplicate section '{key}'", key.line)
        seen.add(key)
        if key == ":domain":
            if len(sec) != 2:
                raise PDDLSyntaxError("expected (:domain <name>)", sec.line)
            dom_name = str(_expect_symbol(sec[1], "domain name"))
        elif key == ":requirements":
            for r in sec[1:]:
                if isinstance(r, SList) or r not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedFeature(f"requirement '{r}' is not supported", _line(r))
        elif key == ":objects":
            for oname, otype in parse_typed_list(sec[1:], ":objects"):
                if otype not in domain.declared_types():
                    raise SemanticError(f"unknown type '{otype}' for object '{oname}'", oname.line)
                objects.append((str(oname), otype))
        elif key == ":init":
            for x in sec[1:]:
                init.append((_parse_atom(x, None, "init"), _line(x)))
        elif key == ":goal":
            if len(sec) > 2:
                raise PDDLSyntaxError("goal must be a single (and ...) or atom", sec.line)
            if len(sec) == 2:
                for lit in _conjunction(sec[1], "goal"):
                    if lit and lit[0] == "not":
                        raise UnsupportedFeature("negative goal is outside the STRIPS subset", lit[0].line)
                    goal.append((_parse_atom(lit, None, "goal"), _line(lit)))
        else:
            raise PDDLSyntaxError(f"unknown problem section '{key}'", key.line)
    if dom_name is not None and dom_name != domain.name:
        raise SemanticError(f"problem is for domain '{dom_name}', not '{domain.name}'")
    if ":goal" not in seen:
        raise SemanticError("problem has no :goal section")
    known = dict(objects)
    for cname, ctype in domain.constants:
        known.setdefault(cname, ctype)
    for atom, line in init:
        check_ground_atom(atom, domain, known, "init", line)
    for atom, line in goal:
        check_ground_atom(atom, domain, known, "goal", line)
    return build_problem(
        str(name), domain, objects, (a for a, _ in init), (a for a, _ in goal), dom_name
    )


# ---------------------------------------------------------------------------
# serialization


def _typed(items: Sequence[tuple[str, str]]) -> str:
    untyped = all(t == ROOT_TYPE for _, t in items)
    groups: list[tuple[list[str], str]] = []
    for n, t in items:
        if groups and groups[-1][1] == t:
            groups[-1][0].append(n)
        else:
            groups.append(([n], t))
    return " ".join(" ".join(ns) + ("" if untyped else f" - {t}") for ns, t in groups)


def _conj(atoms: Sequence[Atom]) -> str:
    if not atoms:
        return "()"
    if len(atoms) == 1:
        return str(atoms[0])
    return "(and " + " ".join(map(str, atoms)) + ")"


def serialize_domain(domain: Domain) -> str:
    lines = [f"(define (domain {domain.name})"]
    if domain.requirements:
        lines.append(f"  (:requirements {' '.join(domain.requirements)})")
    if domain.types:
        lines.append(f"  (:types {' '.join(f'{c} - {p}' for c, p in domain.types)})")
    if domain.constants:
        lines.append(f"  (:constants {_typed(domain.constants)})")
    lines.append("  (:predicates")
    for p in domain.predicates:
        params = _typed(p.params)
        lines.append(f"    ({p.name}{' ' + params if params else ''})")
    lines.append("  )")
    for s in domain.schemas:
        lines.append(f"  (:action {s.name}")
        lines.append(f"    :parameters ({_typed(s.params)})")
        lines.append(f"    :precondition {_conj(s.preconditions)}")
        effects = [str(a) for a in s.add_effects] + [f"(not {a})" for a in s.del_effects]
        if len(effects) == 1:
            eff = effects[0]
        else:
            eff = "(and " + " ".join(effects) + ")" if effects else "()"
        lines.append(f"    :effect {eff})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def serialize_problem(problem: Problem) -> str:
    objects = _typed(problem.objects)
    lines = [
        f"(define (problem {problem.name})",
        f"  (:domain {problem.domain_name})",
        f"  (:objects{' ' + objects if objects else ''})",
        "  (:init",
        *(f"    {a}" for a in sorted(problem.init)),
        "  )",
        "  (:goal (and",
        *(f"    {a}" for a in sorted(problem.goal)),
        "  ))",
        ")",
    ]
    return "\n".join(lines) + "\n"


def serialize(obj: Domain | Problem) -> str:
    if isinstance(obj, Domain):
        return serialize_domain(obj)
    if isinstance(obj, Problem):
        return serialize_problem(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")
