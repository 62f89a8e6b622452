"""Recursive-descent parser for the experiment language.

`parse_experiment` never raises on bad input: it returns either a parsed
:class:`ExperimentSpec` or a non-empty list of :class:`SourceError` with
1-based positions. The grammar is strict; there is no error recovery beyond
reporting the first failure.
"""

from __future__ import annotations

from ..interaction import InteractionPlan, InteractionPoint, Role
from ..model import (
    ConstraintOp,
    ConstraintSpec,
    Direction,
    MetricScope,
    MetricSpec,
    ScopeKind,
    TaskKind,
    TaskSpec,
    VariabilityPoint,
    VpKind,
    WorkflowSpec,
)
from ..monitor import MonitorSpec
from ..strategy import Intent, StrategyKind, StrategySpec
from .ast import ExperimentSpec, SourceError
from .lexer import LexError, Token, tokenize


class ParseFailure(Exception):
    def __init__(self, error: SourceError):
        super().__init__(str(error))
        self.error = error


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != "EOF":
            self.pos += 1
        return tok

    def fail(self, code: str, message: str, token: Token | None = None) -> None:
        tok = token or self.peek()
        raise ParseFailure(SourceError(tok.line, tok.column, code, message))

    def expect(self, type_: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.type != type_:
            self.fail("Expected", f"expected {what or type_}, found {self._describe(tok)}")
        return self.advance()

    def keyword(self, word: str) -> Token:
        tok = self.peek()
        if tok.type != "KEYWORD" or tok.value != word:
            self.fail("Expected", f"expected '{word}', found {self._describe(tok)}")
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.type == "KEYWORD" and tok.value == word

    def ident(self, what: str = "identifier") -> str:
        tok = self.peek()
        if tok.type == "KEYWORD":
            self.fail("ReservedWord", f"'{tok.value}' is a reserved word and cannot name a {what}")
        if tok.type != "IDENT":
            self.fail("Expected", f"expected {what}, found {self._describe(tok)}")
        return self.advance().value  # type: ignore[return-value]

    def label(self, name: str) -> None:
        tok = self.peek()
        if tok.type != "IDENT" or tok.value != name:
            self.fail("Expected", f"expected '{name}', found {self._describe(tok)}")
        self.advance()

    def integer(self, what: str = "integer") -> int:
        tok = self.expect("NUMBER", what)
        if not isinstance(tok.value, int):
            self.fail("Expected", f"expected {what}, found a decimal", tok)
        return tok.value  # type: ignore[return-value]

    def scalar(self, what: str = "number"):
        tok = self.expect("NUMBER", what)
        return tok.value

    @staticmethod
    def _describe(tok: Token) -> str:
        if tok.type == "EOF":
            return "end of input"
        if tok.type in ("IDENT", "KEYWORD"):
            return f"'{tok.value}'"
        if tok.type == "STRING":
            return "a string"
        if tok.type == "NUMBER":
            return f"number {tok.value}"
        return f"'{tok.value}'"

    # -- grammar ------------------------------------------------------------

    def parse(self) -> ExperimentSpec:
        self.keyword("experiment")
        name = self.ident("experiment")
        self.expect("{")
        intent = self.parse_intent()
        workflow = self.parse_workflow()
        vps = self.parse_variability()
        strategy = self.parse_strategy()
        metrics = self.parse_metrics() if self.at_keyword("metrics") else ()
        constraints = self.parse_constraints() if self.at_keyword("constraints") else ()
        plan = self.parse_interaction() if self.at_keyword("interaction") else InteractionPlan()
        monitor = self.parse_monitor() if self.at_keyword("monitor") else None
        self.expect("}")
        self.expect("EOF", "end of input")
        metrics = tuple(
            MetricSpec(
                m.name,
                m.scope,
                m.unit,
                intent.direction if m.name == intent.metric else Direction.INFORMATIONAL,
            )
            for m in metrics
        )
        return ExperimentSpec(
            name=name,
            intent=intent,
            workflow=workflow,
            vps=vps,
            strategy=strategy,
            metrics=metrics,
            constraints=constraints,
            interaction=plan,
            monitor=monitor,
        )

    def parse_intent(self) -> Intent:
        self.keyword("intent")
        tok = self.peek()
        if self.at_keyword("maximize"):
            direction = Direction.MAXIMIZE
        elif self.at_keyword("minimize"):
            direction = Direction.MINIMIZE
        else:
            self.fail("Expected", f"expected 'maximize' or 'minimize', found {self._describe(tok)}")
        self.advance()
        metric = self.ident("metric")
        self.expect(";")
        return Intent(direction, metric)

    def parse_workflow(self) -> WorkflowSpec:
        self.keyword("workflow")
        self.expect("{")
        tasks: list[TaskSpec] = []
        while self.at_keyword("task"):
            tasks.append(self.parse_task())
        edges: list[tuple[str, str]] = []
        while self.peek().type == "IDENT":
            edges.extend(self.parse_edge_chain())
        self.expect("}")
        return WorkflowSpec(tasks=tuple(tasks), edges=tuple(edges))

    def parse_task(self) -> TaskSpec:
        self.keyword("task")
        name = self.ident("task")
        impl: str | None = None
        kind = TaskKind.AUTOMATED
        if self.at_keyword("impl"):
            self.advance()
            impl = self.expect("STRING", "implementation command string").value  # type: ignore[assignment]
        elif self.at_keyword("abstract"):
            self.advance()
        elif self.at_keyword("manual"):
            self.advance()
            kind = TaskKind.MANUAL
        else:
            self.fail("Expected", "expected 'impl', 'abstract' or 'manual'")
        params: dict[str, object] = {}
        if self.at_keyword("params"):
            self.advance()
            self.expect("(")
            while True:
                pname = self.ident("parameter")
                self.expect("=")
                params[pname] = self.scalar("parameter default")
                if self.peek().type != ",":
                    break
                self.advance()
            self.expect(")")
        inputs: dict[str, str] = {}
        if self.at_keyword("inputs"):
            self.advance()
            self.expect("(")
            while True:
                iname = self.ident("input")
                self.expect("=")
                inputs[iname] = self.expect("STRING", "dataset reference").value  # type: ignore[assignment]
                if self.peek().type != ",":
                    break
                self.advance()
            self.expect(")")
        self.expect(";")
        return TaskSpec(name=name, kind=kind, impl=impl, params=params, inputs=inputs)

    def parse_edge_chain(self) -> list[tuple[str, str]]:
        nodes = [self.ident("task")]
        self.expect("ARROW", "'->'")
        nodes.append(self.ident("task"))
        while self.peek().type == "ARROW":
            self.advance()
            nodes.append(self.ident("task"))
        self.expect(";")
        return list(zip(nodes, nodes[1:]))

    def parse_variability(self) -> tuple[VariabilityPoint, ...]:
        self.keyword("variability")
        self.expect("{")
        vps: list[VariabilityPoint] = []
        while self.at_keyword("vp"):
            vps.append(self.parse_vp())
        self.expect("}")
        return tuple(vps)

    def parse_vp(self) -> VariabilityPoint:
        self.keyword("vp")
        name = self.ident("variability point")
        self.expect(":")
        tok = self.peek()
        if self.at_keyword("impl"):
            self.advance()
            self.expect("(")
            task = self.ident("task")
            self.expect(")")
            kind, field = VpKind.IMPLEMENTATION, None
        elif self.at_keyword("param"):
            self.advance()
            self.expect("(")
            task = self.ident("task")
            self.expect(".")
            field = self.ident("parameter")
            self.expect(")")
            kind = VpKind.PARAMETER
        elif self.at_keyword("input"):
            self.advance()
            self.expect("(")
            task = self.ident("task")
            self.expect(".")
            field = self.ident("input")
            self.expect(")")
            kind = VpKind.INPUT
        elif self.at_keyword("deploy"):
            self.advance()
            self.expect("(")
            task = self.ident("task")
            self.expect(")")
            kind, field = VpKind.DEPLOYMENT, None
        else:
            self.fail("Expected", f"expected 'impl', 'param', 'input' or 'deploy', found {self._describe(tok)}")
        self.keyword("in")
        self.expect("{")
        values: list[object] = [self.parse_value()]
        while self.peek().type == ",":
            self.advance()
            values.append(self.parse_value())
        self.expect("}")
        self.expect(";")
        return VariabilityPoint(name=name, kind=kind, task=task, domain=tuple(values), target_field=field)

    def parse_value(self):
        tok = self.peek()
        if tok.type == "STRING" or tok.type == "NUMBER":
            return self.advance().value
        self.fail("Expected", f"expected a string or number, found {self._describe(tok)}")

    def parse_strategy(self) -> StrategySpec:
        self.keyword("strategy")
        if self.at_keyword("grid"):
            self.advance()
            self.expect(";")
            return StrategySpec(StrategyKind.GRID)
        if self.at_keyword("random"):
            self.advance()
            self.expect("(")
            self.label("n")
            self.expect("=")
            n = self.integer("n")
            self.expect(",")
            self.label("seed")
            self.expect("=")
            seed = self.integer("seed")
            self.expect(")")
            self.expect(";")
            return StrategySpec(StrategyKind.RANDOM, n=n, seed=seed)
        if self.at_keyword("bayesian"):
            self.advance()
            self.expect("(")
            self.label("n")
            self.expect("=")
            n = self.integer("n")
            self.expect(",")
            self.label("init")
            self.expect("=")
            init = self.integer("init")
            self.expect(",")
            self.label("seed")
            self.expect("=")
            seed = self.integer("seed")
            self.expect(")")
            self.expect(";")
            return StrategySpec(StrategyKind.BAYESIAN, n=n, init=init, seed=seed)
        self.fail("Expected", "expected 'grid', 'random' or 'bayesian'")
        raise AssertionError  # unreachable

    def parse_metrics(self) -> tuple[MetricSpec, ...]:
        self.keyword("metrics")
        self.expect("{")
        metrics: list[MetricSpec] = []
        while self.at_keyword("metric"):
            self.advance()
            name = self.ident("metric")
            scope = self.parse_scope()
            unit = ""
            if self.peek().type == "STRING":
                unit = self.advance().value  # type: ignore[assignment]
            self.expect(";")
            metrics.append(MetricSpec(name, scope, unit))
        self.expect("}")
        return tuple(metrics)

    def parse_scope(self) -> MetricScope:
        tok = self.peek()
        if self.at_keyword("workflow"):
            self.advance()
            return MetricScope(ScopeKind.WORKFLOW)
        if self.at_keyword("task"):
            self.advance()
            self.expect("(")
            task = self.ident("task")
            self.expect(")")
            return MetricScope(ScopeKind.TASK, task)
        if self.at_keyword("output"):
            self.advance()
            self.expect("(")
            task = self.ident("task")
            self.expect(")")
            return MetricScope(ScopeKind.OUTPUT, task)
        self.fail("Expected", f"expected a metric scope, found {self._describe(tok)}")
        raise AssertionError  # unreachable

    def parse_constraints(self) -> tuple[ConstraintSpec, ...]:
        self.keyword("constraints")
        self.expect("{")
        out: list[ConstraintSpec] = []
        while self.at_keyword("metric"):
            self.advance()
            name = self.ident("metric")
            tok = self.peek()
            if tok.type == "LE":
                op = ConstraintOp.LE
            elif tok.type == "GE":
                op = ConstraintOp.GE
            else:
                self.fail("Expected", f"expected '<=' or '>=', found {self._describe(tok)}")
            self.advance()
            bound = self.scalar("bound")
            hard = True
            if self.at_keyword("soft"):
                self.advance()
                hard = False
            self.expect(";")
            out.append(ConstraintSpec(name, op, bound, hard))
        self.expect("}")
        return tuple(out)

    def parse_interaction(self) -> InteractionPlan:
        self.keyword("interaction")
        self.expect("{")
        points: list[InteractionPoint] = []
        while self.at_keyword("checkpoint"):
            self.advance()
            self.keyword("after")
            k = self.integer("configuration count")
            self.keyword("configurations")
            self.keyword("role")
            if self.at_keyword("supervisor"):
                role = Role.SUPERVISOR
            elif self.at_keyword("validator"):
                role = Role.VALIDATOR
            else:
                self.fail("Expected", "expected 'supervisor' or 'validator'")
            self.advance()
            self.keyword("cost")
            cost = float(self.scalar("cost"))
            self.keyword("min")
            self.expect(";")
            points.append(InteractionPoint(role=role, cost_min=cost, after_k=k))
        self.keyword("budget")
        budget = float(self.scalar("budget"))
        self.keyword("min")
        self.expect(";")
        self.expect("}")
        return InteractionPlan(checkpoints=tuple(points), budget_total_min=budget)

    def parse_monitor(self) -> MonitorSpec:
        self.keyword("monitor")
        self.expect("{")
        self.keyword("metric")
        metric = self.ident("metric")
        self.keyword("threshold")
        threshold = float(self.scalar("threshold"))
        self.keyword("window")
        window = self.integer("window")
        self.keyword("min_new")
        min_new = self.integer("min_new")
        self.expect(";")
        self.expect("}")
        return MonitorSpec(metric=metric, threshold=threshold, window=window, min_new=min_new)


def parse_experiment(source: str) -> ExperimentSpec | list[SourceError]:
    """Parse source text; returns a spec or a non-empty list of errors."""
    if not source.strip():
        return [SourceError(1, 1, "EmptyInput", "experiment source is empty")]
    try:
        tokens = tokenize(source)
    except LexError as e:
        return [e.error]
    try:
        return _Parser(tokens).parse()
    except ParseFailure as e:
        return [e.error]
