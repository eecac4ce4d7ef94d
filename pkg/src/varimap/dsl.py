"""Line-oriented DSL for process repositories: parser, canonical printer,
and a DOT exporter for diagram rendering.

Grammar:

    project  := process*
    process  := "process" IDENT (":" STRING)? ("level" INT)? "{" stmt* "}"
    stmt     := nodedecl | flow
    nodedecl := KIND IDENT (":" STRING)? ("calls" IDENT)? ";"
    KIND     := "task" | "sub" | "xor_split" | "xor_join"
              | "and_split" | "and_join" | "start" | "end"
    flow     := IDENT "->" IDENT ("when" STRING)? ";"

Comments run from "#" to end of line. IDENT = [A-Za-z_][A-Za-z0-9_]*.
STRING is double-quoted; \\" and \\\\ escape. A "when" string holds a
comma-separated list of variant ids and populates the flow's variant tags.

The process header extends the node/flow core compatibly: the optional
`: STRING` names the definition (default: its id), and a missing `level`
is inferred from call depth (definitions called by nobody get level 2).
The repository root is the first level-2 definition in document order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    NodeKind,
    ProcessDefinition,
    ProcessNode,
    ProcessRepository,
    SequenceFlow,
    Violation,
    validate_repository,
)

_KIND_BY_KEYWORD = {
    "task": NodeKind.TASK,
    "sub": NodeKind.SUB_PROCESS_CALL,
    "xor_split": NodeKind.XOR_SPLIT,
    "xor_join": NodeKind.XOR_JOIN,
    "and_split": NodeKind.AND_SPLIT,
    "and_join": NodeKind.AND_JOIN,
    "start": NodeKind.START_EVENT,
    "end": NodeKind.END_EVENT,
}
_KEYWORD_BY_KIND = {v: k for k, v in _KIND_BY_KEYWORD.items()}


class DslSyntaxError(Exception):
    def __init__(self, line: int, column: int, expected: str, found: str):
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        super().__init__(f"line {line}, column {column}: expected {expected}, found {found}")


class ResolutionError(Exception):
    def __init__(self, name: str, line: int | None = None, column: int | None = None):
        self.name = name
        self.line = line
        self.column = column
        at = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"unresolved name {name!r}{at}")


class DslValidationError(Exception):
    """Structural violations found in an otherwise well-formed document."""

    def __init__(self, violations: list[Violation], positions: dict[tuple[str | None, str | None], tuple[int, int]]):
        self.violations = violations
        self.positions = positions
        lines = []
        for v in violations:
            pos = positions.get((v.definition_id, v.subject)) or positions.get((v.definition_id, None))
            at = f"line {pos[0]}, column {pos[1]}: " if pos else ""
            lines.append(f"{at}{v.code}: {v.message}")
        super().__init__("\n".join(lines))


@dataclass(frozen=True)
class Token:
    kind: str  # ident | string | int | punct | eof
    value: str
    line: int
    column: int


def _tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == "#":
            while i < n and source[i] != "\n":
                i += 1
        elif ch == "-" and i + 1 < n and source[i + 1] == ">":
            tokens.append(Token("punct", "->", line, col))
            i += 2
            col += 2
        elif ch in "{};:":
            tokens.append(Token("punct", ch, line, col))
            i += 1
            col += 1
        elif ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            buf = []
            closed = False
            while i < n:
                c = source[i]
                if c == "\\" and i + 1 < n and source[i + 1] in '"\\':
                    buf.append(source[i + 1])
                    i += 2
                    col += 2
                elif c == '"':
                    i += 1
                    col += 1
                    closed = True
                    break
                elif c == "\n":
                    break
                else:
                    buf.append(c)
                    i += 1
                    col += 1
            if not closed:
                raise DslSyntaxError(start_line, start_col, "closing quote", "end of line")
            tokens.append(Token("string", "".join(buf), start_line, start_col))
        elif ch.isdigit():
            start_col = col
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("int", source[i:j], line, start_col))
            col += j - i
            i = j
        elif ch.isalpha() or ch == "_":
            start_col = col
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(Token("ident", source[i:j], line, start_col))
            col += j - i
            i = j
        else:
            raise DslSyntaxError(line, col, "token", repr(ch))
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass
class _RawProcess:
    id: str
    name: str
    level: int | None
    nodes: list[ProcessNode]
    flows: list[tuple[str, str, frozenset[str], int, int]]  # + position of the flow stmt
    line: int
    column: int
    node_pos: dict[str, tuple[int, int]] = field(default_factory=dict)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, value: str | None = None, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            found = tok.value or "end of input"
            raise DslSyntaxError(tok.line, tok.column, what or value or kind, found)
        return self.take()

    def parse_project(self) -> list[_RawProcess]:
        processes = []
        while self.peek().kind != "eof":
            processes.append(self.parse_process())
        return processes

    def parse_process(self) -> _RawProcess:
        head = self.expect("ident", "process", '"process"')
        ident = self.expect("ident", what="process identifier")
        name = ident.value
        if self.peek().kind == "punct" and self.peek().value == ":":
            self.take()
            name = self.expect("string", what="process name string").value
        level: int | None = None
        if self.peek().kind == "ident" and self.peek().value == "level":
            self.take()
            level = int(self.expect("int", what="level integer").value)
        self.expect("punct", "{")
        proc = _RawProcess(ident.value, name, level, [], [], head.line, head.column)
        while not (self.peek().kind == "punct" and self.peek().value == "}"):
            if self.peek().kind == "eof":
                raise DslSyntaxError(self.peek().line, self.peek().column, '"}"', "end of input")
            self.parse_stmt(proc)
        self.take()  # }
        return proc

    def parse_stmt(self, proc: _RawProcess) -> None:
        tok = self.peek()
        if tok.kind != "ident":
            raise DslSyntaxError(tok.line, tok.column, "node declaration or flow", tok.value or "end of input")
        if tok.value in _KIND_BY_KEYWORD and self.peek(1).kind == "ident":
            self.parse_nodedecl(proc)
        else:
            self.parse_flow(proc)

    def parse_nodedecl(self, proc: _RawProcess) -> None:
        kind_tok = self.take()
        ident = self.expect("ident", what="node identifier")
        label: str | None = None
        callee: str | None = None
        if self.peek().kind == "punct" and self.peek().value == ":":
            self.take()
            label = self.expect("string", what="label string").value
        if self.peek().kind == "ident" and self.peek().value == "calls":
            self.take()
            callee = self.expect("ident", what="callee identifier").value
        self.expect("punct", ";")
        proc.nodes.append(ProcessNode(ident.value, _KIND_BY_KEYWORD[kind_tok.value], label, callee))
        proc.node_pos[ident.value] = (kind_tok.line, kind_tok.column)

    def parse_flow(self, proc: _RawProcess) -> None:
        src = self.expect("ident", what="flow source identifier")
        self.expect("punct", "->", '"->"')
        tgt = self.expect("ident", what="flow target identifier")
        tags: frozenset[str] = frozenset()
        if self.peek().kind == "ident" and self.peek().value == "when":
            self.take()
            raw = self.expect("string", what="variant list string").value
            tags = frozenset(part.strip() for part in raw.split(",") if part.strip())
        self.expect("punct", ";")
        proc.flows.append((src.value, tgt.value, tags, src.line, src.column))


def _infer_levels(processes: list[_RawProcess]) -> None:
    """Fill missing levels: uncalled definitions get 2, callees caller+1."""
    called = {n.callee for p in processes for n in p.nodes if n.callee}
    for p in processes:
        if p.level is None and p.id not in called:
            p.level = 2
    by_id = {p.id: p for p in processes}
    changed = True
    while changed:
        changed = False
        for p in processes:
            if p.level is None:
                continue
            for n in p.nodes:
                if n.callee and n.callee in by_id and by_id[n.callee].level is None:
                    by_id[n.callee].level = p.level + 1
                    changed = True
    for p in processes:
        if p.level is None:
            p.level = 2


def parse_dsl(source: str) -> ProcessRepository:
    """Parse DSL text; the result always passes validate_repository.

    Raises DslSyntaxError on malformed text, ResolutionError on a flow
    endpoint that names no declared node or when no level-2 definition
    exists to act as root, and DslValidationError on structural violations
    (each annotated with the source position of its subject).
    """
    processes = _Parser(_tokenize(source)).parse_project()
    _infer_levels(processes)

    positions: dict[tuple[str | None, str | None], tuple[int, int]] = {}
    definitions = []
    for p in processes:
        declared = {n.id for n in p.nodes}
        flows = []
        positions[(p.id, None)] = (p.line, p.column)
        for node_id, pos in p.node_pos.items():
            positions[(p.id, node_id)] = pos
        for src, tgt, tags, line, col in p.flows:
            for endpoint in (src, tgt):
                if endpoint not in declared:
                    raise ResolutionError(endpoint, line, col)
            flows.append(SequenceFlow(src, tgt, tags))
            positions[(p.id, f"{src}->{tgt}")] = (line, col)
        definitions.append(ProcessDefinition(p.id, p.name, p.level or 2, tuple(p.nodes), tuple(flows)))

    root = next((p.id for p in processes if (p.level or 2) == 2), None)
    if root is None:
        raise ResolutionError("a level-2 definition to act as root")
    repo = ProcessRepository(tuple(definitions), root)
    violations = validate_repository(repo)
    if violations:
        raise DslValidationError(violations, positions)
    return repo


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


_NODE_RANK = {NodeKind.START_EVENT: 0, NodeKind.END_EVENT: 2}


def print_dsl(repo: ProcessRepository) -> str:
    """Canonical text form; parse_dsl(print_dsl(r)) == r for valid r.

    The root definition prints first (that is how parsing recovers it),
    remaining definitions sort by id; within a definition, start events
    print first and end events last, everything else by id; flows follow
    the nodes sorted by endpoints. Input ordering never shows through:
    construction normalizes node/flow order.
    """
    ordered = [repo.get(repo.root)] + [d for d in repo.definitions if d.id != repo.root]
    chunks = []
    for d in ordered:
        head = f"process {d.id}"
        if d.name != d.id:
            head += f": {_quote(d.name)}"
        head += f" level {d.level} {{"
        lines = [head]
        for node in sorted(d.nodes, key=lambda n: (_NODE_RANK.get(n.kind, 1), n.id)):
            decl = f"  {_KEYWORD_BY_KIND[node.kind]} {node.id}"
            if node.label is not None:
                decl += f": {_quote(node.label)}"
            if node.callee is not None:
                decl += f" calls {node.callee}"
            lines.append(decl + ";")
        for flow in d.flows:
            stmt = f"  {flow.source} -> {flow.target}"
            if flow.variant_tags:
                stmt += f" when {_quote(','.join(sorted(flow.variant_tags)))}"
            lines.append(stmt + ";")
        lines.append("}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"


_DOT_SHAPES = {
    NodeKind.TASK: "box",
    NodeKind.SUB_PROCESS_CALL: "box",
    NodeKind.XOR_SPLIT: "diamond",
    NodeKind.XOR_JOIN: "diamond",
    NodeKind.AND_SPLIT: "diamond",
    NodeKind.AND_JOIN: "diamond",
    NodeKind.START_EVENT: "circle",
    NodeKind.END_EVENT: "doublecircle",
}

_DOT_GATEWAY_MARK = {
    NodeKind.XOR_SPLIT: "X",
    NodeKind.XOR_JOIN: "X",
    NodeKind.AND_SPLIT: "+",
    NodeKind.AND_JOIN: "+",
}


def export_dot(def_: ProcessDefinition) -> str:
    """Graphviz rendering: tasks as boxes, gateways as diamonds. Deterministic."""
    lines = [f'digraph "{def_.id}" {{', "  rankdir=LR;"]
    for node in def_.nodes:  # already id-sorted
        shape = _DOT_SHAPES[node.kind]
        label = node.label if node.label is not None else _DOT_GATEWAY_MARK.get(node.kind, "")
        if node.kind is NodeKind.SUB_PROCESS_CALL:
            lines.append(f'  "{node.id}" [shape={shape} peripheries=2 label={_quote(label)}];')
        else:
            lines.append(f'  "{node.id}" [shape={shape} label={_quote(label)}];')
    for flow in def_.flows:
        attrs = f" [label={_quote(','.join(sorted(flow.variant_tags)))}]" if flow.variant_tags else ""
        lines.append(f'  "{flow.source}" -> "{flow.target}"{attrs};')
    lines.append("}")
    return "\n".join(lines) + "\n"
