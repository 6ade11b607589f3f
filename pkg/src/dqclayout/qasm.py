"""
OpenQASM 2 subset reader and writer.

Accepted: optional ``OPENQASM 2.0;`` header, ``include`` lines (ignored),
``qreg``/``creg`` declarations (flattened in declaration order), the gates
h x y z s sdg t tdg sx rx ry rz cx cz swap ccx, ``measure``, ``reset``,
``barrier`` and ``if (creg==k)`` on single-bit registers (``creg[j]==k`` is
also read). Angle expressions support + - * / ^, unary minus, parentheses,
``pi`` and sin/cos/tan/exp/ln/sqrt. Whole-register arguments broadcast.
Custom ``gate``/``opaque`` definitions are rejected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

from .circuit import Circuit, CircuitError, GateKind, Instruction

MAX_EXPR_DEPTH = 64
MAX_REGISTER = 1 << 20


class ErrorKind(str, Enum):
    LEX = "lex"
    SYNTAX = "syntax"
    SEMANTIC = "semantic"


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(ValueError):
    def __init__(self, span: SourceSpan, message: str, kind: ErrorKind | str = ErrorKind.SYNTAX):
        self.span = span
        self.message = message
        self.kind = ErrorKind(kind)
        super().__init__(f"{span}: {self.kind.value} error: {message}")


class EmitError(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # id, int, real, string, sym, eof
    text: str
    span: SourceSpan


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<real>(?:\d+\.\d*|\.\d+)(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<sym>->|==|[;,\[\](){}+\-*/^])
""", re.VERBOSE | re.DOTALL)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        span = SourceSpan(line, pos - line_start + 1)
        if m is None:
            raise ParseError(span, f"unexpected character {text[pos]!r}", ErrorKind.LEX)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind == "bcomment":
            nls = chunk.count("\n")
            if nls:
                line += nls
                line_start = pos + chunk.rfind("\n") + 1
        elif kind not in ("ws", "lcomment"):
            tokens.append(Token(kind, chunk, span))
        pos = m.end()
    if text.startswith("/*", pos):
        raise ParseError(SourceSpan(line, pos - line_start + 1), "unterminated comment", ErrorKind.LEX)
    tokens.append(Token("eof", "", SourceSpan(line, pos - line_start + 1)))
    return tokens


_GATES = {
    "h": GateKind.H, "x": GateKind.X, "y": GateKind.Y, "z": GateKind.Z,
    "s": GateKind.S, "sdg": GateKind.SDG, "t": GateKind.T, "tdg": GateKind.TDG,
    "sx": GateKind.SX, "rx": GateKind.RX, "ry": GateKind.RY, "rz": GateKind.RZ,
    "cx": GateKind.CX, "CX": GateKind.CX, "cz": GateKind.CZ, "swap": GateKind.SWAP,
    "ccx": GateKind.CCX,
}
_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
          "ln": math.log, "sqrt": math.sqrt}


@dataclass
class _Reg:
    name: str
    size: int
    offset: int
    span: SourceSpan


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.qregs: dict[str, _Reg] = {}
        self.cregs: dict[str, _Reg] = {}
        self.nq = self.nc = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None, kind=ErrorKind.SYNTAX):
        raise ParseError((tok or self.tok).span, msg, kind)

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind not in ("sym", "id"):
            shown = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {shown!r}")
        return self.advance()

    def integer(self, what: str, limit: int = MAX_REGISTER) -> int:
        t = self.expect_kind("int", what)
        if len(t.text) > 9 or int(t.text) > limit:
            self.error(f"{what} {t.text[:12]} is too large", t, ErrorKind.SEMANTIC)
        return int(t.text)

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            self.error(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    # grammar
    def parse(self) -> Circuit:
        instrs: list[Instruction] = []
        if self.tok.kind == "id" and self.tok.text == "OPENQASM":
            self.advance()
            ver = self.tok
            if ver.kind not in ("real", "int"):
                self.error("expected version number")
            self.advance()
            if not ver.text.startswith("2"):
                self.error(f"unsupported OPENQASM version {ver.text}", ver, ErrorKind.SEMANTIC)
            self.expect(";")
        while self.tok.kind != "eof":
            instrs.extend(self.statement())
        labels = [""] * self.nq
        for reg in self.qregs.values():
            for j in range(reg.size):
                labels[reg.offset + j] = f"{reg.name}[{j}]"
        return Circuit(self.nq, self.nc, instrs, labels)

    def statement(self) -> list[Instruction]:
        t = self.tok
        if t.kind != "id":
            self.error(f"expected a statement, found {t.text or 'end of input'!r}")
        word = t.text
        if word == "OPENQASM":
            self.error("OPENQASM header must come first", t, ErrorKind.SEMANTIC)
        if word == "include":
            self.advance()
            self.expect_kind("string", "a file name")
            self.expect(";")
            return []
        if word in ("qreg", "creg"):
            self.declaration()
            return []
        if word in ("gate", "opaque"):
            self.error(f"custom {word} definitions are not supported", t, ErrorKind.SEMANTIC)
        if word == "if":
            return self.conditional()
        out = self.qop()
        self.expect(";")
        return out

    def declaration(self):
        kw = self.advance()
        name_tok = self.expect_kind("id", "a register name")
        self.expect("[")
        size_tok = self.tok
        size = self.integer("register size")
        self.expect("]")
        self.expect(";")
        name = name_tok.text
        if name in self.qregs or name in self.cregs:
            self.error(f"duplicate register name {name!r}", name_tok, ErrorKind.SEMANTIC)
        if name in _GATES or name in _FUNCS or name == "pi":
            self.error(f"register name {name!r} is reserved", name_tok, ErrorKind.SEMANTIC)
        if size == 0:
            self.error(f"register {name!r} has size 0", size_tok, ErrorKind.SEMANTIC)
        if (self.nq if kw.text == "qreg" else self.nc) + size > MAX_REGISTER:
            self.error("too many bits declared", size_tok, ErrorKind.SEMANTIC)
        if kw.text == "qreg":
            self.qregs[name] = _Reg(name, size, self.nq, name_tok.span)
            self.nq += size
        else:
            self.cregs[name] = _Reg(name, size, self.nc, name_tok.span)
            self.nc += size

    def argument(self, regs: dict[str, _Reg], what: str) -> tuple[list[int], Token]:
        name_tok = self.expect_kind("id", f"a {what} argument")
        reg = regs.get(name_tok.text)
        if reg is None:
            other = self.cregs if regs is self.qregs else self.qregs
            hint = f" ({name_tok.text!r} is not a {what} register)" if name_tok.text in other else ""
            self.error(f"undeclared {what} register {name_tok.text!r}{hint}", name_tok,
                       ErrorKind.SEMANTIC)
        if self.tok.text == "[":
            self.advance()
            idx_tok = self.tok
            idx = self.integer("index")
            self.expect("]")
            if idx >= reg.size:
                self.error(f"index {idx} out of range for {reg.name}[{reg.size}]", idx_tok,
                           ErrorKind.SEMANTIC)
            return [reg.offset + idx], name_tok
        return [reg.offset + j for j in range(reg.size)], name_tok

    def arglist(self, regs, what) -> list[tuple[list[int], Token]]:
        args = [self.argument(regs, what)]
        while self.tok.text == ",":
            self.advance()
            args.append(self.argument(regs, what))
        return args

    def _broadcast(self, args, head: Token) -> list[tuple[int, ...]]:
        sizes = {len(a) for a, _ in args if len(a) > 1}
        if len(sizes) > 1:
            self.error("register arguments have different sizes", head, ErrorKind.SEMANTIC)
        n = sizes.pop() if sizes else 1
        return [tuple(a[j] if len(a) > 1 else a[0] for a, _ in args) for j in range(n)]

    def qop(self, condition=None) -> list[Instruction]:
        head = self.advance()
        word = head.text
        if head.kind != "id":
            self.error(f"expected a gate name, found {word!r}", head)
        if word == "measure":
            qs, _ = self.argument(self.qregs, "quantum")
            self.expect("->")
            cs, ctok = self.argument(self.cregs, "classical")
            if len(qs) != len(cs):
                self.error("measure register sizes differ", ctok, ErrorKind.SEMANTIC)
            if condition is not None:
                self.error("measure cannot be conditioned", head, ErrorKind.SEMANTIC)
            return [Instruction(GateKind.MEASURE, (q,), (c,)) for q, c in zip(qs, cs)]
        if word in ("reset", "barrier"):
            if condition is not None:
                self.error(f"{word} cannot be conditioned", head, ErrorKind.SEMANTIC)
            args = self.arglist(self.qregs, "quantum")
            if word == "reset":
                return [Instruction(GateKind.RESET, (q,)) for a, _ in args for q in a]
            qubits = [q for a, _ in args for q in a]
            if len(set(qubits)) != len(qubits):
                self.error("repeated qubit in barrier", head, ErrorKind.SEMANTIC)
            return [Instruction(GateKind.BARRIER, tuple(qubits))]
        kind = _GATES.get(word)
        if kind is None:
            self.error(f"unknown gate {word!r}", head, ErrorKind.SEMANTIC)
        params: list[float] = []
        if self.tok.text == "(":
            self.advance()
            if self.tok.text != ")":
                params.append(self.expr(0))
                while self.tok.text == ",":
                    self.advance()
                    params.append(self.expr(0))
            self.expect(")")
        want = 1 if kind.is_rotation else 0
        if len(params) != want:
            self.error(f"{word} takes {want} parameter(s), got {len(params)}", head,
                       ErrorKind.SEMANTIC)
        args = self.arglist(self.qregs, "quantum")
        if len(args) != kind.num_qubits:
            self.error(f"{word} takes {kind.num_qubits} qubit argument(s), got {len(args)}", head,
                       ErrorKind.SEMANTIC)
        out = []
        for qubits in self._broadcast(args, head):
            if len(set(qubits)) != len(qubits):
                self.error(f"repeated qubit in {word}", head, ErrorKind.SEMANTIC)
            out.append(Instruction(kind, qubits, angle=params[0] if params else None,
                                   condition=condition))
        return out

    def conditional(self) -> list[Instruction]:
        self.advance()
        self.expect("(")
        name_tok = self.expect_kind("id", "a classical register")
        reg = self.cregs.get(name_tok.text)
        if reg is None:
            self.error(f"undeclared classical register {name_tok.text!r}", name_tok,
                       ErrorKind.SEMANTIC)
        if self.tok.text == "[":
            self.advance()
            idx_tok = self.tok
            idx = self.integer("index")
            self.expect("]")
            if idx >= reg.size:
                self.error(f"index {idx} out of range for {reg.name}[{reg.size}]",
                           idx_tok, ErrorKind.SEMANTIC)
            bit = reg.offset + idx
        else:
            if reg.size != 1:
                self.error(f"condition on {reg.name} needs a single-bit register", name_tok,
                           ErrorKind.SEMANTIC)
            bit = reg.offset
        self.expect("==")
        val_tok = self.tok
        value = self.integer("condition value")
        if value not in (0, 1):
            self.error(f"condition value must be 0 or 1, got {value}", val_tok,
                       ErrorKind.SEMANTIC)
        self.expect(")")
        out = self.qop(condition=(bit, value))
        self.expect(";")
        return out

    # expressions, precedence climbing
    _BINARY = {"+": (1, "left"), "-": (1, "left"), "*": (2, "left"), "/": (2, "left"),
               "^": (4, "right")}

    def expr(self, depth: int, min_prec: int = 1) -> float:
        if depth > MAX_EXPR_DEPTH:
            self.error("expression nested too deeply")
        lhs = self.unary(depth)
        while self.tok.kind == "sym" and self.tok.text in self._BINARY:
            op_tok = self.tok
            prec, assoc = self._BINARY[op_tok.text]
            if prec < min_prec:
                break
            self.advance()
            rhs = self.expr(depth + 1, prec + 1 if assoc == "left" else prec)
            lhs = self._binop(op_tok, lhs, rhs)
        return lhs

    def _binop(self, op_tok: Token, a: float, b: float) -> float:
        op = op_tok.text
        try:
            if op == "+":
                r = a + b
            elif op == "-":
                r = a - b
            elif op == "*":
                r = a * b
            elif op == "/":
                r = a / b
            else:
                r = math.pow(a, b)
        except (ZeroDivisionError, OverflowError, ValueError) as e:
            self.error(f"cannot evaluate {op!r}: {e}", op_tok, ErrorKind.SEMANTIC)
        if not math.isfinite(r):
            self.error(f"non-finite result from {op!r}", op_tok, ErrorKind.SEMANTIC)
        return r

    def unary(self, depth: int) -> float:
        if self.tok.text == "-" and self.tok.kind == "sym":
            self.advance()
            if depth > MAX_EXPR_DEPTH:
                self.error("expression nested too deeply")
            return -self.unary(depth + 1)
        if self.tok.text == "+" and self.tok.kind == "sym":
            self.advance()
            if depth > MAX_EXPR_DEPTH:
                self.error("expression nested too deeply")
            return self.unary(depth + 1)
        return self.primary(depth)

    def primary(self, depth: int) -> float:
        t = self.tok
        if t.kind in ("int", "real"):
            self.advance()
            try:
                v = float(t.text)
            except (ValueError, OverflowError):
                v = math.inf
            if not math.isfinite(v):
                self.error(f"number {t.text} is out of range", t, ErrorKind.SEMANTIC)
            return v
        if t.kind == "id" and t.text == "pi":
            self.advance()
            return math.pi
        if t.kind == "id" and t.text in _FUNCS:
            self.advance()
            self.expect("(")
            arg = self.expr(depth + 1)
            self.expect(")")
            try:
                v = _FUNCS[t.text](arg)
            except (ValueError, OverflowError) as e:
                self.error(f"cannot evaluate {t.text}: {e}", t, ErrorKind.SEMANTIC)
            if not math.isfinite(v):
                self.error(f"non-finite result from {t.text}", t, ErrorKind.SEMANTIC)
            return v
        if t.text == "(" and t.kind == "sym":
            self.advance()
            v = self.expr(depth + 1)
            self.expect(")")
            return v
        if t.kind == "id":
            self.error(f"unknown identifier {t.text!r} in expression", t, ErrorKind.SEMANTIC)
        self.error(f"expected an expression, found {t.text or 'end of input'!r}")


def parse_qasm(text: str) -> Circuit:
    """Parse QASM text into a flat Circuit; raises ParseError with a source span."""
    parser = _Parser(text)
    try:
        return parser.parse()
    except CircuitError as e:  # instruction-level validation that slipped past the grammar
        raise ParseError(parser.tok.span, str(e), ErrorKind.SEMANTIC) from None


def _fmt_angle(theta: float) -> str:
    return format(theta, ".17g")


def emit_qasm(c: Circuit) -> str:
    """Serialise ``c``; parse_qasm(emit_qasm(c)) reproduces the instruction list exactly."""
    if c.placeholders():
        raise EmitError("circuit still contains remote placeholders")
    conditioned = any(ins.condition is not None for ins in c.instructions)
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    if c.num_qubits:
        lines.append(f"qreg q[{c.num_qubits}];")
    if conditioned:
        lines.extend(f"creg c{j}[1];" for j in range(c.num_clbits))

        def bit(j):
            return f"c{j}[0]"
    else:
        if c.num_clbits:
            lines.append(f"creg c[{c.num_clbits}];")

        def bit(j):
            return f"c[{j}]"
    for ins in c.instructions:
        qs = ",".join(f"q[{q}]" for q in ins.qubits)
        if ins.kind is GateKind.MEASURE:
            s = f"measure {qs} -> {bit(ins.clbits[0])};"
        elif ins.angle is not None:
            s = f"{ins.name}({_fmt_angle(ins.angle)}) {qs};"
        else:
            s = f"{ins.name} {qs};"
        if ins.condition is not None:
            s = f"if(c{ins.condition[0]}=={ins.condition[1]}) {s}"
        lines.append(s)
    return "\n".join(lines) + "\n"
