"""Input language for the batch tool.

    program := stmt* command
    stmt    := "ring" IDENT ("S"|"E") "p=" INT "v=" INT ";"
             | "matrix" IDENT "[" row ("," row)* "]" "rowdegs" "[" INT* "]" ";"
             | "module" IDENT "=" "coker" IDENT ";"
    row     := "[" poly ("," poly)* "]"
    command := stage ("|" stage)* ";"?
    stage   := NAME (flag | value)*

Polynomials use the canonical rendering of the rings module: terms like
`3*x0^2*x1` or `e0*e2` joined by + and -, coefficients as decimal residues,
`0` for the zero entry.  Homogeneity of every matrix is checked at load:
column degrees are inferred from rowdegs and must be consistent.

Errors carry line and column and are split into lexical, syntax and
homogeneity classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .complexes import GradedFree, GradedMap
from .rings import Poly, RingSig
from .smodules import FPModuleS


class DSLError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class LexError(DSLError):
    pass


class SyntaxDSLError(DSLError):
    pass


class HomogeneityError(DSLError):
    pass


@dataclass
class Token:
    kind: str   # IDENT, INT, SYM, FLAG
    text: str
    line: int
    col: int


_SYMBOLS = set("[],;=|^*+-:")


def tokenize(source: str) -> list[Token]:
    out = []
    line, col = 1, 1
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith("--", i) and i + 2 < n and source[i + 2].isalpha():
            j = i + 2
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            out.append(Token("FLAG", source[i + 2:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            out.append(Token("INT", source[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            out.append(Token("IDENT", source[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in _SYMBOLS:
            out.append(Token("SYM", ch, line, col))
            i += 1
            col += 1
            continue
        raise LexError(f"unexpected character {ch!r}", line, col)
    return out


@dataclass
class Stage:
    name: str
    flags: dict[str, str]
    args: list[str]
    line: int
    col: int


@dataclass
class InputProgram:
    ring: RingSig | None
    ring_name: str | None
    matrices: dict[str, GradedMap]
    modules: dict[str, FPModuleS]
    pipeline: list[Stage]


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    def peek(self) -> Token | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self) -> Token:
        t = self.peek()
        if t is None:
            last = self.toks[-1] if self.toks else Token("", "", 1, 1)
            raise SyntaxDSLError("unexpected end of input", last.line, last.col)
        self.pos += 1
        return t

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.next()
        if t.kind != kind or (text is not None and t.text != text):
            want = text if text is not None else kind
            raise SyntaxDSLError(f"expected {want!r}, found {t.text!r}",
                                 t.line, t.col)
        return t

    def parse_program(self) -> InputProgram:
        prog = InputProgram(None, None, {}, {}, [])
        while True:
            t = self.peek()
            if t is None:
                raise SyntaxDSLError("no command", 1, 1)
            if t.kind == "IDENT" and t.text == "ring":
                self._parse_ring(prog)
            elif t.kind == "IDENT" and t.text == "matrix":
                self._parse_matrix(prog)
            elif t.kind == "IDENT" and t.text == "module":
                self._parse_module(prog)
            else:
                break
        t = self.peek()
        if t is None:
            raise SyntaxDSLError("no command", 1, 1)
        prog.pipeline = self._parse_pipeline()
        if self.peek() is not None:
            t = self.peek()
            raise SyntaxDSLError(f"trailing input {t.text!r}", t.line, t.col)
        return prog

    def _parse_ring(self, prog: InputProgram):
        self.expect("IDENT", "ring")
        name = self.expect("IDENT").text
        kind_tok = self.expect("IDENT")
        if kind_tok.text not in ("S", "E"):
            raise SyntaxDSLError("ring kind must be S or E",
                                 kind_tok.line, kind_tok.col)
        ptok = self.expect("IDENT")
        if ptok.text != "p":
            raise SyntaxDSLError("expected p=", ptok.line, ptok.col)
        self.expect("SYM", "=")
        p = int(self.expect("INT").text)
        vtok = self.expect("IDENT")
        if vtok.text != "v":
            raise SyntaxDSLError("expected v=", vtok.line, vtok.col)
        self.expect("SYM", "=")
        v = int(self.expect("INT").text)
        self.expect("SYM", ";")
        try:
            prog.ring = RingSig(kind_tok.text, v, p)
        except ValueError as exc:
            raise SyntaxDSLError(str(exc), kind_tok.line, kind_tok.col)
        prog.ring_name = name

    def _parse_int(self) -> int:
        t = self.peek()
        sign = 1
        if t is not None and t.kind == "SYM" and t.text == "-":
            self.next()
            sign = -1
        return sign * int(self.expect("INT").text)

    def _parse_matrix(self, prog: InputProgram):
        kw = self.expect("IDENT", "matrix")
        if prog.ring is None:
            raise SyntaxDSLError("matrix before any ring declaration",
                                 kw.line, kw.col)
        name = self.expect("IDENT").text
        self.expect("SYM", "[")
        rows = [self._parse_row(prog.ring)]
        while self.peek() and self.peek().text == ",":
            self.next()
            rows.append(self._parse_row(prog.ring))
        self.expect("SYM", "]")
        rd = self.expect("IDENT")
        if rd.text != "rowdegs":
            raise SyntaxDSLError("expected rowdegs", rd.line, rd.col)
        self.expect("SYM", "[")
        rowdegs = []
        while self.peek() and not (self.peek().kind == "SYM"
                                   and self.peek().text == "]"):
            rowdegs.append(self._parse_int())
        self.expect("SYM", "]")
        self.expect("SYM", ";")
        if len(rowdegs) != len(rows):
            raise HomogeneityError(
                f"{len(rows)} rows but {len(rowdegs)} rowdegs", kw.line, kw.col)
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise SyntaxDSLError("ragged matrix", kw.line, kw.col)
        # infer column degrees
        coldegs = []
        for c in range(ncols):
            cands = set()
            for r in range(len(rows)):
                e = rows[r][c]
                if not e.is_zero():
                    try:
                        d = e.degree()
                    except ValueError:
                        raise HomogeneityError(
                            f"inhomogeneous entry at row {r}, column {c}",
                            kw.line, kw.col)
                    cands.add(rowdegs[r] + d)
            if not cands:
                raise HomogeneityError(
                    f"column {c} is zero; its degree cannot be inferred",
                    kw.line, kw.col)
            if len(cands) > 1:
                raise HomogeneityError(
                    f"column {c} entries force degrees {sorted(cands)}",
                    kw.line, kw.col)
            coldegs.append(cands.pop())
        src = GradedFree(prog.ring, tuple(coldegs))
        tgt = GradedFree(prog.ring, tuple(rowdegs))
        gm = GradedMap(src, tgt, rows)
        gm.check_homogeneous()
        prog.matrices[name] = gm

    def _parse_row(self, ring: RingSig) -> list[Poly]:
        self.expect("SYM", "[")
        out = [self._parse_poly(ring)]
        while self.peek() and self.peek().text == ",":
            self.next()
            out.append(self._parse_poly(ring))
        self.expect("SYM", "]")
        return out

    def _parse_poly(self, ring: RingSig) -> Poly:
        acc = ring.zero()
        sign = 1
        t = self.peek()
        if t and t.kind == "SYM" and t.text in "+-":
            self.next()
            sign = -1 if t.text == "-" else 1
        acc = acc + self._parse_term(ring).scale(sign)
        while True:
            t = self.peek()
            if t and t.kind == "SYM" and t.text in "+-":
                self.next()
                sgn = -1 if t.text == "-" else 1
                acc = acc + self._parse_term(ring).scale(sgn)
            else:
                return acc

    def _parse_term(self, ring: RingSig) -> Poly:
        t = self.peek()
        coeff = 1
        have_coeff = False
        if t is not None and t.kind == "INT":
            self.next()
            coeff = int(t.text)
            have_coeff = True
            nxt = self.peek()
            if not (nxt and nxt.kind == "SYM" and nxt.text == "*"):
                return ring.one().scale(coeff)
            self.next()
        acc = ring.one().scale(coeff)
        first = True
        while True:
            acc = acc * self._parse_var_power(ring, required=first)
            first = False
            nxt = self.peek()
            if nxt and nxt.kind == "SYM" and nxt.text == "*":
                self.next()
                continue
            return acc

    def _parse_var_power(self, ring: RingSig, required: bool) -> Poly:
        t = self.peek()
        if t is None or t.kind != "IDENT":
            if required:
                line, col = (t.line, t.col) if t else (0, 0)
                raise SyntaxDSLError("expected a variable", line, col)
        t = self.expect("IDENT")
        name = t.text
        if len(name) < 2 or name[0] != ring.varname or not name[1:].isdigit():
            raise SyntaxDSLError(
                f"unknown variable {name!r} for ring kind {ring.kind}",
                t.line, t.col)
        idx = int(name[1:])
        if idx >= ring.v:
            raise SyntaxDSLError(f"variable index {idx} out of range",
                                 t.line, t.col)
        var = ring.variable(idx)
        nxt = self.peek()
        if nxt and nxt.kind == "SYM" and nxt.text == "^":
            self.next()
            e = int(self.expect("INT").text)
            out = ring.one()
            for _ in range(e):
                out = out * var
            return out
        return var

    def _parse_module(self, prog: InputProgram):
        kw = self.expect("IDENT", "module")
        name = self.expect("IDENT").text
        self.expect("SYM", "=")
        ck = self.expect("IDENT")
        if ck.text != "coker":
            raise SyntaxDSLError("only 'coker' modules are supported",
                                 ck.line, ck.col)
        mat = self.expect("IDENT")
        self.expect("SYM", ";")
        gm = prog.matrices.get(mat.text)
        if gm is None:
            raise SyntaxDSLError(f"undeclared matrix {mat.text!r}",
                                 mat.line, mat.col)
        if gm.ring.kind != "S":
            raise SyntaxDSLError("coker modules require an S-matrix",
                                 mat.line, mat.col)
        # presentation: relations (columns) -> generators (rows)
        prog.modules[name] = FPModuleS(gm)

    def _parse_pipeline(self) -> list[Stage]:
        stages = [self._parse_stage()]
        while True:
            t = self.peek()
            if t and t.kind == "SYM" and t.text == "|":
                self.next()
                stages.append(self._parse_stage())
            elif t and t.kind == "SYM" and t.text == ";":
                self.next()
                break
            elif t is None:
                break
            else:
                raise SyntaxDSLError(f"unexpected token {t.text!r} in command",
                                     t.line, t.col)
        return stages

    def _parse_stage(self) -> Stage:
        t = self.expect("IDENT")
        flags: dict[str, str] = {}
        args: list[str] = []
        while True:
            nxt = self.peek()
            if nxt is None or (nxt.kind == "SYM" and nxt.text in "|;"):
                return Stage(t.text, flags, args, t.line, t.col)
            if nxt.kind == "FLAG":
                self.next()
                val = self._parse_flag_value()
                flags[nxt.text] = val
            elif nxt.kind in ("IDENT", "INT"):
                self.next()
                args.append(nxt.text)
            elif nxt.kind == "SYM" and nxt.text == "-":
                self.next()
                args.append("-" + self.expect("INT").text)
            else:
                raise SyntaxDSLError(f"unexpected token {nxt.text!r}",
                                     nxt.line, nxt.col)

    def _parse_flag_value(self) -> str:
        parts = []
        t = self.peek()
        if t is not None and t.kind == "SYM" and t.text == "-":
            self.next()
            parts.append("-")
            t = self.peek()
        if t is None or t.kind not in ("INT", "IDENT"):
            line, col = (t.line, t.col) if t else (0, 0)
            raise SyntaxDSLError("flag needs a value", line, col)
        self.next()
        parts.append(t.text)
        # allow range syntax a:b
        nxt = self.peek()
        if nxt and nxt.kind == "SYM" and nxt.text == ":":
            self.next()
            parts.append(":")
            nn = self.peek()
            if nn and nn.kind == "SYM" and nn.text == "-":
                self.next()
                parts.append("-")
            parts.append(self.expect("INT").text)
        return "".join(parts)


def parse(source: str) -> InputProgram:
    return Parser(tokenize(source)).parse_program()


def render_program(prog: InputProgram) -> str:
    """Canonical text of the declarations and pipeline (parse o render is
    the identity on canonical-form programs)."""
    lines = []
    if prog.ring is not None:
        lines.append(f"ring {prog.ring_name} {prog.ring.kind} "
                     f"p={prog.ring.p} v={prog.ring.v};")
    for name, gm in prog.matrices.items():
        rows = ", ".join(
            "[" + ", ".join(e.render() for e in row) + "]"
            for row in gm.entries)
        degs = " ".join(str(d) for d in gm.target.gen_degrees)
        lines.append(f"matrix {name} [{rows}] rowdegs [{degs}];")
    for name in prog.modules:
        # module declarations reference their matrix by construction order
        pass
    for name, mod in prog.modules.items():
        for mname, gm in prog.matrices.items():
            if gm is mod.presentation:
                lines.append(f"module {name} = coker {mname};")
    stage_txts = []
    for st in prog.pipeline:
        parts = [st.name] + st.args + \
            [f"--{k} {v}" for k, v in st.flags.items()]
        stage_txts.append(" ".join(parts))
    lines.append(" | ".join(stage_txts) + ";")
    return "\n".join(lines) + "\n"
