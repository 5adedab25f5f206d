"""Reader and writer for the ``.kb`` knowledge-base text format.

The format is line-oriented only by convention: newlines are ordinary
whitespace to the scanner, so a rule written on one line and the same
rule written one clause per line parse to the same structure.  The
canonical writer always produces the one-clause-per-line layout, and
``parse_kb(serialize_kb(kb))`` returns a structurally identical model.

On malformed input the parser recovers at the next top-level keyword and
keeps going, so one pass reports every error with its source span.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    BinaryOp,
    CertaintyMode,
    Choice,
    ChoiceAssign,
    Comparison,
    Condition,
    Conclusion,
    Expression,
    KnowledgeBase,
    ModeKind,
    Negate,
    NumberLit,
    Qualifier,
    QualifierAssign,
    QualifierTest,
    Rule,
    TextLit,
    ValueKind,
    VarRef,
    Variable,
    VariableAssign,
)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    expected: str = ""

    def __str__(self) -> str:
        hint = f" (expected {self.expected})" if self.expected else ""
        return f"{self.span.line}:{self.span.column}: {self.message}{hint}"


class KbSyntaxError(ValueError):
    """Raised by the strict entry points; carries every error found."""

    def __init__(self, errors: list[ParseError]):
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))


KEYWORDS = frozenset({
    "TITLE", "MODE", "QUALIFIER", "MULTI", "VARIABLE", "NUMERIC", "TEXT",
    "CHOICE", "GOAL", "RULE", "IF", "AND", "THEN", "ELSE", "NOTE",
    "REFERENCE", "NAME", "IS", "IS-NOT", "Confidence", "YES", "NO",
    "INCR", "DECR", "CUSTOM", "FUZZY",
})

TOP_LEVEL = frozenset({"TITLE", "MODE", "QUALIFIER", "VARIABLE", "CHOICE", "GOAL", "RULE"})

_PUNCT2 = ("<>", "<=", ">=")
_PUNCT1 = "=<>+-*/(),"

_IDENT_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | frozenset("0123456789")
_DIGITS = frozenset("0123456789")

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class _Token:
    kind: str  # KEYWORD IDENT NUMBER STRING VARREF PUNCT EOF
    text: str
    value: object
    line: int
    column: int

    def span(self, length: int | None = None) -> SourceSpan:
        return SourceSpan(self.line, self.column, length or max(1, len(self.text)))


class _Lexer:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1
        self.errors: list[ParseError] = []

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.src) and self.src[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def tokens(self) -> list[_Token]:
        out: list[_Token] = []
        src = self.src
        while True:
            while self.pos < len(src) and (src[self.pos] in " \t\r\n" or src[self.pos] == "#"):
                if src[self.pos] == "#":
                    while self.pos < len(src) and src[self.pos] != "\n":
                        self._advance()
                else:
                    self._advance()
            if self.pos >= len(src):
                break
            ch = src[self.pos]
            line, col = self.line, self.col
            if ch in _IDENT_START:
                start = self.pos
                while self.pos < len(src) and src[self.pos] in _IDENT_CONT:
                    self._advance()
                word = src[start:self.pos]
                # IS-NOT is one keyword; a bare minus never follows IS.
                if word == "IS" and src[self.pos:self.pos + 4] == "-NOT":
                    after = src[self.pos + 4:self.pos + 5]
                    if not after or after not in _IDENT_CONT:
                        self._advance(4)
                        word = "IS-NOT"
                kind = "KEYWORD" if word in KEYWORDS else "IDENT"
                out.append(_Token(kind, word, word, line, col))
            elif ch in _DIGITS:
                start = self.pos
                while self.pos < len(src) and src[self.pos] in _DIGITS:
                    self._advance()
                if self.pos < len(src) and src[self.pos] == "." and \
                        src[self.pos + 1:self.pos + 2] in _DIGITS:
                    self._advance()
                    while self.pos < len(src) and src[self.pos] in _DIGITS:
                        self._advance()
                if src[self.pos:self.pos + 1] in ("e", "E"):
                    probe = self.pos + 1
                    if src[probe:probe + 1] in ("+", "-"):
                        probe += 1
                    if src[probe:probe + 1] in _DIGITS:
                        while self.pos < probe:
                            self._advance()
                        while self.pos < len(src) and src[self.pos] in _DIGITS:
                            self._advance()
                text = src[start:self.pos]
                out.append(_Token("NUMBER", text, float(text), line, col))
            elif ch == '"':
                out.append(self._string(line, col))
            elif ch == "[":
                start = self.pos
                self._advance()
                name_start = self.pos
                while self.pos < len(src) and src[self.pos] in _IDENT_CONT:
                    self._advance()
                name = src[name_start:self.pos]
                if not name or name[0] not in _IDENT_START or \
                        src[self.pos:self.pos + 1] != "]":
                    self.errors.append(ParseError(
                        SourceSpan(line, col, max(1, self.pos - start)),
                        "malformed variable reference", expected="[name]",
                    ))
                    continue
                self._advance()
                out.append(_Token("VARREF", src[start:self.pos], name, line, col))
            elif src[self.pos:self.pos + 2] in _PUNCT2:
                text = src[self.pos:self.pos + 2]
                self._advance(2)
                out.append(_Token("PUNCT", text, text, line, col))
            elif ch in _PUNCT1:
                self._advance()
                out.append(_Token("PUNCT", ch, ch, line, col))
            else:
                self.errors.append(ParseError(
                    SourceSpan(line, col, 1), f"unexpected character {ch!r}",
                ))
                self._advance()
        out.append(_Token("EOF", "", None, self.line, self.col))
        return out

    def _string(self, line: int, col: int) -> _Token:
        src = self.src
        start = self.pos
        self._advance()  # opening quote
        parts: list[str] = []
        while self.pos < len(src) and src[self.pos] not in '"\n':
            if src[self.pos] == "\\" and self.pos + 1 < len(src):
                esc = src[self.pos + 1]
                parts.append(_ESCAPES.get(esc, esc))
                self._advance(2)
            else:
                parts.append(src[self.pos])
                self._advance()
        if self.pos < len(src) and src[self.pos] == '"':
            self._advance()
        else:
            self.errors.append(ParseError(
                SourceSpan(line, col, max(1, self.pos - start)),
                "unterminated string literal", expected='closing "',
            ))
        return _Token("STRING", src[start:self.pos], "".join(parts), line, col)


class _Recover(Exception):
    def __init__(self, error: ParseError):
        self.error = error


class _Parser:
    def __init__(self, tokens: list[_Token], errors: list[ParseError]):
        self.tokens = tokens
        self.idx = 0
        self.errors = errors

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.idx + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.idx += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "KEYWORD" and tok.text in words

    def accept_keyword(self, *words: str) -> _Token | None:
        if self.at_keyword(*words):
            return self.next()
        return None

    def at_punct(self, *texts: str) -> bool:
        tok = self.peek()
        return tok.kind == "PUNCT" and tok.text in texts

    def fail(self, tok: _Token, message: str, expected: str = "") -> _Recover:
        return _Recover(ParseError(tok.span(), message, expected))

    def expect_keyword(self, word: str) -> _Token:
        tok = self.accept_keyword(word)
        if tok is None:
            raise self.fail(self.peek(), f"expected {word}", expected=word)
        return tok

    def expect_punct(self, text: str) -> _Token:
        if self.at_punct(text):
            return self.next()
        raise self.fail(self.peek(), f"expected '{text}'", expected=text)

    def expect_ident(self, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != "IDENT":
            raise self.fail(tok, f"expected {what}", expected="identifier")
        return self.next()

    def expect_string(self, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != "STRING":
            raise self.fail(tok, f"expected {what}", expected="quoted string")
        return self.next()

    def expect_number(self, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != "NUMBER":
            raise self.fail(tok, f"expected {what}", expected="number")
        return self.next()

    def synchronize(self) -> None:
        """Skip to the next top-level keyword so later blocks still parse."""
        if self.peek().kind == "KEYWORD" and self.peek().text in TOP_LEVEL:
            self.next()
        while self.peek().kind != "EOF":
            tok = self.peek()
            if tok.kind == "KEYWORD" and tok.text in TOP_LEVEL:
                return
            self.next()

    # -- grammar -----------------------------------------------------------

    def parse(self) -> KnowledgeBase | None:
        title = ""
        mode: CertaintyMode | None = None
        qualifiers: dict[str, Qualifier] = {}
        variables: dict[str, Variable] = {}
        choices: dict[str, Choice] = {}
        rules: list[Rule] = []
        goals: list[str] = []

        while self.peek().kind != "EOF":
            tok = self.peek()
            try:
                if self.accept_keyword("TITLE"):
                    title = self.expect_string("title text").value  # type: ignore[assignment]
                elif self.accept_keyword("MODE"):
                    if mode is not None:
                        raise self.fail(tok, "MODE declared twice")
                    mode = self.parse_mode()
                elif self.accept_keyword("QUALIFIER"):
                    qual = self.parse_qualifier()
                    if qual.name in qualifiers:
                        raise self.fail(tok, f"qualifier '{qual.name}' declared twice")
                    qualifiers[qual.name] = qual
                elif self.accept_keyword("VARIABLE"):
                    var = self.parse_variable()
                    if var.name in variables:
                        raise self.fail(tok, f"variable '{var.name}' declared twice")
                    variables[var.name] = var
                elif self.accept_keyword("CHOICE"):
                    name = self.expect_ident("choice name").text
                    statement = self.expect_string("choice statement").value
                    if name in choices:
                        raise self.fail(tok, f"choice '{name}' declared twice")
                    choices[name] = Choice(name, statement)  # type: ignore[arg-type]
                elif self.accept_keyword("GOAL"):
                    goals.append(self.expect_ident("goal choice name").text)
                    while self.at_punct(","):
                        self.next()
                        goals.append(self.expect_ident("goal choice name").text)
                elif self.accept_keyword("RULE"):
                    rules.append(self.parse_rule(len(rules) + 1))
                else:
                    raise self.fail(tok, f"unexpected {tok.text or tok.kind!r}",
                                    expected="a declaration keyword")
            except _Recover as rec:
                self.errors.append(rec.error)
                self.synchronize()

        if mode is None and not self.errors:
            eof = self.tokens[-1]
            self.errors.append(ParseError(
                SourceSpan(eof.line, max(1, eof.column - 1), 1),
                "knowledge base has no MODE declaration", expected="MODE",
            ))
        if self.errors or mode is None:
            return None
        return KnowledgeBase(
            title=title, mode=mode, qualifiers=qualifiers, variables=variables,
            choices=choices, rules=tuple(rules), goals=tuple(goals),
        )

    def parse_mode(self) -> CertaintyMode:
        tok = self.peek()
        if self.accept_keyword("YES"):
            self.expect_punct("/")
            self.expect_keyword("NO")
            return CertaintyMode(ModeKind.YES_NO)
        if self.accept_keyword("INCR"):
            self.expect_punct("/")
            self.expect_keyword("DECR")
            return CertaintyMode(ModeKind.INCR_DECR)
        if self.accept_keyword("FUZZY"):
            return CertaintyMode(ModeKind.FUZZY)
        if self.accept_keyword("CUSTOM"):
            formula = self.parse_expression(bare_idents=True)
            return CertaintyMode(ModeKind.CUSTOM_FORMULA,
                                 formula=expression_to_text(formula, bare=True))
        if tok.kind == "NUMBER" and tok.value == 0.0:
            self.next()
            self.expect_punct("-")
            hi = self.expect_number("10")
            if hi.value != 10.0:
                raise self.fail(hi, "unknown certainty scale", expected="0-10")
            return CertaintyMode(ModeKind.SCALE_0_10)
        if self.at_punct("-"):
            self.next()
            lo = self.expect_number("100")
            self.expect_punct("/")
            self.expect_punct("+")
            hi = self.expect_number("100")
            if lo.value != 100.0 or hi.value != 100.0:
                raise self.fail(lo, "unknown certainty scale", expected="-100/+100")
            return CertaintyMode(ModeKind.SCALE_NEG100_POS100)
        raise self.fail(tok, "unknown certainty mode",
                        expected="YES/NO, 0-10, -100/+100, INCR/DECR, CUSTOM or FUZZY")

    def parse_qualifier(self) -> Qualifier:
        name = self.expect_ident("qualifier name").text
        multi = self.accept_keyword("MULTI") is not None
        prompt = self.expect_string("qualifier prompt").value
        values: list[str] = []
        while self.peek().kind == "NUMBER":
            num = self.next()
            if num.value != len(values) + 1:
                raise self.fail(num, f"qualifier values must be numbered 1..n in order, "
                                     f"got {num.text}", expected=str(len(values) + 1))
            values.append(self.expect_string("value label").value)  # type: ignore[arg-type]
        if not values:
            raise self.fail(self.peek(), f"qualifier '{name}' has no numbered values",
                            expected="1 \"label\"")
        return Qualifier(name, prompt, tuple(values), multi_select=multi)  # type: ignore[arg-type]

    def parse_variable(self) -> Variable:
        name = self.expect_ident("variable name").text
        kind = ValueKind.NUMERIC
        if self.accept_keyword("TEXT"):
            kind = ValueKind.TEXT
        else:
            self.accept_keyword("NUMERIC")
        description = ""
        if self.peek().kind == "STRING":
            description = self.next().value  # type: ignore[assignment]
        return Variable(name, description, value_kind=kind)

    def parse_rule(self, ordinal: int) -> Rule:
        inline = None
        if self.peek().kind == "IDENT":
            inline = self.next().text
        self.expect_keyword("IF")
        premise = [self.parse_condition()]
        while self.accept_keyword("AND"):
            premise.append(self.parse_condition())
        self.expect_keyword("THEN")
        then_part = [self.parse_conclusion()]
        while self.accept_keyword("AND"):
            then_part.append(self.parse_conclusion())
        else_part: list[Conclusion] = []
        if self.accept_keyword("ELSE"):
            else_part.append(self.parse_conclusion())
            while self.accept_keyword("AND"):
                else_part.append(self.parse_conclusion())
        note = reference = None
        if self.accept_keyword("NOTE"):
            note = self.expect_string("note text").value
        if self.accept_keyword("REFERENCE"):
            reference = self.expect_string("reference text").value
        name = inline
        if self.at_keyword("NAME"):
            tok = self.next()
            explicit = self.expect_ident("rule name").text
            if inline is not None and explicit != inline:
                raise self.fail(tok, f"rule already named '{inline}'")
            name = explicit
        return Rule(
            name=name or f"R{ordinal}",
            premise=tuple(premise), then_part=tuple(then_part),
            else_part=tuple(else_part), note=note, reference=reference,  # type: ignore[arg-type]
        )

    def parse_condition(self) -> Condition:
        if self.peek().kind == "IDENT":
            qualifier = self.next().text
            neg_tok = self.accept_keyword("IS-NOT")
            if neg_tok is None:
                self.expect_keyword("IS")
            labels = [self.expect_string("value label").value]
            while self.at_punct(","):
                self.next()
                labels.append(self.expect_string("value label").value)
            return QualifierTest(qualifier, tuple(labels), negated=neg_tok is not None)  # type: ignore[arg-type]
        left = self.parse_expression()
        tok = self.peek()
        if tok.kind == "PUNCT" and tok.text in ("=", "<>", "<", "<=", ">", ">="):
            self.next()
        else:
            raise self.fail(tok, "expected a comparison operator",
                            expected="= <> < <= > >=")
        right = self.parse_expression()
        return Comparison(left, tok.text, right)

    def parse_conclusion(self) -> Conclusion:
        tok = self.peek()
        if tok.kind == "VARREF":
            self.next()
            self.expect_punct("=")
            return VariableAssign(tok.value, self.parse_expression())  # type: ignore[arg-type]
        if tok.kind != "IDENT":
            raise self.fail(tok, "expected a conclusion",
                            expected="choice, qualifier or [variable]")
        name = self.next().text
        if self.accept_keyword("IS"):
            labels = [self.expect_string("value label").value]
            while self.at_punct(","):
                self.next()
                labels.append(self.expect_string("value label").value)
            return QualifierAssign(name, tuple(labels))  # type: ignore[arg-type]
        conf_tok = self.peek()
        if not self.accept_keyword("Confidence"):
            raise self.fail(conf_tok, f"expected IS or Confidence= after '{name}'",
                            expected="IS or Confidence=")
        conf_span_len = len("Confidence")
        if self.at_punct("="):
            self.next()
            conf_span_len += 1
        else:
            raise _Recover(ParseError(conf_tok.span(), "expected '=' after Confidence",
                                      expected="="))
        if self.accept_keyword("YES"):
            return ChoiceAssign(name, 1.0)
        if self.accept_keyword("NO"):
            return ChoiceAssign(name, 0.0)
        sign = 1.0
        if self.at_punct("-"):
            self.next()
            sign = -1.0
        elif self.at_punct("+"):
            self.next()
        if self.peek().kind != "NUMBER":
            raise _Recover(ParseError(
                conf_tok.span(conf_span_len), "missing confidence value",
                expected="number or YES/NO",
            ))
        return ChoiceAssign(name, sign * self.next().value)  # type: ignore[operator]

    def parse_expression(self, bare_idents: bool = False) -> Expression:
        return self._additive(bare_idents)

    def _additive(self, bare: bool) -> Expression:
        node = self._multiplicative(bare)
        while self.at_punct("+", "-"):
            op = self.next().text
            node = BinaryOp(op, node, self._multiplicative(bare))
        return node

    def _multiplicative(self, bare: bool) -> Expression:
        node = self._factor(bare)
        while self.at_punct("*", "/"):
            op = self.next().text
            node = BinaryOp(op, node, self._factor(bare))
        return node

    def _factor(self, bare: bool) -> Expression:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.next()
            return NumberLit(tok.value)  # type: ignore[arg-type]
        if tok.kind == "STRING":
            self.next()
            return TextLit(tok.value)  # type: ignore[arg-type]
        if tok.kind == "VARREF":
            self.next()
            return VarRef(tok.value)  # type: ignore[arg-type]
        if bare and tok.kind in ("IDENT", "KEYWORD") and tok.text.isupper() \
                and tok.text.isalpha():
            # Formula tokens (PREV, NEW) are bare words, not bracketed.
            if tok.text in TOP_LEVEL or tok.text in ("IF", "THEN", "ELSE", "AND"):
                raise self.fail(tok, "expected an operand", expected="PREV or NEW")
            self.next()
            return VarRef(tok.text)
        if tok.kind == "PUNCT" and tok.text == "-":
            self.next()
            return Negate(self._factor(bare))
        if tok.kind == "PUNCT" and tok.text == "(":
            self.next()
            inner = self._additive(bare)
            self.expect_punct(")")
            return inner
        raise self.fail(tok, "expected an operand",
                        expected="number, string, [variable], '-' or '('")


# --- public entry points ---------------------------------------------------

def parse_kb(source: str) -> KnowledgeBase | list[ParseError]:
    """Parse knowledge-base text; returns the model or every error found."""
    lexer = _Lexer(source)
    tokens = lexer.tokens()
    parser = _Parser(tokens, lexer.errors)
    kb = parser.parse()
    if parser.errors:
        return sorted(parser.errors, key=lambda e: (e.span.line, e.span.column))
    assert kb is not None
    return kb


def parse_kb_strict(source: str) -> KnowledgeBase:
    result = parse_kb(source)
    if isinstance(result, list):
        raise KbSyntaxError(result)
    return result


def load_kb(path: str) -> KnowledgeBase:
    with open(path, encoding="utf-8") as handle:
        return parse_kb_strict(handle.read())


def _parse_single_expression(source: str, bare: bool) -> Expression:
    lexer = _Lexer(source)
    tokens = lexer.tokens()
    if lexer.errors:
        raise KbSyntaxError(lexer.errors)
    parser = _Parser(tokens, [])
    try:
        expr = parser.parse_expression(bare_idents=bare)
        tail = parser.peek()
        if tail.kind != "EOF":
            raise parser.fail(tail, "unexpected trailing input", expected="end of input")
    except _Recover as rec:
        raise KbSyntaxError([rec.error]) from None
    return expr


def parse_expression(source: str) -> Expression:
    """Parse one arithmetic expression; raises KbSyntaxError on bad input."""
    return _parse_single_expression(source, bare=False)


def parse_formula(source: str) -> Expression:
    """Parse a custom-mode combination formula (bare PREV/NEW tokens)."""
    return _parse_single_expression(source, bare=True)


# --- canonical serialization ----------------------------------------------

def _quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    escaped = escaped.replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'


def format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def expression_to_text(expr: Expression, bare: bool = False) -> str:
    def render(node: Expression, context: int) -> str:
        if isinstance(node, NumberLit):
            return format_number(node.value)
        if isinstance(node, TextLit):
            return _quote(node.value)
        if isinstance(node, VarRef):
            return node.name if bare else f"[{node.name}]"
        if isinstance(node, Negate):
            text = "-" + render(node.operand, 3)
            return f"({text})" if context > 3 else text
        prec = _PREC[node.op]
        text = f"{render(node.left, prec)} {node.op} {render(node.right, prec + 1)}"
        return f"({text})" if prec < context else text

    return render(expr, 0)


def _labels_text(labels: tuple[str, ...]) -> str:
    return ", ".join(_quote(label) for label in labels)


def condition_to_text(cond: Condition) -> str:
    if isinstance(cond, QualifierTest):
        op = "IS-NOT" if cond.negated else "IS"
        return f"{cond.qualifier} {op} {_labels_text(cond.labels)}"
    return (f"{expression_to_text(cond.left)} {cond.op} "
            f"{expression_to_text(cond.right)}")


def conclusion_to_text(concl: Conclusion) -> str:
    if isinstance(concl, ChoiceAssign):
        return f"{concl.choice} Confidence={format_number(concl.confidence)}"
    if isinstance(concl, QualifierAssign):
        return f"{concl.qualifier} IS {_labels_text(concl.labels)}"
    return f"[{concl.variable}] = {expression_to_text(concl.expression)}"


def _mode_text(mode: CertaintyMode) -> str:
    if mode.kind is ModeKind.CUSTOM_FORMULA:
        return f"MODE CUSTOM {mode.formula}"
    return f"MODE {mode.kind.value}"


def _rule_lines(rule: Rule) -> list[str]:
    lines = ["RULE"]
    for i, cond in enumerate(rule.premise):
        lines.append(f"{'IF' if i == 0 else 'AND'} {condition_to_text(cond)}")
    for i, concl in enumerate(rule.then_part):
        lines.append(f"{'THEN' if i == 0 else 'AND'} {conclusion_to_text(concl)}")
    for i, concl in enumerate(rule.else_part):
        lines.append(f"{'ELSE' if i == 0 else 'AND'} {conclusion_to_text(concl)}")
    if rule.note is not None:
        lines.append(f"NOTE {_quote(rule.note)}")
    if rule.reference is not None:
        lines.append(f"REFERENCE {_quote(rule.reference)}")
    lines.append(f"NAME {rule.name}")
    return lines


def serialize_kb(kb: KnowledgeBase) -> str:
    """Write the canonical one-clause-per-line form (a serialization fixpoint)."""
    blocks: list[str] = []
    if kb.title:
        blocks.append(f"TITLE {_quote(kb.title)}")
    blocks.append(_mode_text(kb.mode))
    for qual in kb.qualifiers.values():
        multi = " MULTI" if qual.multi_select else ""
        lines = [f"QUALIFIER {qual.name}{multi} {_quote(qual.prompt)}"]
        lines.extend(f"  {i} {_quote(label)}" for i, label in enumerate(qual.values, 1))
        blocks.append("\n".join(lines))
    for var in kb.variables.values():
        desc = f" {_quote(var.description)}" if var.description else ""
        blocks.append(f"VARIABLE {var.name} {var.value_kind.value}{desc}")
    for choice in kb.choices.values():
        blocks.append(f"CHOICE {choice.name} {_quote(choice.statement)}")
    if kb.goals != tuple(kb.choices):
        blocks.append("GOAL " + ", ".join(kb.goals))
    for rule in kb.rules:
        blocks.append("\n".join(_rule_lines(rule)))
    return "\n\n".join(blocks) + "\n"
