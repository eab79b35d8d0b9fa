"""Structural analysis of Java source.

Three operations back the code-lookup tools: header cleanup, method
enumeration, and method-level snippet extraction. Parsing is grammar-driven
over a token stream (comments, string literals, text blocks, generics and
anonymous class bodies are handled by the lexer/parser, not by regexes), but
only declaration structure is recognized; expression internals are skipped
with balanced-delimiter scans.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import JavaParseError

__all__ = ["MethodInfo", "CodeSnippet", "strip_header", "enumerate_methods", "extract_method"]


@dataclass(frozen=True)
class MethodInfo:
    """One method or constructor declaration, located by 1-based inclusive lines."""

    name: str
    signature: str
    start_line: int
    end_line: int
    kind: str  # "method" or "constructor"


@dataclass(frozen=True)
class CodeSnippet:
    """Exact source lines [start_line, end_line] of one declaration."""

    source_path: str
    method: MethodInfo
    text: str


_KEYWORD_RE = re.compile(r"\b(?:package|import)\b")

MODIFIERS = {
    "public", "protected", "private", "static", "final", "abstract",
    "synchronized", "native", "strictfp", "default", "transient",
    "volatile", "sealed",
}

_TYPE_DECL_KEYWORDS = {"class", "interface", "enum"}


def strip_header(source: str) -> str:
    """Remove leading license/header block comments.

    A leading block comment is removed (together with the blank lines around
    it) only when it terminates before the first `package` or `import`
    keyword in the file; anything else is returned unchanged. Applied to a
    fixpoint, so the operation is idempotent even with stacked header
    comments.
    """
    text = source
    while True:
        lead = len(text) - len(text.lstrip())
        rest = text[lead:]
        if not rest.startswith("/*"):
            return text
        end = rest.find("*/", 2)
        if end == -1:
            return text
        comment_end = lead + end + 2
        kw = _KEYWORD_RE.search(text)
        if kw is not None and kw.start() < comment_end:
            return text
        text = text[comment_end:].lstrip()


@dataclass(frozen=True)
class _Token:
    kind: str  # "word", "punct", "number", "string", "char"
    text: str
    line: int
    col: int
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    line = 1
    line_start = 0
    n = len(source)

    def here(offset: int = 0) -> tuple[int, int]:
        return line, (i + offset) - line_start + 1

    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if ch in " \t\r\f":
            i += 1
            continue
        if ch == "/" and i + 1 < n:
            nxt = source[i + 1]
            if nxt == "/":
                j = source.find("\n", i)
                i = n if j == -1 else j
                continue
            if nxt == "*":
                l0, c0 = here()
                j = source.find("*/", i + 2)
                if j == -1:
                    raise JavaParseError("unterminated block comment", l0, c0)
                line += source.count("\n", i, j + 2)
                i = j + 2
                # recompute column base for subsequent tokens
                nl = source.rfind("\n", 0, i)
                line_start = nl + 1 if nl != -1 else 0
                continue
        if ch == '"':
            l0, c0 = here()
            if source.startswith('"""', i):
                j = i + 3
                while j < n:
                    if source[j] == "\\":
                        j += 2
                        continue
                    if source.startswith('"""', j):
                        break
                    j += 1
                if j >= n:
                    raise JavaParseError("unterminated text block", l0, c0)
                end = j + 3
            else:
                j = i + 1
                while j < n and source[j] not in '"\n':
                    j += 2 if source[j] == "\\" else 1
                if j >= n or source[j] != '"':
                    raise JavaParseError("unterminated string literal", l0, c0)
                end = j + 1
            text = source[i:end]
            tokens.append(_Token("string", text, l0, c0, i))
            line += text.count("\n")
            nl = source.rfind("\n", 0, end)
            if nl != -1 and nl >= i:
                line_start = nl + 1
            i = end
            continue
        if ch == "'":
            l0, c0 = here()
            j = i + 1
            while j < n and source[j] not in "'\n":
                j += 2 if source[j] == "\\" else 1
            if j >= n or source[j] != "'":
                raise JavaParseError("unterminated character literal", l0, c0)
            tokens.append(_Token("char", source[i : j + 1], l0, c0, i))
            i = j + 1
            continue
        if ch.isalpha() or ch in "_$":
            l0, c0 = here()
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] in "_$"):
                j += 1
            tokens.append(_Token("word", source[i:j], l0, c0, i))
            i = j
            continue
        if ch.isdigit():
            l0, c0 = here()
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] in "._"):
                j += 1
            tokens.append(_Token("number", source[i:j], l0, c0, i))
            i = j
            continue
        l0, c0 = here()
        tokens.append(_Token("punct", ch, l0, c0, i))
        i += 1
    return tokens


class _Parser:
    """Collects method/constructor declarations from the token stream."""

    def __init__(self, source: str, tokens: list[_Token]):
        self.source = source
        self.tokens = tokens
        self.found: list[tuple[int, int, MethodInfo]] = []

    # -- token helpers -------------------------------------------------

    def _tok(self, i: int) -> _Token:
        if i >= len(self.tokens):
            last = self.tokens[-1] if self.tokens else _Token("punct", "", 1, 1, 0)
            raise JavaParseError("unexpected end of input", last.line, last.col)
        return self.tokens[i]

    def _is(self, i: int, text: str) -> bool:
        return i < len(self.tokens) and self.tokens[i].text == text

    def _is_word(self, i: int) -> bool:
        return i < len(self.tokens) and self.tokens[i].kind == "word"

    def _skip_annotation(self, i: int) -> int:
        # at '@': @Name(.Name)* possibly with a balanced argument list
        i += 1
        if not self._is_word(i):
            return i
        i += 1
        while self._is(i, ".") and self._is_word(i + 1):
            i += 2
        if self._is(i, "("):
            i = self._skip_balanced(i, "(", ")")
        return i

    def _skip_balanced(self, i: int, open_ch: str, close_ch: str) -> int:
        """Skip from an opening delimiter past its match; returns index after."""
        depth = 0
        start = self._tok(i)
        while i < len(self.tokens):
            t = self.tokens[i].text
            if t == open_ch:
                depth += 1
            elif t == close_ch:
                depth -= 1
                if depth == 0:
                    return i + 1
            i += 1
        raise JavaParseError(f"unbalanced '{open_ch}'", start.line, start.col)

    def _skip_angles(self, i: int) -> int:
        # at '<' of a type-parameter/argument list; operators cannot occur here
        depth = 0
        start = self._tok(i)
        while i < len(self.tokens):
            t = self.tokens[i].text
            if t == "<":
                depth += 1
            elif t == ">":
                depth -= 1
                if depth == 0:
                    return i + 1
            elif t in "({;":
                break
            i += 1
        raise JavaParseError("unbalanced '<'", start.line, start.col)

    # -- declaration structure -----------------------------------------

    def parse_compilation_unit(self) -> None:
        i = 0
        while i < len(self.tokens):
            t = self.tokens[i]
            if t.kind == "word" and t.text in ("package", "import"):
                while i < len(self.tokens) and self.tokens[i].text != ";":
                    i += 1
                i += 1
                continue
            i = self._maybe_type_decl_or_skip(i)

    def _maybe_type_decl_or_skip(self, i: int) -> int:
        t = self.tokens[i]
        if t.text == "@":
            if self._is_word(i + 1) and self.tokens[i + 1].text == "interface":
                return self._parse_type_decl(i + 1, annotation_type=True)
            return self._skip_annotation(i)
        if t.kind == "word" and t.text in _TYPE_DECL_KEYWORDS:
            return self._parse_type_decl(i)
        if t.kind == "word" and t.text == "record" and self._is_word(i + 1):
            return self._parse_type_decl(i)
        return i + 1

    def _parse_type_decl(self, i: int, annotation_type: bool = False) -> int:
        decl_kw = self._tok(i).text
        i += 1
        name_tok = self._tok(i)
        if name_tok.kind != "word":
            raise JavaParseError("expected type name", name_tok.line, name_tok.col)
        name = name_tok.text
        i += 1
        # header: type params, record components, extends/implements/permits
        while i < len(self.tokens) and not self._is(i, "{"):
            if self._is(i, "<"):
                i = self._skip_angles(i)
            elif self._is(i, "("):
                i = self._skip_balanced(i, "(", ")")
            elif self._is(i, "@"):
                i = self._skip_annotation(i)
            else:
                i += 1
        if decl_kw == "enum":
            return self._parse_enum_body(i, name)
        return self._parse_class_body(i, name)

    def _parse_enum_body(self, i: int, name: str) -> int:
        open_tok = self._tok(i)
        i += 1  # past '{'
        # constants phase
        while i < len(self.tokens):
            if self._is(i, "@"):
                i = self._skip_annotation(i)
                continue
            if self._is(i, ","):
                i += 1
                continue
            if self._is(i, ";"):
                i += 1
                break
            if self._is(i, "}"):
                return i + 1
            if self._is_word(i):
                i += 1
                if self._is(i, "("):
                    i = self._skip_balanced(i, "(", ")")
                if self._is(i, "{"):
                    i = self._parse_class_body(i, None)
                continue
            raise JavaParseError("malformed enum constant", self._tok(i).line, self._tok(i).col)
        # members phase reuses the class-body loop (without re-consuming '{')
        return self._parse_members(i, name, open_tok)

    def _parse_class_body(self, i: int, enclosing: str | None) -> int:
        open_tok = self._tok(i)
        if open_tok.text != "{":
            raise JavaParseError("expected '{'", open_tok.line, open_tok.col)
        return self._parse_members(i + 1, enclosing, open_tok)

    def _parse_members(self, i: int, enclosing: str | None, open_tok: _Token) -> int:
        while True:
            if i >= len(self.tokens):
                raise JavaParseError("unbalanced '{'", open_tok.line, open_tok.col)
            if self._is(i, "}"):
                return i + 1
            if self._is(i, ";"):
                i += 1
                continue
            i = self._parse_member(i, enclosing)

    def _parse_member(self, i: int, enclosing: str | None) -> int:
        """Classify one class-body member and advance past it."""
        member_start = i
        prefix_words: list[str] = []  # non-modifier words seen before the decisive token
        j = i
        while True:
            t = self._tok(j)
            if t.text == "@":
                if self._is_word(j + 1) and self.tokens[j + 1].text == "interface":
                    return self._parse_type_decl(j + 1, annotation_type=True)
                j = self._skip_annotation(j)
                continue
            if t.kind == "word":
                if t.text in _TYPE_DECL_KEYWORDS:
                    return self._parse_type_decl(j)
                if t.text == "record" and self._is_word(j + 1) and (
                    self._is(j + 2, "(") or self._is(j + 2, "<")
                ):
                    return self._parse_type_decl(j)
                if t.text not in MODIFIERS:
                    prefix_words.append(t.text)
                j += 1
                continue
            if t.text == "<":
                start_angle = j
                j = self._skip_angles(j)
                if not prefix_words:
                    prefix_words.append("")  # leading type-parameter group
                continue
            if t.text == "(":
                if not prefix_words:
                    raise JavaParseError("method parameters without a name", t.line, t.col)
                name = prefix_words[-1]
                kind = (
                    "constructor"
                    if enclosing is not None
                    and name == enclosing
                    and all(w == "" for w in prefix_words[:-1])
                    else "method"
                )
                return self._finish_callable(member_start, j, name, kind)
            if t.text == "=":
                return self._skip_statement(j)
            if t.text == ";":
                return j + 1
            if t.text == "{":
                if (
                    enclosing is not None
                    and prefix_words
                    and prefix_words[-1] == enclosing
                    and all(w == "" for w in prefix_words[:-1])
                ):
                    # compact record constructor
                    return self._finish_callable(member_start, j, enclosing, "constructor", compact=True)
                return self._consume_block(j)
            if t.text == "}":
                raise JavaParseError("unexpected '}'", t.line, t.col)
            j += 1  # [] dims, '.', '?', '&' in types

    def _finish_callable(self, member_start: int, paren: int, name: str, kind: str, compact: bool = False) -> int:
        start_tok = self.tokens[member_start]
        if compact:
            sig_end_tok = self.tokens[paren - 1]
            j = paren
        else:
            j = self._skip_balanced(paren, "(", ")")
            sig_end_tok = self.tokens[j - 1]
        signature = " ".join(
            self.source[start_tok.pos : sig_end_tok.pos + len(sig_end_tok.text)].split()
        )
        # post-params: throws clause, extra dims, annotation-member defaults
        default_seen = False
        while True:
            t = self._tok(j)
            if t.text == ";":
                end_tok = t
                j += 1
                break
            if t.text == "{":
                if default_seen:
                    j = self._skip_balanced(j, "{", "}")
                    default_seen = False
                    continue
                j = self._consume_block(j)
                end_tok = self.tokens[j - 1]
                break
            if t.kind == "word" and t.text == "default":
                default_seen = True
                j += 1
                continue
            if t.text == "(":
                j = self._skip_balanced(j, "(", ")")
                continue
            j += 1
        info = MethodInfo(
            name=name,
            signature=signature,
            start_line=start_tok.line,
            end_line=end_tok.line,
            kind=kind,
        )
        self.found.append((start_tok.line, start_tok.col, info))
        return j

    def _skip_statement(self, i: int) -> int:
        """From a field's '=' past the terminating ';'; initializers may hold
        lambdas, array initializers and anonymous classes."""
        start = self._tok(i)
        depth = 0
        while i < len(self.tokens):
            t = self.tokens[i]
            if t.text in "([":
                depth += 1
                i += 1
                continue
            if t.text in ")]":
                depth -= 1
                i += 1
                continue
            if t.text == "{":
                i = self._consume_block(i)
                continue
            if t.text == ";" and depth == 0:
                return i + 1
            if t.kind == "word" and t.text == "new":
                i = self._maybe_anonymous_class(i)
                continue
            i += 1
        raise JavaParseError("missing ';'", start.line, start.col)

    def _consume_parens_collecting(self, i: int) -> int:
        """Skip a balanced '(...)' while still descending into anonymous
        classes nested in the argument list."""
        open_tok = self._tok(i)
        depth = 0
        while i < len(self.tokens):
            t = self.tokens[i]
            if t.text == "(":
                depth += 1
                i += 1
                continue
            if t.text == ")":
                depth -= 1
                i += 1
                if depth == 0:
                    return i
                continue
            if t.text == "{":
                i = self._consume_block(i)
                continue
            if t.kind == "word" and t.text == "new":
                i = self._maybe_anonymous_class(i)
                continue
            i += 1
        raise JavaParseError("unbalanced '('", open_tok.line, open_tok.col)

    def _consume_block(self, i: int) -> int:
        """Skip a `{...}` body, collecting declarations from anonymous and local classes."""
        open_tok = self._tok(i)
        depth = 0
        while i < len(self.tokens):
            t = self.tokens[i]
            if t.text == "{":
                depth += 1
                i += 1
                continue
            if t.text == "}":
                depth -= 1
                i += 1
                if depth == 0:
                    return i
                continue
            if t.kind == "word" and t.text == "new":
                i = self._maybe_anonymous_class(i)
                continue
            if t.kind == "word" and t.text in _TYPE_DECL_KEYWORDS and self._is_word(i + 1):
                i = self._parse_type_decl(i)  # local class
                continue
            if t.kind in ("string", "char"):
                i += 1
                continue
            i += 1
        raise JavaParseError("unbalanced '{'", open_tok.line, open_tok.col)

    def _maybe_anonymous_class(self, i: int) -> int:
        """At a `new` token: descend into `new Type(...) { ... }` bodies."""
        j = i + 1
        if not self._is_word(j):
            return i + 1
        j += 1
        while True:
            if self._is(j, ".") and self._is_word(j + 1):
                j += 2
            elif self._is(j, "<"):
                j = self._skip_angles(j)
            else:
                break
        if self._is(j, "["):
            return i + 1  # array creation; any brace that follows is an initializer
        if not self._is(j, "("):
            return i + 1
        j = self._consume_parens_collecting(j)
        if self._is(j, "{"):
            return self._parse_class_body(j, None)
        return j


def enumerate_methods(source: str) -> list[MethodInfo]:
    """All method and constructor declarations in the file, in source order.

    Declarations inside nested, local and anonymous classes (and enum
    constant bodies) are included; overloads appear as separate entries.
    Raises JavaParseError with the position of the first structural error.
    """
    tokens = _tokenize(source)
    parser = _Parser(source, tokens)
    parser.parse_compilation_unit()
    return [info for _, _, info in sorted(parser.found, key=lambda it: (it[0], it[1]))]


def extract_method(source: str, method_name: str, source_path: str = "<memory>") -> list[CodeSnippet]:
    """Snippets for every declaration named method_name; empty when absent."""
    lines = source.splitlines(keepends=True)
    out = []
    for info in enumerate_methods(source):
        if info.name != method_name:
            continue
        text = "".join(lines[info.start_line - 1 : info.end_line])
        out.append(CodeSnippet(source_path=source_path, method=info, text=text))
    return out
