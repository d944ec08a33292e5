"""Recursive-descent parser for the Python subset found in generated circuit code.

Covers module-level statements, imports, assignments, calls, attribute
chains, literals, containers and comprehensions, ``def``/``class``,
``for``/``while``/``if``/``with``/``try`` blocks. A statement that fails to
parse becomes an ``Error`` node holding its raw tokens, and the tree is
flagged as degraded; parsing resumes at the next logical line.
"""

from __future__ import annotations

from .lexer import DEDENT, ENDMARKER, ERROR, INDENT, LAYOUT, NAME, NEWLINE, NUMBER, OP, STRING, Token, tokenize
from .tree import Node, SyntaxTree


class ParseFail(Exception):
    def __init__(self, token: Token, message: str):
        super().__init__(f"line {token.line}: {message} (at {token.text!r})")
        self.token = token


_AUGOPS = frozenset("+= -= *= /= //= %= **= >>= <<= &= |= ^= @=".split())
_COMPOPS = frozenset("< > == >= <= !=".split())
_BINARY_LEVELS = (
    ("|",),
    ("^",),
    ("&",),
    ("<<", ">>"),
    ("+", "-"),
    ("*", "/", "//", "%", "@"),
)
_SOFT_CONSTANTS = frozenset({"True", "False", "None"})


def _leaf(tok: Token) -> Node:
    if tok.type == NAME:
        kind = "Keyword" if tok.is_keyword else "Name"
    elif tok.type == NUMBER:
        kind = "Number"
    elif tok.type == STRING:
        kind = "String"
    elif tok.type == OP:
        kind = "Op"
    else:
        kind = "ErrorToken"
    return Node(kind, (), tok.text, (tok.start, tok.end))


def _mk(kind, children, **fields) -> Node:
    children = tuple(c for c in children if c is not None)
    if children:
        span = (children[0].span[0], children[-1].span[1])
    else:
        span = (0, 0)
    return Node(kind, children, None, span, fields)


class Parser:
    def __init__(self, source: str):
        self.source = source
        self.toks = tokenize(source)
        self.pos = 0
        self.errors: list[str] = []

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, offset=1) -> Token:
        return self.toks[min(self.pos + offset, len(self.toks) - 1)]

    def at_op(self, *texts) -> bool:
        return self.tok.type == OP and self.tok.text in texts

    def at_kw(self, *texts) -> bool:
        return self.tok.type == NAME and self.tok.text in texts

    def take(self) -> Node:
        tok = self.tok
        if tok.type in LAYOUT:
            raise ParseFail(tok, "unexpected layout token")
        self.pos += 1
        return _leaf(tok)

    def expect_op(self, text) -> Node:
        if not self.at_op(text):
            raise ParseFail(self.tok, f"expected {text!r}")
        return self.take()

    def expect_kw(self, text) -> Node:
        if not self.at_kw(text):
            raise ParseFail(self.tok, f"expected {text!r}")
        return self.take()

    def expect_name(self) -> Node:
        if self.tok.type != NAME or self.tok.is_keyword:
            raise ParseFail(self.tok, "expected a name")
        return self.take()

    def expect_type(self, type_):
        if self.tok.type != type_:
            raise ParseFail(self.tok, f"expected {type_}")
        self.pos += 1

    # module and statements

    def parse(self) -> SyntaxTree:
        stmts = []
        while self.tok.type != ENDMARKER:
            stmts.extend(self.statement_recovering())
        root = _mk("Module", stmts, body=stmts)
        if not stmts:
            root.span = (0, len(self.source))
        return SyntaxTree(root, self.source, degraded=bool(self.errors), errors=list(self.errors))

    def statement_recovering(self) -> list[Node]:
        start = self.pos
        try:
            if self.tok.type == INDENT:
                raise ParseFail(self.tok, "unexpected indent")
            return self.statement()
        except ParseFail as exc:
            self.pos = start
            self.errors.append(str(exc))
            return [self.recover()]

    def recover(self) -> Node:
        start = self.pos
        leaves = []
        depth = 0
        while True:
            tok = self.tok
            if tok.type == ENDMARKER:
                break
            if tok.type == DEDENT and depth == 0:
                break
            self.pos += 1
            if tok.type == INDENT:
                depth += 1
            elif tok.type == DEDENT:
                depth -= 1
                if depth == 0 and self.tok.type != INDENT:
                    break
            elif tok.type == NEWLINE:
                if depth == 0 and self.tok.type != INDENT:
                    break
            else:
                leaves.append(_leaf(tok))
        if self.pos == start and self.tok.type != ENDMARKER:
            self.pos += 1  # guarantee progress
        return _mk("Error", leaves)

    def statement(self) -> list[Node]:
        if self.at_op("@"):
            return [self.decorated()]
        if self.tok.type == NAME:
            handler = {
                "def": self.funcdef,
                "class": self.classdef,
                "if": self.if_stmt,
                "for": self.for_stmt,
                "while": self.while_stmt,
                "with": self.with_stmt,
                "try": self.try_stmt,
            }.get(self.tok.text)
            if handler is not None:
                return [handler()]
        return self.simple_stmt()

    def simple_stmt(self) -> list[Node]:
        nodes = [self.small_stmt()]
        while self.at_op(";"):
            semi = self.take()
            nodes[-1].children = nodes[-1].children + (semi,)
            if self.tok.type == NEWLINE:
                break
            nodes.append(self.small_stmt())
        if self.tok.type not in (NEWLINE, ENDMARKER):
            raise ParseFail(self.tok, "expected end of statement")
        if self.tok.type == NEWLINE:
            self.pos += 1
        return nodes

    def small_stmt(self) -> Node:
        t = self.tok
        if t.type == NAME:
            if t.text in ("pass", "break", "continue"):
                return _mk(t.text.capitalize(), [self.take()])
            if t.text == "return":
                kw = self.take()
                value = None if self._at_stmt_end() else self.testlist_star_expr()
                return _mk("Return", [kw, value], value=value)
            if t.text == "raise":
                kw = self.take()
                parts = [kw]
                exc = cause = None
                if not self._at_stmt_end():
                    exc = self.test()
                    parts.append(exc)
                    if self.at_kw("from"):
                        parts.append(self.take())
                        cause = self.test()
                        parts.append(cause)
                return _mk("Raise", parts, exc=exc, cause=cause)
            if t.text in ("global", "nonlocal"):
                parts = [self.take(), self.expect_name()]
                while self.at_op(","):
                    parts.append(self.take())
                    parts.append(self.expect_name())
                names = [p.text for p in parts if p.kind == "Name"]
                return _mk(t.text.capitalize(), parts, names=names)
            if t.text == "del":
                kw = self.take()
                target = self.exprlist()
                return _mk("Del", [kw, target], targets=_elements(target))
            if t.text == "assert":
                parts = [self.take()]
                test = self.test()
                parts.append(test)
                msg = None
                if self.at_op(","):
                    parts.append(self.take())
                    msg = self.test()
                    parts.append(msg)
                return _mk("Assert", parts, test=test, msg=msg)
            if t.text == "import":
                return self.import_name()
            if t.text == "from":
                return self.import_from()
        return self.expr_stmt()

    def _at_stmt_end(self) -> bool:
        return self.tok.type in (NEWLINE, ENDMARKER) or self.at_op(";")

    def expr_stmt(self) -> Node:
        first = self.testlist_star_expr()
        if self.at_op("="):
            parts = [first]
            exprs = [first]
            while self.at_op("="):
                parts.append(self.take())
                nxt = self.testlist_star_expr()
                parts.append(nxt)
                exprs.append(nxt)
            return _mk("Assign", parts, targets=exprs[:-1], value=exprs[-1])
        if self.tok.type == OP and self.tok.text in _AUGOPS:
            op = self.take()
            value = self.testlist_star_expr()
            return _mk("AugAssign", [first, op, value], target=first, op=op.text, value=value)
        if self.at_op(":"):
            colon = self.take()
            ann = self.test()
            parts = [first, colon, ann]
            value = None
            if self.at_op("="):
                parts.append(self.take())
                value = self.testlist_star_expr()
                parts.append(value)
            return _mk("AnnAssign", parts, target=first, annotation=ann, value=value)
        return _mk("ExprStmt", [first], value=first)

    def dotted_name(self) -> Node:
        parts = [self.expect_name()]
        while self.at_op("."):
            parts.append(self.take())
            parts.append(self.expect_name())
        return _mk("DottedName", parts, name=".".join(p.text for p in parts if p.kind == "Name"))

    def import_name(self) -> Node:
        parts = [self.take()]
        names = []
        while True:
            dotted = self.dotted_name()
            alias = [dotted]
            asname = None
            if self.at_kw("as"):
                alias.append(self.take())
                as_leaf = self.expect_name()
                alias.append(as_leaf)
                asname = as_leaf.text
            parts.append(_mk("Alias", alias, name=dotted["name"], asname=asname))
            names.append((dotted["name"], asname))
            if not self.at_op(","):
                break
            parts.append(self.take())
        return _mk("Import", parts, names=names)

    def import_from(self) -> Node:
        parts = [self.take()]
        level = 0
        while self.at_op(".", "..."):
            leaf = self.take()
            level += len(leaf.text)
            parts.append(leaf)
        module = None
        if not self.at_kw("import"):
            dotted = self.dotted_name()
            parts.append(dotted)
            module = dotted["name"]
        elif level == 0:
            raise ParseFail(self.tok, "expected module name")
        parts.append(self.expect_kw("import"))
        names = []
        if self.at_op("*"):
            parts.append(self.take())
            names.append(("*", None))
        else:
            paren = self.at_op("(")
            if paren:
                parts.append(self.take())
            while True:
                name_leaf = self.expect_name()
                alias = [name_leaf]
                asname = None
                if self.at_kw("as"):
                    alias.append(self.take())
                    as_leaf = self.expect_name()
                    alias.append(as_leaf)
                    asname = as_leaf.text
                parts.append(_mk("Alias", alias, name=name_leaf.text, asname=asname))
                names.append((name_leaf.text, asname))
                if not self.at_op(","):
                    break
                parts.append(self.take())
                if paren and self.at_op(")"):
                    break
            if paren:
                parts.append(self.expect_op(")"))
        return _mk("ImportFrom", parts, module=module, level=level, names=names)

    # compound statements

    def suite(self) -> tuple[Node, Node]:
        colon = self.expect_op(":")
        if self.tok.type == NEWLINE:
            self.pos += 1
            self.expect_type(INDENT)
            stmts = []
            while self.tok.type not in (DEDENT, ENDMARKER):
                stmts.extend(self.statement_recovering())
            if self.tok.type == DEDENT:
                self.pos += 1
            if not stmts:
                raise ParseFail(self.tok, "empty block")
        else:
            stmts = self.simple_stmt()
        return colon, _mk("Block", stmts, body=stmts)

    def decorated(self) -> Node:
        parts = []
        decorators = []
        while self.at_op("@"):
            parts.append(self.take())
            dec = self.namedexpr_test()
            parts.append(dec)
            decorators.append(dec)
            self.expect_type(NEWLINE)
        if self.at_kw("def"):
            definition = self.funcdef()
        elif self.at_kw("class"):
            definition = self.classdef()
        else:
            raise ParseFail(self.tok, "expected def or class after decorator")
        parts.append(definition)
        return _mk("Decorated", parts, decorators=decorators, definition=definition)

    def funcdef(self) -> Node:
        kw = self.take()
        name = self.expect_name()
        lpar = self.expect_op("(")
        params, param_parts = self.parameters(")", annotations=True)
        rpar = self.expect_op(")")
        parts = [kw, name, lpar, *param_parts, rpar]
        returns = None
        if self.at_op("->"):
            parts.append(self.take())
            returns = self.test()
            parts.append(returns)
        colon, body = self.suite()
        parts += [colon, body]
        return _mk("FunctionDef", parts, name=name.text, params=params, returns=returns, body=body)

    def parameters(self, closer, annotations):
        params = []
        parts = []
        while not self.at_op(closer):
            if self.at_op("/"):
                parts.append(self.take())
            elif self.at_op("*", "**"):
                star = self.take()
                items = [star]
                pname = None
                if self.tok.type == NAME and not self.tok.is_keyword:
                    leaf = self.take()
                    items.append(leaf)
                    pname = leaf.text
                    if annotations and self.at_op(":"):
                        items.append(self.take())
                        items.append(self.test())
                elif star.text == "**":
                    raise ParseFail(self.tok, "expected name after **")
                node = _mk("Param", items, name=pname, default=None)
                parts.append(node)
                if pname:
                    params.append(node)
            else:
                leaf = self.expect_name()
                items = [leaf]
                annotation = default = None
                if annotations and self.at_op(":"):
                    items.append(self.take())
                    annotation = self.test()
                    items.append(annotation)
                if self.at_op("="):
                    items.append(self.take())
                    default = self.test()
                    items.append(default)
                node = _mk("Param", items, name=leaf.text, default=default, annotation=annotation)
                parts.append(node)
                params.append(node)
            if not self.at_op(","):
                break
            parts.append(self.take())
        return params, parts

    def classdef(self) -> Node:
        kw = self.take()
        name = self.expect_name()
        parts = [kw, name]
        bases = []
        if self.at_op("("):
            parts.append(self.take())
            args, arg_parts, keywords = self.arglist(")")
            bases = args + [v for _k, v in keywords]
            parts += arg_parts
            parts.append(self.expect_op(")"))
        colon, body = self.suite()
        parts += [colon, body]
        return _mk("ClassDef", parts, name=name.text, bases=bases, body=body)

    def if_stmt(self) -> Node:
        parts = [self.take()]
        test = self.namedexpr_test()
        colon, block = self.suite()
        parts += [test, colon, block]
        branches = [(test, block)]
        orelse = None
        while self.at_kw("elif"):
            parts.append(self.take())
            test = self.namedexpr_test()
            colon, block = self.suite()
            parts += [test, colon, block]
            branches.append((test, block))
        if self.at_kw("else"):
            parts.append(self.take())
            colon, orelse = self.suite()
            parts += [colon, orelse]
        return _mk("If", parts, branches=branches, orelse=orelse)

    def while_stmt(self) -> Node:
        parts = [self.take()]
        test = self.namedexpr_test()
        colon, body = self.suite()
        parts += [test, colon, body]
        orelse = None
        if self.at_kw("else"):
            parts.append(self.take())
            colon, orelse = self.suite()
            parts += [colon, orelse]
        return _mk("While", parts, test=test, body=body, orelse=orelse)

    def for_stmt(self) -> Node:
        parts = [self.take()]
        target = self.exprlist()
        parts.append(target)
        parts.append(self.expect_kw("in"))
        iterable = self.testlist_star_expr()
        parts.append(iterable)
        colon, body = self.suite()
        parts += [colon, body]
        orelse = None
        if self.at_kw("else"):
            parts.append(self.take())
            colon, orelse = self.suite()
            parts += [colon, orelse]
        return _mk("For", parts, target=target, iter=iterable, body=body, orelse=orelse)

    def with_stmt(self) -> Node:
        parts = [self.take()]
        items = []
        while True:
            expr = self.test()
            item = [expr]
            target = None
            if self.at_kw("as"):
                item.append(self.take())
                target = self.bitor()
                item.append(target)
            parts.append(_mk("WithItem", item, expr=expr, target=target))
            items.append((expr, target))
            if not self.at_op(","):
                break
            parts.append(self.take())
        colon, body = self.suite()
        parts += [colon, body]
        return _mk("With", parts, items=items, body=body)

    def try_stmt(self) -> Node:
        parts = [self.take()]
        colon, body = self.suite()
        parts += [colon, body]
        handlers = []
        orelse = finalbody = None
        while self.at_kw("except"):
            parts.append(self.take())
            etype = name = None
            if not self.at_op(":"):
                etype = self.test()
                parts.append(etype)
                if self.at_kw("as"):
                    parts.append(self.take())
                    leaf = self.expect_name()
                    parts.append(leaf)
                    name = leaf.text
            colon, block = self.suite()
            parts += [colon, block]
            handlers.append((etype, name, block))
        if handlers and self.at_kw("else"):
            parts.append(self.take())
            colon, orelse = self.suite()
            parts += [colon, orelse]
        if self.at_kw("finally"):
            parts.append(self.take())
            colon, finalbody = self.suite()
            parts += [colon, finalbody]
        if not handlers and finalbody is None:
            raise ParseFail(self.tok, "try without except or finally")
        return _mk("Try", parts, body=body, handlers=handlers, orelse=orelse, finalbody=finalbody)

    # expressions

    def testlist_star_expr(self) -> Node:
        first = self.star_or_test()
        if not self.at_op(","):
            return first
        parts = [first]
        elts = [first]
        while self.at_op(","):
            parts.append(self.take())
            if self._at_expr_end():
                break
            nxt = self.star_or_test()
            parts.append(nxt)
            elts.append(nxt)
        return _mk("Tuple", parts, elts=elts)

    def _at_expr_end(self) -> bool:
        t = self.tok
        return t.type in (NEWLINE, ENDMARKER) or (t.type == OP and t.text in ("=", ")", "]", "}", ":", ";")) \
            or (t.type == OP and t.text in _AUGOPS) or (t.type == NAME and t.text == "in")

    def star_or_test(self) -> Node:
        if self.at_op("*"):
            star = self.take()
            value = self.bitor()
            return _mk("Starred", [star, value], value=value)
        return self.namedexpr_test()

    def exprlist(self) -> Node:
        def one():
            if self.at_op("*"):
                star = self.take()
                value = self.bitor()
                return _mk("Starred", [star, value], value=value)
            return self.bitor()

        first = one()
        if not self.at_op(","):
            return first
        parts = [first]
        elts = [first]
        while self.at_op(","):
            parts.append(self.take())
            if self._at_expr_end():
                break
            nxt = one()
            parts.append(nxt)
            elts.append(nxt)
        return _mk("Tuple", parts, elts=elts)

    def namedexpr_test(self) -> Node:
        first = self.test()
        if self.at_op(":="):
            op = self.take()
            value = self.test()
            return _mk("NamedExpr", [first, op, value], target=first, value=value)
        return first

    def test(self) -> Node:
        if self.at_kw("lambda"):
            return self.lambdef()
        body = self.or_test()
        if self.at_kw("if"):
            kw_if = self.take()
            cond = self.or_test()
            kw_else = self.expect_kw("else")
            orelse = self.test()
            return _mk("IfExp", [body, kw_if, cond, kw_else, orelse], body=body, test=cond, orelse=orelse)
        return body

    def lambdef(self) -> Node:
        kw = self.take()
        params, param_parts = self.parameters(":", annotations=False)
        colon = self.expect_op(":")
        body = self.test()
        return _mk("Lambda", [kw, *param_parts, colon, body], params=params, body=body)

    def or_test(self) -> Node:
        return self._boolop("or", self.and_test)

    def and_test(self) -> Node:
        return self._boolop("and", self.not_test)

    def _boolop(self, word, sub):
        first = sub()
        if not self.at_kw(word):
            return first
        parts = [first]
        values = [first]
        while self.at_kw(word):
            parts.append(self.take())
            nxt = sub()
            parts.append(nxt)
            values.append(nxt)
        return _mk("BoolOp", parts, op=word, values=values)

    def not_test(self) -> Node:
        if self.at_kw("not"):
            kw = self.take()
            operand = self.not_test()
            return _mk("UnaryOp", [kw, operand], op="not", operand=operand)
        return self.comparison()

    def comparison(self) -> Node:
        left = self.bitor()
        parts = [left]
        ops = []
        comparators = []
        while True:
            t = self.tok
            if t.type == OP and t.text in _COMPOPS:
                parts.append(self.take())
                ops.append(t.text)
            elif self.at_kw("in"):
                parts.append(self.take())
                ops.append("in")
            elif self.at_kw("not") and self.peek().type == NAME and self.peek().text == "in":
                parts += [self.take(), self.take()]
                ops.append("not in")
            elif self.at_kw("is"):
                parts.append(self.take())
                if self.at_kw("not"):
                    parts.append(self.take())
                    ops.append("is not")
                else:
                    ops.append("is")
            else:
                break
            nxt = self.bitor()
            parts.append(nxt)
            comparators.append(nxt)
        if not ops:
            return left
        return _mk("Compare", parts, left=left, ops=ops, comparators=comparators)

    def bitor(self) -> Node:
        return self._binary(0)

    def _binary(self, level) -> Node:
        if level == len(_BINARY_LEVELS):
            return self.factor()
        ops = _BINARY_LEVELS[level]
        left = self._binary(level + 1)
        while self.tok.type == OP and self.tok.text in ops:
            op = self.take()
            right = self._binary(level + 1)
            left = _mk("BinOp", [left, op, right], left=left, op=op.text, right=right)
        return left

    def factor(self) -> Node:
        if self.at_op("+", "-", "~"):
            op = self.take()
            operand = self.factor()
            return _mk("UnaryOp", [op, operand], op=op.text, operand=operand)
        return self.power()

    def power(self) -> Node:
        base = self.atom_expr()
        if self.at_op("**"):
            op = self.take()
            exponent = self.factor()
            return _mk("BinOp", [base, op, exponent], left=base, op="**", right=exponent)
        return base

    def atom_expr(self) -> Node:
        node = self.atom()
        while True:
            if self.at_op("("):
                lpar = self.take()
                args, arg_parts, keywords = self.arglist(")")
                rpar = self.expect_op(")")
                node = _mk("Call", [node, lpar, *arg_parts, rpar], func=node, args=args, keywords=keywords)
            elif self.at_op("["):
                lbr = self.take()
                index = self.subscriptlist()
                rbr = self.expect_op("]")
                node = _mk("Subscript", [node, lbr, index, rbr], value=node, index=index)
            elif self.at_op("."):
                dot = self.take()
                attr = self.expect_name()
                node = _mk("Attribute", [node, dot, attr], value=node, attr=attr.text)
            else:
                return node

    def arglist(self, closer):
        args = []
        keywords = []
        parts = []
        while not self.at_op(closer):
            if self.at_op("*", "**"):
                star = self.take()
                value = self.test()
                node = _mk("Starred" if star.text == "*" else "DoubleStarred", [star, value], value=value)
                parts.append(node)
                if star.text == "*":
                    args.append(node)
                else:
                    keywords.append((None, value))
            elif (self.tok.type == NAME and not self.tok.is_keyword
                  and self.peek().type == OP and self.peek().text == "="):
                name = self.take()
                eq = self.take()
                value = self.test()
                parts.append(_mk("KeywordArg", [name, eq, value], name=name.text, value=value))
                keywords.append((name.text, value))
            else:
                value = self.namedexpr_test()
                if self.at_kw("for"):
                    value = self.comprehension("GeneratorExp", value, [])
                parts.append(value)
                args.append(value)
            if not self.at_op(","):
                break
            parts.append(self.take())
        return args, parts, keywords

    def subscriptlist(self) -> Node:
        first = self.subscript()
        if not self.at_op(","):
            return first
        parts = [first]
        elts = [first]
        while self.at_op(","):
            parts.append(self.take())
            if self.at_op("]"):
                break
            nxt = self.subscript()
            parts.append(nxt)
            elts.append(nxt)
        return _mk("Tuple", parts, elts=elts)

    def subscript(self) -> Node:
        lower = upper = step = None
        parts = []
        if not self.at_op(":"):
            lower = self.test()
            if not self.at_op(":"):
                return lower
            parts.append(lower)
        parts.append(self.take())
        if not self.at_op(":", ",", "]"):
            upper = self.test()
            parts.append(upper)
        if self.at_op(":"):
            parts.append(self.take())
            if not self.at_op(",", "]"):
                step = self.test()
                parts.append(step)
        return _mk("Slice", parts, lower=lower, upper=upper, step=step)

    def comprehension(self, kind, elt, head_parts) -> Node:
        parts = list(head_parts) + [elt]
        generators = []
        while self.at_kw("for"):
            parts.append(self.take())
            target = self.exprlist()
            parts.append(target)
            parts.append(self.expect_kw("in"))
            iterable = self.or_test()
            parts.append(iterable)
            ifs = []
            while self.at_kw("if"):
                parts.append(self.take())
                cond = self.or_test()
                parts.append(cond)
                ifs.append(cond)
            generators.append((target, iterable, ifs))
        return _mk(kind, parts, elt=elt, generators=generators)

    def atom(self) -> Node:
        t = self.tok
        if t.type == OP:
            if t.text == "(":
                return self._paren()
            if t.text == "[":
                return self._list()
            if t.text == "{":
                return self._brace()
            if t.text == "...":
                return self.take()
            raise ParseFail(t, "unexpected operator")
        if t.type == NAME:
            if t.is_keyword and t.text not in _SOFT_CONSTANTS:
                raise ParseFail(t, "unexpected keyword")
            return self.take()
        if t.type == NUMBER:
            return self.take()
        if t.type == STRING:
            first = self.take()
            if self.tok.type != STRING:
                return first
            leaves = [first]
            while self.tok.type == STRING:
                leaves.append(self.take())
            return _mk("Strings", leaves)
        if t.type == ERROR:
            raise ParseFail(t, "invalid token")
        raise ParseFail(t, "expected an expression")

    def _paren(self) -> Node:
        lpar = self.take()
        if self.at_op(")"):
            return _mk("Tuple", [lpar, self.take()], elts=[])
        first = self.star_or_test()
        if self.at_kw("for"):
            comp = self.comprehension("GeneratorExp", first, [])
            return _mk("Paren", [lpar, comp, self.expect_op(")")], value=comp)
        if self.at_op(")"):
            return _mk("Paren", [lpar, first, self.take()], value=first)
        parts = [lpar, first]
        elts = [first]
        while self.at_op(","):
            parts.append(self.take())
            if self.at_op(")"):
                break
            nxt = self.star_or_test()
            parts.append(nxt)
            elts.append(nxt)
        parts.append(self.expect_op(")"))
        return _mk("Tuple", parts, elts=elts)

    def _list(self) -> Node:
        lbr = self.take()
        if self.at_op("]"):
            return _mk("List", [lbr, self.take()], elts=[])
        first = self.star_or_test()
        if self.at_kw("for"):
            comp = self.comprehension("ListComp", first, [lbr])
            comp.children = comp.children + (self.expect_op("]"),)
            comp.span = (comp.children[0].span[0], comp.children[-1].span[1])
            return comp
        parts = [lbr, first]
        elts = [first]
        while self.at_op(","):
            parts.append(self.take())
            if self.at_op("]"):
                break
            nxt = self.star_or_test()
            parts.append(nxt)
            elts.append(nxt)
        parts.append(self.expect_op("]"))
        return _mk("List", parts, elts=elts)

    def _brace(self) -> Node:
        lbr = self.take()
        if self.at_op("}"):
            return _mk("Dict", [lbr, self.take()], pairs=[])
        if self.at_op("**"):
            is_dict = True
        else:
            probe = self.pos
            self.star_or_test()
            is_dict = self.at_op(":")
            self.pos = probe
        parts = [lbr]
        if is_dict:
            pairs = []
            while not self.at_op("}"):
                if self.at_op("**"):
                    star = self.take()
                    value = self.bitor()
                    parts.append(_mk("DoubleStarred", [star, value], value=value))
                    pairs.append((None, value))
                else:
                    key = self.test()
                    colon = self.expect_op(":")
                    value = self.test()
                    if self.at_kw("for") and not pairs:
                        pair = _mk("DictItem", [key, colon, value], key=key, value=value)
                        comp = self.comprehension("DictComp", pair, [lbr])
                        comp.children = comp.children + (self.expect_op("}"),)
                        comp.span = (comp.children[0].span[0], comp.children[-1].span[1])
                        return comp
                    parts.append(_mk("DictItem", [key, colon, value], key=key, value=value))
                    pairs.append((key, value))
                if not self.at_op(","):
                    break
                parts.append(self.take())
            parts.append(self.expect_op("}"))
            return _mk("Dict", parts, pairs=pairs)
        first = self.star_or_test()
        if self.at_kw("for"):
            comp = self.comprehension("SetComp", first, [lbr])
            comp.children = comp.children + (self.expect_op("}"),)
            comp.span = (comp.children[0].span[0], comp.children[-1].span[1])
            return comp
        parts.append(first)
        elts = [first]
        while self.at_op(","):
            parts.append(self.take())
            if self.at_op("}"):
                break
            nxt = self.star_or_test()
            parts.append(nxt)
            elts.append(nxt)
        parts.append(self.expect_op("}"))
        return _mk("Set", parts, elts=elts)


def _elements(node: Node) -> list[Node]:
    if node.kind in ("Tuple", "List"):
        return list(node["elts"])
    return [node]


def parse_source(text: str) -> SyntaxTree:
    """Parse ``text``; never raises. Check ``tree.degraded`` for error nodes."""
    return Parser(text).parse()
