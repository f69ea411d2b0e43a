import pytest
from hypothesis import given, strategies as st

from evstream.errors import ParseError
from evstream.grammar import Grammar, Literal, NonTerminal, Pattern, parse_symbol, tokenize

ARITH = r"""
<expr> := <term> + <expr> | <term>
<term> := <factor> * <term> | <factor>
<factor> := ( <expr> ) | <num>
<num> := ^\d+
"""


def evaluate(node):
    """Value of an ARITH parse tree."""
    kids = [c for c in node.children]
    if node.label == "num":
        return int(kids[0].token)
    if node.label == "factor":
        return evaluate(kids[1]) if len(kids) == 3 else evaluate(kids[0])
    if len(kids) == 1:
        return evaluate(kids[0])
    a, b = evaluate(kids[0]), evaluate(kids[2])
    return a + b if node.label == "expr" else a * b


exprs = st.recursive(
    st.integers(0, 99).map(str),
    lambda inner: st.one_of(
        st.tuples(inner, inner).map(lambda t: f"{t[0]} + {t[1]}"),
        st.tuples(inner, inner).map(lambda t: f"{t[0]} * {t[1]}"),
        inner.map(lambda s: f"( {s} )"),
    ),
    max_leaves=12,
)


@given(exprs)
def test_parse_tree_evaluates_like_python(text):
    g = Grammar.from_text(ARITH)
    assert evaluate(g.parse(text)) == eval(text)


@given(exprs)
def test_leaves_reproduce_tokens(text):
    tree = Grammar.from_text(ARITH).parse(text)
    assert tree.leaves() == [t.text for t in tokenize(text)]


def test_symbols():
    assert parse_symbol("<a-b>") == NonTerminal("a-b")
    assert parse_symbol("⟨x⟩") == NonTerminal("x")
    assert parse_symbol("^\\d+") == Pattern("\\d+", None)
    assert parse_symbol("WITH") == Literal("WITH")
    assert parse_symbol("^") == Literal("^")


def test_regex_terminals_match_whole_tokens():
    g = Grammar.from_text("<s> := ^[a-z]+")
    assert g.matches("abc")
    assert not g.matches("abc1")


def test_tokenizer():
    toks = [t.text for t in tokenize("SELECT T.a, 'x y' FROM $in <= 3.5")]
    assert toks == ["SELECT", "T.a", ",", "'x y'", "FROM", "$in", "<=", "3.5"]


def test_furthest_failure_is_reported():
    g = Grammar.from_text(ARITH)
    with pytest.raises(ParseError) as ei:
        g.parse("1 + ( 2 * )")
    err = ei.value
    assert err.position == 10
    assert "(" in err.expected and "/\\d+/" in err.expected
    assert "offset 10" in str(err)


def test_trailing_input_is_an_error():
    g = Grammar.from_text(ARITH)
    with pytest.raises(ParseError, match="'3'"):
        g.parse("1 + 2 3")


def test_empty_input_reports_end():
    with pytest.raises(ParseError, match="end of input"):
        Grammar.from_text(ARITH).parse("")


def test_left_recursion_is_detected():
    g = Grammar.from_text("<e> := <e> + 1 | 1")
    with pytest.raises(ParseError, match="left recursion"):
        g.parse("1 + 1")


def test_undefined_symbol():
    with pytest.raises(ParseError, match="undefined"):
        Grammar.from_text("<s> := <nope>").parse("x")


def test_rules_can_be_added_while_running():
    g = Grammar.from_text(ARITH)
    assert not g.matches("- 3")
    g.add_rule("factor", "- <factor>")
    assert g.matches("- 3 * 2")
    g.remove_last("factor")
    assert not g.matches("- 3")


def test_add_case_to_rule():
    g = Grammar.from_text("<s> := a")
    g.add_rule("t", "b c")
    g.add_case_to_rule("<s>", "<t>")
    assert g.matches("b c") and g.matches("a")


def test_multiline_rules_and_comments():
    g = Grammar.from_text("""
    # a comment
    <s> := a
      | b ;
    <t> := c
    """)
    assert g.rules["s"] == [(Literal("a"),), (Literal("b"),)]
    assert g.start == "s"


def test_text_round_trip():
    g = Grammar.from_text(ARITH)
    h = Grammar.from_text(g.to_text(), start="expr")
    assert h.rules == g.rules


def test_malformed_rules():
    with pytest.raises(ParseError):
        Grammar.from_text("<s> a b")
    with pytest.raises(ParseError):
        Grammar.from_text("<s> := a | | b")
    with pytest.raises(ParseError):
        Grammar.from_text("s := a")


def test_first_alternative_wins_on_ambiguity():
    g = Grammar.from_text("<s> := <x> | <y>\n<x> := a\n<y> := a")
    assert g.parse("a").children[0].label == "x"


def test_backtracking_across_alternatives():
    # the first alternative of <a> consumes too much for <s>
    g = Grammar.from_text("<s> := <a> b\n<a> := x b | x")
    assert g.matches("x b")
    assert g.parse("x b").children[0].children[0].token == "x"
