import pytest

from sheetkg.errors import TransformError
from sheetkg.transform import TransformExpr


def apply(source: str, text: str) -> list[str]:
    return TransformExpr.parse(source).apply(text)


class TestParsing:
    def test_unknown_function(self):
        with pytest.raises(TransformError, match="unknown transform function"):
            TransformExpr.parse("explode()")

    def test_wrong_arity(self):
        with pytest.raises(TransformError, match="argument"):
            TransformExpr.parse('split()')

    def test_trailing_garbage(self):
        with pytest.raises(TransformError):
            TransformExpr.parse('trim() trim()')

    def test_unterminated_string(self):
        with pytest.raises(TransformError):
            TransformExpr.parse('split("x')

    def test_bad_regex_fails_at_parse_time(self):
        with pytest.raises(TransformError, match="bad regex"):
            TransformExpr.parse('regex_all("(unclosed")')


class TestEvaluation:
    def test_split(self):
        assert apply('split("/")', "GA/BZ") == ["GA", "BZ"]

    def test_split_drops_empty_pieces(self):
        assert apply('split("/")', "/GA//BZ/") == ["GA", "BZ"]

    def test_trim(self):
        assert apply('split(",") | trim()', " a , b ") == ["a", "b"]

    def test_replace_is_literal(self):
        assert apply('replace("a.b", "X")', "xa.bx and aXb") == ["xXx and aXb"]

    def test_regex_all_whole_matches(self):
        assert apply('regex_all("[A-Z]+")', "aGAbBZc") == ["GA", "BZ"]

    def test_regex_all_uses_group_one(self):
        assert apply('regex_all("V(\\\\d+)")', "V1: x V2: y") == ["1", "2"]

    def test_lower_upper(self):
        assert apply('lower()', "GaBz") == ["gabz"]
        assert apply('upper()', "GaBz") == ["GABZ"]

    def test_escapes_in_strings(self):
        assert apply('split("\\n")', "a\nb") == ["a", "b"]

    def test_constant_list_ignores_input(self):
        assert apply('["x", "y"]', "whatever") == ["x", "y"]

    def test_pipeline_order(self):
        assert apply('split("/") | lower() | trim()', " A/B ") == ["a", "b"]

    def test_purity(self):
        expr = TransformExpr.parse('split("/")')
        assert expr.apply("a/b") == expr.apply("a/b") == ["a", "b"]

    def test_step_budget(self):
        expr = TransformExpr.parse('split("a") | split("b")')
        with pytest.raises(TransformError, match="step budget"):
            expr.apply("ab" * 60_000)
