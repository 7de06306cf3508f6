import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sheetkg.errors import (
    CellTypeError, ConfigError, ParseError, ResolutionError,
)
from sheetkg.workbook import (
    Cell, CellRef, CellUriScheme, DateSerial, Empty, Number, Text, TextRun,
    load_workbook, struck_text, visible_text,
)
from sheetkg.xlsx import write_workbook


class TestXlsxLoading:
    def test_fixture_shape(self, example_bytes):
        wb = load_workbook(example_bytes, "xlsx")
        sheet = wb.sheet("Documents")
        assert sheet.n_rows == 5  # header line plus four data rows
        assert sheet.n_columns == 8

    def test_editor_runs_preserved(self, example_bytes):
        wb = load_workbook(example_bytes, "xlsx")
        cell = wb.sheet("Documents").cell(1, 3)
        assert cell.runs == (TextRun("Cooper", True), TextRun(" Smith", False))
        assert cell.value == Text("Cooper Smith")

    def test_xlsx_like_alias(self, example_bytes):
        assert load_workbook(example_bytes, "xlsx-like").workbook_id == \
            load_workbook(example_bytes, "xlsx").workbook_id

    def test_date_serial_promoted(self, example_bytes):
        wb = load_workbook(example_bytes, "xlsx")
        assert wb.sheet("Documents").cell(1, 6).value == DateSerial(42415)

    def test_plain_number_not_promoted(self, example_bytes):
        wb = load_workbook(example_bytes, "xlsx")
        assert wb.sheet("Documents").cell(1, 0).value == Number(1)

    def test_workbook_id_stable(self, example_bytes):
        a = load_workbook(example_bytes, "xlsx")
        b = load_workbook(bytes(example_bytes), "xlsx")
        assert a.workbook_id == b.workbook_id

    def test_style_fidelity_roundtrip(self, example_bytes):
        """Re-serializing run texts reproduces the original strings."""
        wb = load_workbook(example_bytes, "xlsx")
        for cell in wb.sheet("Documents").iter_cells():
            if isinstance(cell.value, Text):
                assert "".join(r.text for r in cell.runs) == cell.value.text

    def test_empty_workbook(self):
        data = write_workbook([("Sheet1", {})])
        wb = load_workbook(data, "xlsx")
        assert len(wb.sheets) == 1
        assert wb.sheet("Sheet1").cells == {}

    def test_sparse_map_no_empty_cells(self, example_bytes):
        wb = load_workbook(example_bytes, "xlsx")
        for cell in wb.sheet("Documents").iter_cells():
            assert not isinstance(cell.value, Empty)
            if isinstance(cell.value, Text):
                assert cell.value.text != ""

    def test_malformed_bytes(self):
        with pytest.raises(ParseError):
            load_workbook(b"this is not a zip archive", "xlsx")

    def test_unsupported_format_tag(self, example_bytes):
        with pytest.raises(ConfigError):
            load_workbook(example_bytes, "ods")

    def test_formula_cells(self):
        from sheetkg.workbook import Formula
        data = write_workbook([("S", {(0, 0): Formula("A1+B1"), (0, 1): 3})])
        wb = load_workbook(data, "xlsx")
        assert wb.sheet("S").cell(0, 0).value == Formula("A1+B1")


class TestCsvLoading:
    def test_degradation_vs_xlsx(self, example_bytes, example_csv):
        """Same register, both loaders: texts identical, styling gone,
        date serials degraded to plain numbers."""
        wx = load_workbook(example_bytes, "xlsx")
        wc = load_workbook(example_csv, "csv", sheet_name="Documents")
        sx, sc = wx.sheet("Documents"), wc.sheet("Documents")
        assert set(sx.cells) == set(sc.cells)
        for key, cell in sx.cells.items():
            other = sc.cells[key]
            assert not other.has_struck
            if isinstance(cell.value, Text):
                assert other.value == cell.value
            elif isinstance(cell.value, Number):
                assert other.value == cell.value
            elif isinstance(cell.value, DateSerial):
                assert other.value == Number(cell.value.days)

    def test_never_struck_never_dateserial(self, example_csv):
        wb = load_workbook(example_csv, "csv")
        for cell in wb.sheet("Sheet1").iter_cells():
            assert not cell.has_struck
            assert not isinstance(cell.value, DateSerial)

    def test_empty_csv(self):
        wb = load_workbook(b"", "csv")
        assert len(wb.sheets) == 1
        assert wb.sheets[0].cells == {}

    def test_multiline_quoted_field(self):
        wb = load_workbook(b'"a\nb",c\r\n', "csv")
        assert wb.sheet("Sheet1").cell(0, 0).value == Text("a\nb")
        assert wb.sheet("Sheet1").cell(0, 1).value == Text("c")

    def test_bad_utf8(self):
        with pytest.raises(ParseError):
            load_workbook(b"\xff\xfe\x00bad", "csv")


class TestVisibleText:
    def _editor_cell(self):
        ref = CellRef("wb", "S", 1, 3)
        return Cell(ref, Text("Cooper Smith"),
                    (TextRun("Cooper", True), TextRun(" Smith", False)))

    def test_exclude_struck(self):
        assert visible_text(self._editor_cell(), include_struck=False) == " Smith"

    def test_include_struck_is_identity(self):
        assert visible_text(self._editor_cell(), include_struck=True) == "Cooper Smith"

    def test_all_struck(self):
        cell = Cell(CellRef("wb", "S", 0, 0), Text("gone"),
                    (TextRun("gone", True),))
        assert visible_text(cell, include_struck=False) == ""
        assert struck_text(cell) == "gone"

    def test_non_text_cell(self):
        cell = Cell(CellRef("wb", "S", 0, 0), Number(3))
        with pytest.raises(CellTypeError):
            visible_text(cell)

    def test_runs_concatenate_exactly(self):
        with pytest.raises(ValueError):
            Cell(CellRef("w", "S", 0, 0), Text("abc"), (TextRun("ab", False),))

    def test_adjacent_same_flag_runs_merge(self):
        cell = Cell(CellRef("w", "S", 0, 0), Text("abcd"),
                    (TextRun("ab", False), TextRun("cd", False)))
        assert cell.runs == (TextRun("abcd", False),)


class TestDeepLinks:
    scheme = CellUriScheme("https://example.org/proj")

    def test_deterministic(self):
        ref = CellRef("wb1", "Sheet1", 0, 1)
        assert self.scheme.deep_link(ref) == self.scheme.deep_link(ref)

    def test_distinct_refs_distinct_uris(self):
        a = self.scheme.deep_link(CellRef("wb1", "Sheet1", 0, 1))
        b = self.scheme.deep_link(CellRef("wb1", "Sheet1", 1, 0))
        assert a != b

    def test_sheet_name_encoding(self):
        ref = CellRef("wb", "Sales / Q1", 2, 3)
        uri = self.scheme.deep_link(ref)
        assert "Sales%20%2F%20Q1" in uri
        assert self.scheme.resolve(uri) == ref

    def test_tampered_suffix(self):
        uri = self.scheme.deep_link(CellRef("wb", "S", 1, 2))
        with pytest.raises(ResolutionError):
            self.scheme.resolve(uri + "garbage")

    def test_foreign_namespace(self):
        other = CellUriScheme("https://elsewhere.org/proj")
        uri = other.deep_link(CellRef("wb", "S", 1, 2))
        with pytest.raises(ResolutionError):
            self.scheme.resolve(uri)

    @settings(max_examples=300, deadline=None)
    @given(
        wb=st.text(alphabet=string.ascii_lowercase + string.digits, min_size=1,
                   max_size=16),
        sheet=st.text(min_size=1, max_size=20).filter(lambda s: s == s.strip() or True),
        row=st.integers(min_value=0, max_value=10**6),
        col=st.integers(min_value=0, max_value=10**4),
    )
    def test_round_trip_property(self, wb, sheet, row, col):
        ref = CellRef(wb, sheet, row, col)
        assert self.scheme.resolve(self.scheme.deep_link(ref)) == ref
