from hypothesis import given, strategies as st
import pandas as pd
import pytest

from core.enums.MergerTypeEnum import MergerTypeEnum
from core.enums.SeverityEnum import SeverityEnum
from core.models.MergerRecords import (
    MergerRecord,
    firm_key,
    latest_panel_rows,
    panel_frame,
    participants_frame,
)
from core.validators.PanelValidator import (
    CarryForwardRule,
    InactiveFirmRule,
    PanelDiagnostic,
    validate_panel,
)


def row(firm, year, age=10.0, teu=100.0, country="JP"):
    return firm, year, age, teu, country


def merger(record_id, seller, buyer, year, kind=MergerTypeEnum.MERGER):
    return MergerRecord(record_id, seller, buyer, year, kind)


def test_firm_key_folds_case_and_whitespace():
    assert firm_key("  Hapag-Lloyd   AG ") == firm_key("hapag-lloyd ag")


def test_merger_record_rejects_blank_names():
    with pytest.raises(ValueError):
        merger(1, " ", "B", 2000)


def test_clean_panel_has_no_diagnostics():
    panel = [row("A", 2000), row("A", 2001), row("B", 2001)]
    assert validate_panel(panel, [merger(1, "A", "B", 2001)]) == []


def test_negative_values_are_errors():
    diagnostics = validate_panel([row("A", 2000, age=-1.0), row("B", 2000, teu=-5.0)])
    assert [d.severity for d in diagnostics] == [SeverityEnum.ERROR, SeverityEnum.ERROR]
    assert all(d.is_error for d in diagnostics)


def test_duplicate_firm_year_is_an_error():
    diagnostics = validate_panel([row("A", 2000), row("a", 2000)])
    assert len(diagnostics) == 1
    assert diagnostics[0].message == "firm-year listed twice"


def test_year_gap_is_a_warning():
    diagnostics = validate_panel([row("A", 2000), row("A", 2004)])
    assert len(diagnostics) == 1
    assert diagnostics[0].severity is SeverityEnum.WARNING
    assert diagnostics[0].message == "no rows for 2001-2003"


def test_inactive_firm_is_a_warning():
    diagnostics = InactiveFirmRule().check(panel_frame([row("A", 2000, teu=0.0)]), [])
    assert diagnostics == [
        PanelDiagnostic(SeverityEnum.WARNING, "A", None, "never active (TEU 0 in every row)")
    ]


def test_carry_forward_is_info():
    panel = [row("A", 1998), row("A", 1999), row("B", 2001)]
    diagnostics = validate_panel(panel, [merger(1, "A", "B", 2001)])
    assert len(diagnostics) == 1
    assert diagnostics[0].severity is SeverityEnum.INFO
    assert str(diagnostics[0]) == "[info] A (2001): carried forward from 1999"


def test_carry_forward_skips_consolidation_buyer():
    panel = panel_frame([row("A", 1999), row("Newco", 1990)])
    record = merger(1, "A", "Newco", 2001, MergerTypeEnum.CONSOLIDATION)
    diagnostics = CarryForwardRule().check(panel, [record])
    assert [d.firm for d in diagnostics] == ["A"]


def test_later_rows_alone_are_not_carry_forward():
    diagnostics = validate_panel([row("A", 2005)], [merger(1, "A", "A2", 2001)])
    assert diagnostics == []


def test_panel_frame_sorts_by_firm_key_then_year():
    frame = panel_frame([row("b", 2001), row("A", 2002), row("a", 2000, country="kr")])
    assert list(frame["key"]) == ["a", "a", "b"]
    assert list(frame["year"]) == [2000, 2002, 2001]
    assert frame.loc[0, "country"] == "KR"


def test_participants_leave_out_consolidation_buyers():
    records = [merger(1, "A", "B", 2001), merger(2, "C", "Newco", 2002, MergerTypeEnum.CONSOLIDATION)]
    participants = participants_frame(records)
    assert list(participants["name"]) == ["A", "B", "C"]
    assert list(participants["side"]) == ["seller", "buyer", "seller"]


def test_latest_panel_rows_keep_request_order():
    panel = panel_frame([row("A", 1998, teu=1.0), row("A", 2000, teu=2.0), row("B", 2003, teu=3.0)])
    requests = participants_frame([merger(2, "A", "B", 2002), merger(1, "A", "B", 1999)])
    resolved = latest_panel_rows(panel, requests)
    assert list(resolved["record_id"]) == [2, 2, 1, 1]
    assert list(resolved["size_teu"].fillna(-1.0)) == [2.0, -1.0, 1.0, -1.0]
    assert resolved["panel_year"].isna().tolist() == [False, True, False, True]


@given(
    years=st.lists(st.integers(1990, 2010), min_size=1, max_size=12, unique=True),
    merger_year=st.integers(1990, 2010),
)
def test_carry_forward_picks_the_latest_earlier_year(years, merger_year):
    panel = [row("A", year, teu=float(year)) for year in years]
    resolved = latest_panel_rows(panel_frame(panel), participants_frame([merger(1, "A", "A2", merger_year)]))
    earlier = [year for year in years if year <= merger_year]
    if earlier:
        assert resolved.loc[0, "panel_year"] == max(earlier)
        assert resolved.loc[0, "size_teu"] == float(max(earlier))
    else:
        assert pd.isna(resolved.loc[0, "panel_year"])
