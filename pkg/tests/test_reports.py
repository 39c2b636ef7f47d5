import json
import math

from restartfa.reports import ROW_FIELDS, ReportRow, evaluate_words, export_report
from restartfa.zoo import LanguageId, membership


def row(**overrides):
    base = dict(machine="m", word="a", p_acc=0.25, p_rej=0.5, p_reset_total=0.25,
                P_acc=1 / 3, P_rej=2 / 3, expected_steps=4.0, lemma4_bound=12.0,
                verdict="pass")
    base.update(overrides)
    return ReportRow(**base)


def test_field_order_fixed():
    assert ROW_FIELDS == ("machine", "word", "p_acc", "p_rej", "p_reset_total",
                          "P_acc", "P_rej", "expected_steps", "lemma4_bound",
                          "verdict")


def test_empty_rows_give_header_only_csv():
    out = export_report([], "csv")
    assert out == ",".join(ROW_FIELDS) + "\n"


def test_csv_column_count():
    out = export_report([row()], "csv")
    header, line = out.strip().split("\n")
    assert len(header.split(",")) == 10
    assert len(line.split(",")) == 10


def test_json_round_trips_a_row():
    out = export_report([row()], "json")
    parsed = json.loads(out)
    assert len(parsed) == 1
    assert parsed[0]["P_acc"] == 1 / 3
    assert parsed[0]["verdict"] == "pass"
    assert list(parsed[0]) == list(ROW_FIELDS)


def test_seventeen_significant_digits():
    out = export_report([row(P_acc=1 / 3)], "csv")
    assert "0.33333333333333331" in out


def test_non_finite_rendering():
    out_csv = export_report([row(expected_steps=math.inf)], "csv")
    assert ",inf," in out_csv
    out_json = export_report([row(expected_steps=math.inf)], "json")
    assert json.loads(out_json)[0]["expected_steps"] is None


def test_evaluate_words_sorted_and_verdicts(am_qfa):
    lang = LanguageId("suffix", 1, am_qfa.alphabet)
    rows = evaluate_words(am_qfa, ["ba", "", "a"], "suffix-1",
                          membership=lambda w: membership(lang, w), eps=0.25)
    assert [r.word for r in rows] == ["", "a", "ba"]
    assert all(r.verdict == "pass" for r in rows)
    assert rows[1].p_acc == 0.25**4
    assert rows[0].P_rej == 1.0


def test_evaluate_words_without_oracle(am_qfa):
    rows = evaluate_words(am_qfa, ["a"], "m")
    assert rows[0].verdict == ""
