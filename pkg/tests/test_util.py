import math

import pytest

from cosched.cli.render import comparison_headers, consumption_csv, cost_table, diagnostics_table
from cosched.factory import EnergyDispatch, ScheduleDecision, UncertaintyRealization, simulate_schedule
from cosched.factory.loader import Diagnostic
from cosched.i18n.localization import LANG_ENV, LocalizationService
from cosched.utils.util import chunked, dumps_json, ensure_dir, read_json, read_jsonl, write_json, write_jsonl


class TestChunked:
    def test_remainder(self):
        assert list(chunked(range(7), 3)) == [[0, 1, 2], [3, 4, 5], [6]]

    def test_empty(self):
        assert list(chunked([], 2)) == []

    def test_size_must_be_positive(self):
        with pytest.raises(ValueError):
            list(chunked([1], 0))


class TestJson:
    def test_dumps_is_canonical(self):
        text = dumps_json({"b": 1, "a": [1.5, None]})
        assert text.endswith("}\n")
        assert text.index('"a"') < text.index('"b"')

    def test_nan_is_rejected(self):
        with pytest.raises(ValueError):
            dumps_json({"x": math.nan})

    def test_files(self, tmp_path):
        path = write_json(tmp_path / "deep" / "doc.json", {"k": [1, 2]})
        assert read_json(path) == {"k": [1, 2]}
        lines = write_jsonl(tmp_path / "t.jsonl", ['{"k": 0}', '{"k": 1}'])
        assert read_jsonl(lines) == [{"k": 0}, {"k": 1}]

    def test_ensure_dir(self, tmp_path):
        target = ensure_dir(tmp_path / "a" / "b")
        assert target.is_dir()
        assert ensure_dir(target) == target


class TestLocalization:
    def test_languages(self):
        lang = LocalizationService("en")
        assert lang.languages == (LocalizationService.ENGLISH, LocalizationService.DANISH)
        assert lang.get_text("objective") == "Objective"
        lang.set_language(LocalizationService.DANISH)
        assert lang.get_text("objective") == "Målfunktion"
        assert lang.check_name("failed") == "fejlet"

    def test_unknown_key_and_check(self):
        lang = LocalizationService("en")
        assert lang.get_text("nope") == "nope"
        assert lang.get_text("nope", "fallback") == "fallback"
        assert lang.check_name("mystery") == "mystery"

    def test_set_language(self):
        lang = LocalizationService("en")
        with pytest.raises(ValueError):
            lang.set_language("fr")
        lang.set_language("da")
        assert lang.check_name("rtp") == "Realtidspris"

    def test_language_from_env(self, monkeypatch):
        monkeypatch.setenv(LANG_ENV, "DA")
        assert LocalizationService().current_language_code == "da"
        monkeypatch.setenv(LANG_ENV, "xx")
        assert LocalizationService().current_language_code == "en"


class TestRender:
    def _report(self, graph):
        schedule = ScheduleDecision.from_triplets(2, [(0, "W1", "slow")])
        return simulate_schedule(graph, schedule, EnergyDispatch.idle(2), UncertaintyRealization())

    def test_headers_follow_the_language(self):
        assert comparison_headers(LocalizationService("da"))[0] == "Kørsel"
        assert comparison_headers(LocalizationService("en"))[-1] == "Objective"

    def test_cost_table(self, tiny_graph):
        table = cost_table(self._report(tiny_graph), LocalizationService("en"))
        assert "Objective" in table
        assert "-11.6400" in table

    def test_consumption_csv(self, tiny_graph):
        report = self._report(tiny_graph)
        lines = consumption_csv({"slow": report, "again": report}).splitlines()
        assert lines[0] == "hour,slow,again"
        assert len(lines) == 1 + tiny_graph.horizon
        assert consumption_csv({}).splitlines() == ["hour"]

    def test_diagnostics_table(self):
        table = diagnostics_table([Diagnostic("rtp", "$.energy.rtp", "length 1")], LocalizationService("en"))
        assert "Real-time price" in table
