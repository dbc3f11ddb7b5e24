"""Test analysis reports, sweep tables, markdown summaries and SVG plots."""

import math

import pandas as pd
import pytest
import yaml

from src.propagation.nuisance import Nuisance
from src.reporting import analysis
from src.reporting.analysis import analyze_scenario, is_report, load_report, write_report
from src.reporting.summary import render_markdown
from src.reporting.svg import EllipseKind, nice_step, render_svg
from src.reporting.table import SWEEP_COLUMNS, read_table, run_sweep, summarize_table, write_table
from src.scenario.presets import centered_circle, partial_uncertainty, unknown_model_setup
from src.utils.errors import DegenerateInputError, PreconditionViolationError, UnknownNodeIdError
from src.utils.yaml_io import dump_yaml, format_float


class TestYaml:
    """Float formatting of reports."""

    def test_floats_read_back_exactly(self):
        for value in (0.1, 1.0 / 3.0, 1e20, -0.0, 5e-324, 123456789.0):
            assert yaml.safe_load(format_float(value)) == value

    def test_keys_keep_insertion_order(self):
        assert dump_yaml({'b': 1, 'a': 0.5}) == "b: 1\na: 0.5\n"


class TestAnalysis:
    """AnalysisReport contents."""

    def test_report_layout(self):
        report = analyze_scenario(partial_uncertainty(n=16, uncertain=2))
        assert list(report) == ['tool', 'version', 'confidence_k', 'scenario', 'nodes']
        assert [node['id'] for node in report['nodes']] == ['s1', 'a1', 'a2']
        source = report['nodes'][0]
        assert source['kind'] == 'source'
        assert set(source['decomposition']) == {'pure', 'loss_anchors', 'loss_other_sources', 'net'}
        anchor = report['nodes'][1]
        assert anchor['kind'] == 'anchor'
        assert 'gain_main' in anchor['decomposition']

    def test_circle_metrics(self):
        report = analyze_scenario(centered_circle(8, 5.0))
        node = report['nodes'][0]
        ie = node['information_ellipse']
        assert ie['major'] == pytest.approx(ie['minor'])
        assert node['eccentricity'] == pytest.approx(0.0, abs=1e-6)
        assert node['peb_m'] == pytest.approx(math.sqrt(2.0 / ie['major']))
        assert node['error_ellipse']['major'] == pytest.approx(1.0 / ie['minor'])

    def test_node_selection(self):
        scenario = partial_uncertainty(n=16, uncertain=2)
        report = analyze_scenario(scenario, node_ids=['a2'])
        assert [node['id'] for node in report['nodes']] == ['a2']
        with pytest.raises(UnknownNodeIdError, match="a9"):
            analyze_scenario(scenario, node_ids=['a9'])

    def test_report_is_deterministic(self, tmp_path):
        scenario = partial_uncertainty(n=16, uncertain=4)
        first, second = tmp_path / "first.yaml", tmp_path / "second.yaml"
        write_report(analyze_scenario(scenario), first)
        write_report(analyze_scenario(scenario), second)
        assert first.read_bytes() == second.read_bytes()

    def test_timing_only_on_request(self):
        scenario = centered_circle(8, 5.0)
        assert 'timing' not in analyze_scenario(scenario)
        assert analyze_scenario(scenario, include_timing=True)['timing']['analysis_seconds'] >= 0.0

    def test_nuisance_section(self):
        report = analyze_scenario(unknown_model_setup(), nuisance=Nuisance.POWER)
        nuisance = report['nuisance']
        assert nuisance['nuisance'] == 'power'
        assert nuisance['source_id'] == 's1'
        assert nuisance['peb_m'] > report['nodes'][0]['peb_m']

        with pytest.raises(PreconditionViolationError, match="certain anchors"):
            analyze_scenario(partial_uncertainty(n=16, uncertain=2), nuisance=Nuisance.GAMMA)

    def test_load_report(self, tmp_path):
        path = tmp_path / "report.yaml"
        report = analyze_scenario(centered_circle(8, 5.0))
        write_report(report, path)
        loaded = load_report(path)
        assert is_report(loaded)
        assert loaded['nodes'][0]['peb_m'] == report['nodes'][0]['peb_m']
        assert loaded['tool'] == analysis.TOOL_NAME

        scenario_file = tmp_path / "scenario.yaml"
        scenario_file.write_text("schema_version: 1\n", encoding='utf-8')
        with pytest.raises(ValueError, match="not an analysis report"):
            load_report(scenario_file)

    def test_markdown_summary(self):
        text = render_markdown(analyze_scenario(unknown_model_setup(), nuisance=Nuisance.GAMMA))
        assert text.startswith("# Localization bounds report")
        assert "| s1 | source |" in text
        assert "## Unknown gamma" in text


class TestSweepTable:
    """Long-format sweep tables."""

    def test_header_and_rows(self, tmp_path):
        table = run_sweep(centered_circle(8, 5.0), 'source.x', [0.0, 1.0, 2.0])
        assert list(table.columns) == SWEEP_COLUMNS
        assert list(table['status']) == ['ok', 'ok', 'ok']
        assert table['eccentricity'].iloc[0] == pytest.approx(0.0, abs=1e-6)
        assert table['eccentricity'].iloc[2] > table['eccentricity'].iloc[0]

        path = tmp_path / "sweep.csv"
        write_table(table, path)
        assert path.read_text(encoding='utf-8').splitlines()[0] == ','.join(SWEEP_COLUMNS)
        again = read_table(path)
        assert again['peb_m'].tolist() == table['peb_m'].tolist()

    def test_unusable_points_are_recorded(self):
        table = run_sweep(centered_circle(8, 5.0), 'source.x', [0.0, 5.0])
        assert table['status'].tolist() == ['ok', 'ScenarioValidationError']
        assert pd.isna(table['peb_m'].iloc[1])

    def test_strict_mode_raises(self):
        from src.utils.errors import ScenarioValidationError

        with pytest.raises(ScenarioValidationError):
            run_sweep(centered_circle(8, 5.0), 'source.x', [0.0, 5.0], strict=True)

    def test_empty_sweep(self, tmp_path):
        table = run_sweep(centered_circle(8, 5.0), 'source.x', [])
        assert len(table) == 0
        path = tmp_path / "empty.csv"
        write_table(table, path)
        assert path.read_text(encoding='utf-8') == ','.join(SWEEP_COLUMNS) + '\n'

    def test_delta_sweep_summary(self):
        table = run_sweep(partial_uncertainty(n=16, uncertain=4), 'delta', [0.5, 1.0, 2.0])
        sources = table[table['node_id'] == 's1']
        assert sources['peb_m'].is_monotonic_increasing
        summary = summarize_table(table)
        assert summary['s1']['points'] == 3
        assert summary['s1']['peb_min_m'] == sources['peb_m'].iloc[0]

    def test_worker_count_does_not_change_table(self):
        base = partial_uncertainty(n=16, uncertain=4)
        serial = run_sweep(base, 'delta', [0.5, 1.0, 2.0, 3.0], workers=1)
        pooled = run_sweep(base, 'delta', [0.5, 1.0, 2.0, 3.0], workers=2)
        pd.testing.assert_frame_equal(serial, pooled)


class TestSvg:
    """SVG rendering."""

    def test_document_structure(self):
        report = analyze_scenario(partial_uncertainty(n=8, uncertain=2))
        svg = render_svg(report)
        assert svg.startswith('<?xml version="1.0" encoding="UTF-8"?>\n<svg ')
        assert svg.rstrip().endswith('</svg>')
        assert svg.count('<ellipse ') == 2 * len(report['nodes'])
        assert svg.count('class="anchor-uncertain"') == 2
        assert svg.count('class="anchor-certain"') == 6
        assert svg.count('class="source-unknown"') == 1

    def test_ellipse_selection(self):
        report = analyze_scenario(partial_uncertainty(n=8, uncertain=2))
        only_ee = render_svg(report, node_ids=['s1'], kind=EllipseKind.ERROR)
        assert only_ee.count('<ellipse ') == 1
        assert 'class="ee"' in only_ee

    def test_rendering_is_deterministic(self):
        report = analyze_scenario(centered_circle(8, 5.0))
        assert render_svg(report, k=4.0) == render_svg(report, k=4.0)

    def test_invalid_requests(self):
        report = analyze_scenario(centered_circle(8, 5.0))
        with pytest.raises(UnknownNodeIdError):
            render_svg(report, node_ids=['a1'])
        with pytest.raises(DegenerateInputError):
            render_svg(report, k=0.0)

    def test_nice_step(self):
        assert nice_step(10.0, 5) == 2.0
        assert nice_step(7.0, 6) == 2.0
        assert nice_step(0.5, 5) == pytest.approx(0.1)
        assert nice_step(0.0, 5) == 1.0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
