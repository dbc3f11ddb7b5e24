"""Analysis reports, sweep tables and SVG plots."""

from .analysis import analyze_scenario, is_report, load_report, nuisance_entry, write_report
from .summary import render_markdown, write_markdown
from .svg import EllipseKind, render_svg, write_svg
from .table import SWEEP_COLUMNS, read_table, run_sweep, write_table

__all__ = [
    'SWEEP_COLUMNS',
    'EllipseKind',
    'analyze_scenario',
    'is_report',
    'load_report',
    'nuisance_entry',
    'read_table',
    'render_markdown',
    'render_svg',
    'run_sweep',
    'write_markdown',
    'write_report',
    'write_svg',
    'write_table',
]
