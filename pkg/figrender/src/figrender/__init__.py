"""Renders fibercm experiment CSVs into publication-style figures."""

from .io import CsvFormatError, Table, dump_tables, read_table, read_tables
from .plots import render_capacity, render_waterfall, style_path

__version__ = "0.1.0"
