"""Deterministic CSV and JSON writers for emitted tables"""
import csv
import io
import json
import os

import numpy as np

from selfdual.constant import defaults
from selfdual.constant.flag import OutputFormat

__all__ = ['format_float', 'render_table', 'dump_fields', 'resolve_output']


def format_float(value):
    """12 significant digits, scientific notation"""
    return defaults.CSV_FLOAT.format(float(value))


def _cell(value):
    if isinstance(value, bool) or value is None:
        return str(value).lower() if value is not None else ''
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def _json_value(value):
    if isinstance(value, (float, np.floating)):
        return float(format_float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def render_table(header, rows, output_format=OutputFormat.CSV):
    """
    Render rows as CSV (header line first) or as a JSON list of objects keyed by header

    Floats go through format_float in both formats so that CSV and JSON carry the same values.
    """
    rows = [tuple(row) for row in rows]
    if output_format is OutputFormat.JSON:
        return json.dumps([{name: _json_value(value) for name, value in zip(header, row)} for row in rows],
                          indent=2) + '\n'
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def dump_fields(path, pair):
    """Save the sampled fields of a solved pair as a compressed numpy archive"""
    grid = pair.grid
    np.savez_compressed(path, x=grid.x, y=grid.y, u=pair.u.values, ax=pair.a.ax, ay=pair.a.ay,
                        curl_a=pair.curl_a.values,
                        f=pair.f.values if pair.f is not None else np.zeros(grid.shape))


def resolve_output(out, default_name):
    """
    Path of an output file: out when given, else default_name inside $SELFDUAL_OUTPUT_DIR
    (or the working directory)
    """
    if out:
        return out
    return os.path.join(os.environ.get(defaults.OUTPUT_DIR_ENV, os.curdir), default_name)
