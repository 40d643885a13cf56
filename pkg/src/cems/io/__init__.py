"""Configuration files, run manifests and report emission."""

from .config import config_to_dict, export_config, load_config
from .manifest import RunManifest, prepare_out_dir
from .reports import (TraceTable, figure_tables, read_commitment, read_summary,
                      read_table, read_trace, trace_rows, write_commitment, write_plan,
                      write_table, write_trace)
from .series import read_building_series, read_series, write_building_series, write_series

__all__ = [
    "RunManifest", "TraceTable", "config_to_dict", "export_config", "figure_tables",
    "load_config", "prepare_out_dir", "read_building_series", "read_commitment",
    "read_series", "read_summary", "read_table", "read_trace", "trace_rows",
    "write_building_series", "write_commitment", "write_plan", "write_series",
    "write_table", "write_trace",
]
