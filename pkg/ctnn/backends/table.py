'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.


CSV tables for losses, sweeps, traces and dataset manifests.
'''
import csv
from typing import Dict, Iterable, List, Sequence

from ctnn.callback import StepCallback


def _cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return '1' if value else '0'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]):
    """
    Floats are written with repr so the same values always give the same bytes.
    """
    with open(path, 'w', newline='') as fp:
        writer = csv.writer(fp, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, newline='') as fp:
        return list(csv.DictReader(fp))


TRACE_HEADER = ('frame_index', 'label', 'D', 'fired', 'cumulative_network_calls')


class TraceCSVCallback(StepCallback):
    """
    Collects one row per StepRecord; flush() writes the trace CSV.
    """
    def __init__(self, path: str):
        super().__init__(None)
        self.path = path
        self.rows = []

    def __call__(self, record):
        self.rows.append((record.frame_index, record.label, float(record.difference), bool(record.fired), record.network_calls))

    def flush(self):
        write_csv(self.path, TRACE_HEADER, self.rows)
