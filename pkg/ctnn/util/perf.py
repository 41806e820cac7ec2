'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.


Wall clock instrumentation of named stages (training, sweeps, stream runs)
'''
from contextlib import contextmanager
import logging
import time
from collections import defaultdict


LOG = logging.getLogger('ctnn')

_perf_data = defaultdict(lambda: defaultdict(dict))
_perf_stats = defaultdict(list)


def perf_start(component: str, key: str):
    _perf_data[component][key]['start'] = time.perf_counter()


def perf_end(component: str, key: str) -> float:
    _perf_data[component][key]['end'] = time.perf_counter()
    elapsed = _perf_data[component][key]['end'] - _perf_data[component][key]['start']
    _perf_stats[f"{component}-{key}"].append(elapsed)
    return elapsed


def perf_log(component: str, key: str, stats=1000, stats_only=True):
    stats_key = f"{component}-{key}"
    if not stats_only:
        LOG.info("%s: %s - %.2f ms", component, key, 1000 * (_perf_data[component][key]['end'] - _perf_data[component][key]['start']))
    if stats and len(_perf_stats[stats_key]) > stats:
        _min = min(_perf_stats[stats_key]) * 1000
        _max = max(_perf_stats[stats_key]) * 1000
        _avg = sum(_perf_stats[stats_key]) / len(_perf_stats[stats_key]) * 1000
        LOG.info("%s: last %d executions min %.2f ms, max %.2f ms, average %.2f ms", stats_key, stats, _min, _max, _avg)
        _perf_stats[stats_key] = []


@contextmanager
def timed(component: str, key: str):
    perf_start(component, key)
    try:
        yield
    finally:
        perf_end(component, key)
        perf_log(component, key, stats=0, stats_only=False)
