'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.
'''


class Callback:
    def __init__(self, callback):
        self.callback = callback

    def __call__(self, obj):
        if self.callback is None:
            return
        self.callback(obj)


class StepCallback(Callback):
    pass


class EpochCallback(Callback):
    pass


def as_callbacks(callbacks, cls=Callback) -> list:
    """
    Normalize None, a single callable or a list of callables into a list of Callback objects
    """
    if callbacks is None:
        return []
    if callable(callbacks) and not isinstance(callbacks, (list, tuple)):
        callbacks = [callbacks]
    return [cb if isinstance(cb, Callback) else cls(cb) for cb in callbacks]
