'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.
'''


class PreconditionViolation(ValueError):
    pass


class TopologyError(ValueError):
    pass


class TopologyMismatch(Exception):
    pass


class WeightFormatError(Exception):
    pass


class WeightTruncatedError(WeightFormatError):
    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f'weight file truncated: expected {expected} bytes of parameters, found {actual}')


class TrainingDiverged(Exception):
    def __init__(self, epoch: int, detail: str = 'loss is NaN'):
        self.epoch = epoch
        super().__init__(f'training aborted at epoch {epoch}: {detail}')


class ReconstructionMismatch(Exception):
    pass


class ConfigError(Exception):
    pass


class DatasetError(Exception):
    pass


class ImageFormatError(Exception):
    pass
