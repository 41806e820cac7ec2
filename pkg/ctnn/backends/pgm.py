'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.


Binary greyscale PGM (P5, maxval 255) images.
'''
import os

import numpy as np

from ctnn.callback import StepCallback
from ctnn.defines import DUMP_DIFFERENCE, DUMP_INCOMING, DUMP_PREVIOUS, DUMP_RECONSTRUCTION, DUMP_ROWS
from ctnn.exceptions import ImageFormatError


def encode_pgm(image) -> bytes:
    """
    2-D array of intensities -> P5 bytes. Values are rounded and clamped to 0-255.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ImageFormatError(f'PGM images are 2-D, got shape {image.shape}')
    height, width = image.shape
    pixels = np.rint(np.clip(image, 0, 255)).astype(np.uint8)
    return f'P5\n{width} {height}\n255\n'.encode('ascii') + pixels.tobytes()


def decode_pgm(data: bytes) -> np.ndarray:
    tokens = []
    pos = 0
    # magic, width, height, maxval; '#' starts a comment running to end of line
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise ImageFormatError('truncated PGM header')
        if data[pos:pos + 1] == b'#':
            end = data.find(b'\n', pos)
            pos = len(data) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1

    if tokens[0] != b'P5':
        raise ImageFormatError(f'unsupported PGM magic {tokens[0]!r}')
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ImageFormatError('invalid PGM header')
    if maxval != 255:
        raise ImageFormatError(f'only 8-bit PGM is supported, maxval={maxval}')
    pixels = data[pos:pos + width * height]
    if len(pixels) != width * height:
        raise ImageFormatError(f'PGM truncated: expected {width * height} pixels, found {len(pixels)}')
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width).astype(np.float64)


def write_pgm(path: str, image):
    with open(path, 'wb') as fp:
        fp.write(encode_pgm(image))


def read_pgm(path: str) -> np.ndarray:
    with open(path, 'rb') as fp:
        return decode_pgm(fp.read())


class FrameDumpCallback(StepCallback):
    """
    Writes the four images of a trace step: previous reconstruction, incoming frame,
    difference image and new reconstruction, as <prefix><index>_<row>.pgm.
    """
    def __init__(self, directory: str, prefix: str = 'step'):
        super().__init__(None)
        self.directory = directory
        self.prefix = prefix
        os.makedirs(directory, exist_ok=True)

    def __call__(self, record):
        images = {
            DUMP_PREVIOUS: record.reconstruction_before,
            DUMP_INCOMING: record.incoming,
            DUMP_DIFFERENCE: record.difference_image(),
            DUMP_RECONSTRUCTION: record.reconstruction_after,
        }
        for row in DUMP_ROWS:
            write_pgm(os.path.join(self.directory, f'{self.prefix}{record.frame_index:04d}_{row}.pgm'), images[row].image())
