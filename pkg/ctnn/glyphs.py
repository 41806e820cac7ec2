'''
Copyright (C) 2024 The ctnn developers

Please see the LICENSE file for the terms and conditions
associated with this software.


Embedded monospace digit atlas. Each digit is drawn on a 5x7 cell grid, every
cell becomes a 3x3 block of pixels and the 15x21 glyph is centered on the 28x28
canvas (rows 3-23, columns 6-20), giving a 3 pixel stroke.
'''
from itertools import combinations

import numpy as np

from ctnn.defines import GRID_SIZE, MAX_INTENSITY, NUM_CLASSES
from ctnn.exceptions import PreconditionViolation


CELL = 3
MIN_LIT_PIXELS = 40

_DIGITS = {
    0: ('.###.',
        '#...#',
        '#..##',
        '#.#.#',
        '##..#',
        '#...#',
        '.###.'),
    1: ('..#..',
        '.##..',
        '..#..',
        '..#..',
        '..#..',
        '..#..',
        '.###.'),
    2: ('.###.',
        '#...#',
        '....#',
        '...#.',
        '..#..',
        '.#...',
        '#####'),
    3: ('#####',
        '...#.',
        '..#..',
        '...#.',
        '....#',
        '#...#',
        '.###.'),
    4: ('...#.',
        '..##.',
        '.#.#.',
        '#..#.',
        '#####',
        '...#.',
        '...#.'),
    5: ('#####',
        '#....',
        '####.',
        '....#',
        '....#',
        '#...#',
        '.###.'),
    6: ('..##.',
        '.#...',
        '#....',
        '####.',
        '#...#',
        '#...#',
        '.###.'),
    7: ('#####',
        '....#',
        '...#.',
        '..#..',
        '.#...',
        '.#...',
        '.#...'),
    8: ('.###.',
        '#...#',
        '#...#',
        '.###.',
        '#...#',
        '#...#',
        '.###.'),
    9: ('.###.',
        '#...#',
        '#...#',
        '.####',
        '....#',
        '...#.',
        '.##..'),
}


def _render(rows) -> np.ndarray:
    cells = np.array([[c == '#' for c in row] for row in rows], dtype=np.uint8)
    glyph = np.kron(cells, np.ones((CELL, CELL), dtype=np.uint8))
    canvas = np.zeros((GRID_SIZE, GRID_SIZE), dtype=np.uint8)
    top = (GRID_SIZE - glyph.shape[0]) // 2
    left = (GRID_SIZE - glyph.shape[1]) // 2
    canvas[top:top + glyph.shape[0], left:left + glyph.shape[1]] = glyph
    return canvas


class GlyphAtlas:
    """
    Ten binary 28x28 bitmaps, one per digit.
    """
    def __init__(self, bitmaps=None):
        if bitmaps is None:
            bitmaps = np.stack([_render(_DIGITS[d]) for d in range(NUM_CLASSES)])
        bitmaps = np.asarray(bitmaps, dtype=np.uint8)
        if bitmaps.shape != (NUM_CLASSES, GRID_SIZE, GRID_SIZE):
            raise PreconditionViolation(f'atlas must hold {NUM_CLASSES} {GRID_SIZE}x{GRID_SIZE} bitmaps')
        self.bitmaps = bitmaps

    def glyph(self, digit: int) -> np.ndarray:
        if digit not in range(NUM_CLASSES):
            raise PreconditionViolation(f'digit must be in 0-9, got {digit}')
        return self.bitmaps[digit]

    def lit_pixels(self, digit: int) -> int:
        return int(self.glyph(digit).sum())

    def separation(self, a: int, b: int) -> float:
        diff = (self.glyph(a).astype(np.float64) - self.glyph(b)) * MAX_INTENSITY
        return float(np.mean(diff * diff))

    def check(self, floor: float = 100.0):
        """
        Every glyph has at least MIN_LIT_PIXELS lit pixels and every pair differs by more than floor (MSE at 0-255).
        """
        for d in range(NUM_CLASSES):
            if self.lit_pixels(d) < MIN_LIT_PIXELS:
                raise PreconditionViolation(f'glyph {d} has only {self.lit_pixels(d)} lit pixels')
        for a, b in combinations(range(NUM_CLASSES), 2):
            if self.separation(a, b) <= floor:
                raise PreconditionViolation(f'glyphs {a} and {b} are too similar')
        return True


ATLAS = GlyphAtlas()
