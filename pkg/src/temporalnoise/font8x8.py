"""Embedded 8x8 bitmap font covering printable ASCII (0x20-0x7E).

Glyphs are drawn here as 8 rows of 8 characters ('#' = set). The table is the
single source of truth for text masks; no system font is ever consulted, so
rendered masks are identical on every platform. Column 7 is left clear on
most glyphs; the renderer adds one extra cell column between glyphs anyway.
"""

from __future__ import annotations

import numpy as np

GLYPH_SIZE = 8

_GLYPHS: dict[str, tuple[str, ...]] = {
    " ": (
        "........",
        "........",
        "........",
        "........",
        "........",
        "........",
        "........",
        "........",
    ),
    "!": (
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "........",
        "...#....",
        "........",
    ),
    '"': (
        "..#.#...",
        "..#.#...",
        "..#.#...",
        "........",
        "........",
        "........",
        "........",
        "........",
    ),
    "#": (
        "..#.#...",
        "..#.#...",
        ".#####..",
        "..#.#...",
        ".#####..",
        "..#.#...",
        "..#.#...",
        "........",
    ),
    "$": (
        "...#....",
        "..####..",
        ".#.#....",
        "..###...",
        "...#.#..",
        ".####...",
        "...#....",
        "........",
    ),
    "%": (
        ".##...#.",
        ".##..#..",
        "....#...",
        "...#....",
        "..#.....",
        ".#...##.",
        "#....##.",
        "........",
    ),
    "&": (
        "..##....",
        ".#..#...",
        ".#.#....",
        "..#.....",
        ".#.#.#..",
        ".#..#...",
        "..##.#..",
        "........",
    ),
    "'": (
        "...#....",
        "...#....",
        "..#.....",
        "........",
        "........",
        "........",
        "........",
        "........",
    ),
    "(": (
        "....#...",
        "...#....",
        "..#.....",
        "..#.....",
        "..#.....",
        "...#....",
        "....#...",
        "........",
    ),
    ")": (
        "..#.....",
        "...#....",
        "....#...",
        "....#...",
        "....#...",
        "...#....",
        "..#.....",
        "........",
    ),
    "*": (
        "........",
        ".#.#.#..",
        "..###...",
        ".#####..",
        "..###...",
        ".#.#.#..",
        "........",
        "........",
    ),
    "+": (
        "........",
        "...#....",
        "...#....",
        ".#####..",
        "...#....",
        "...#....",
        "........",
        "........",
    ),
    ",": (
        "........",
        "........",
        "........",
        "........",
        "........",
        "...##...",
        "...##...",
        "..#.....",
    ),
    "-": (
        "........",
        "........",
        "........",
        ".#####..",
        "........",
        "........",
        "........",
        "........",
    ),
    ".": (
        "........",
        "........",
        "........",
        "........",
        "........",
        "...##...",
        "...##...",
        "........",
    ),
    "/": (
        "......#.",
        ".....#..",
        "....#...",
        "...#....",
        "..#.....",
        ".#......",
        "#.......",
        "........",
    ),
    "0": (
        "..###...",
        ".#...#..",
        ".#..##..",
        ".#.#.#..",
        ".##..#..",
        ".#...#..",
        "..###...",
        "........",
    ),
    "1": (
        "...#....",
        "..##....",
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "..###...",
        "........",
    ),
    "2": (
        "..###...",
        ".#...#..",
        ".....#..",
        "....#...",
        "...#....",
        "..#.....",
        ".#####..",
        "........",
    ),
    "3": (
        "..###...",
        ".#...#..",
        ".....#..",
        "...##...",
        ".....#..",
        ".#...#..",
        "..###...",
        "........",
    ),
    "4": (
        "....#...",
        "...##...",
        "..#.#...",
        ".#..#...",
        ".#####..",
        "....#...",
        "....#...",
        "........",
    ),
    "5": (
        ".#####..",
        ".#......",
        ".####...",
        ".....#..",
        ".....#..",
        ".#...#..",
        "..###...",
        "........",
    ),
    "6": (
        "..###...",
        ".#......",
        ".####...",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "..###...",
        "........",
    ),
    "7": (
        ".#####..",
        ".....#..",
        "....#...",
        "...#....",
        "..#.....",
        "..#.....",
        "..#.....",
        "........",
    ),
    "8": (
        "..###...",
        ".#...#..",
        ".#...#..",
        "..###...",
        ".#...#..",
        ".#...#..",
        "..###...",
        "........",
    ),
    "9": (
        "..###...",
        ".#...#..",
        ".#...#..",
        "..####..",
        ".....#..",
        ".....#..",
        "..###...",
        "........",
    ),
    ":": (
        "........",
        "...##...",
        "...##...",
        "........",
        "...##...",
        "...##...",
        "........",
        "........",
    ),
    ";": (
        "........",
        "...##...",
        "...##...",
        "........",
        "...##...",
        "...##...",
        "..#.....",
        "........",
    ),
    "<": (
        "....#...",
        "...#....",
        "..#.....",
        ".#......",
        "..#.....",
        "...#....",
        "....#...",
        "........",
    ),
    "=": (
        "........",
        "........",
        ".#####..",
        "........",
        ".#####..",
        "........",
        "........",
        "........",
    ),
    ">": (
        "..#.....",
        "...#....",
        "....#...",
        ".....#..",
        "....#...",
        "...#....",
        "..#.....",
        "........",
    ),
    "?": (
        "..###...",
        ".#...#..",
        ".....#..",
        "....#...",
        "...#....",
        "........",
        "...#....",
        "........",
    ),
    "@": (
        "..###...",
        ".#...#..",
        ".#.###..",
        ".#.#.#..",
        ".#.###..",
        ".#......",
        "..###...",
        "........",
    ),
    "A": (
        "..###...",
        ".#...#..",
        ".#...#..",
        ".#####..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "........",
    ),
    "B": (
        ".####...",
        ".#...#..",
        ".#...#..",
        ".####...",
        ".#...#..",
        ".#...#..",
        ".####...",
        "........",
    ),
    "C": (
        "..###...",
        ".#...#..",
        ".#......",
        ".#......",
        ".#......",
        ".#...#..",
        "..###...",
        "........",
    ),
    "D": (
        ".####...",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".####...",
        "........",
    ),
    "E": (
        ".#####..",
        ".#......",
        ".#......",
        ".####...",
        ".#......",
        ".#......",
        ".#####..",
        "........",
    ),
    "F": (
        ".#####..",
        ".#......",
        ".#......",
        ".####...",
        ".#......",
        ".#......",
        ".#......",
        "........",
    ),
    "G": (
        "..###...",
        ".#...#..",
        ".#......",
        ".#..##..",
        ".#...#..",
        ".#...#..",
        "..###...",
        "........",
    ),
    "H": (
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#####..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "........",
    ),
    "I": (
        "..###...",
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "..###...",
        "........",
    ),
    "J": (
        "...###..",
        "....#...",
        "....#...",
        "....#...",
        "....#...",
        ".#..#...",
        "..##....",
        "........",
    ),
    "K": (
        ".#...#..",
        ".#..#...",
        ".#.#....",
        ".##.....",
        ".#.#....",
        ".#..#...",
        ".#...#..",
        "........",
    ),
    "L": (
        ".#......",
        ".#......",
        ".#......",
        ".#......",
        ".#......",
        ".#......",
        ".#####..",
        "........",
    ),
    "M": (
        ".#...#..",
        ".##.##..",
        ".#.#.#..",
        ".#.#.#..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "........",
    ),
    "N": (
        ".#...#..",
        ".##..#..",
        ".#.#.#..",
        ".#..##..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "........",
    ),
    "O": (
        "..###...",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "..###...",
        "........",
    ),
    "P": (
        ".####...",
        ".#...#..",
        ".#...#..",
        ".####...",
        ".#......",
        ".#......",
        ".#......",
        "........",
    ),
    "Q": (
        "..###...",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#.#.#..",
        ".#..#...",
        "..##.#..",
        "........",
    ),
    "R": (
        ".####...",
        ".#...#..",
        ".#...#..",
        ".####...",
        ".#.#....",
        ".#..#...",
        ".#...#..",
        "........",
    ),
    "S": (
        "..####..",
        ".#......",
        ".#......",
        "..###...",
        ".....#..",
        ".....#..",
        ".####...",
        "........",
    ),
    "T": (
        ".#####..",
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "........",
    ),
    "U": (
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "..###...",
        "........",
    ),
    "V": (
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "..#.#...",
        "...#....",
        "........",
    ),
    "W": (
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#.#.#..",
        ".#.#.#..",
        ".##.##..",
        ".#...#..",
        "........",
    ),
    "X": (
        ".#...#..",
        ".#...#..",
        "..#.#...",
        "...#....",
        "..#.#...",
        ".#...#..",
        ".#...#..",
        "........",
    ),
    "Y": (
        ".#...#..",
        ".#...#..",
        "..#.#...",
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "........",
    ),
    "Z": (
        ".#####..",
        ".....#..",
        "....#...",
        "...#....",
        "..#.....",
        ".#......",
        ".#####..",
        "........",
    ),
    "[": (
        "..###...",
        "..#.....",
        "..#.....",
        "..#.....",
        "..#.....",
        "..#.....",
        "..###...",
        "........",
    ),
    "\\": (
        "#.......",
        ".#......",
        "..#.....",
        "...#....",
        "....#...",
        ".....#..",
        "......#.",
        "........",
    ),
    "]": (
        "..###...",
        "....#...",
        "....#...",
        "....#...",
        "....#...",
        "....#...",
        "..###...",
        "........",
    ),
    "^": (
        "...#....",
        "..#.#...",
        ".#...#..",
        "........",
        "........",
        "........",
        "........",
        "........",
    ),
    "_": (
        "........",
        "........",
        "........",
        "........",
        "........",
        "........",
        "........",
        "#######.",
    ),
    "`": (
        "..#.....",
        "...#....",
        "........",
        "........",
        "........",
        "........",
        "........",
        "........",
    ),
    "a": (
        "........",
        "........",
        "..####..",
        ".....#..",
        "..####..",
        ".#...#..",
        "..####..",
        "........",
    ),
    "b": (
        ".#......",
        ".#......",
        ".####...",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".####...",
        "........",
    ),
    "c": (
        "........",
        "........",
        "..####..",
        ".#......",
        ".#......",
        ".#......",
        "..####..",
        "........",
    ),
    "d": (
        ".....#..",
        ".....#..",
        "..####..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "..####..",
        "........",
    ),
    "e": (
        "........",
        "........",
        "..###...",
        ".#...#..",
        ".#####..",
        ".#......",
        "..####..",
        "........",
    ),
    "f": (
        "...##...",
        "..#.....",
        ".####...",
        "..#.....",
        "..#.....",
        "..#.....",
        "..#.....",
        "........",
    ),
    "g": (
        "........",
        "........",
        "..####..",
        ".#...#..",
        ".#...#..",
        "..####..",
        ".....#..",
        "..###...",
    ),
    "h": (
        ".#......",
        ".#......",
        ".####...",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "........",
    ),
    "i": (
        "...#....",
        "........",
        "..##....",
        "...#....",
        "...#....",
        "...#....",
        "..###...",
        "........",
    ),
    "j": (
        "....#...",
        "........",
        "...##...",
        "....#...",
        "....#...",
        "....#...",
        ".#..#...",
        "..##....",
    ),
    "k": (
        ".#......",
        ".#......",
        ".#..#...",
        ".#.#....",
        ".###....",
        ".#..#...",
        ".#...#..",
        "........",
    ),
    "l": (
        "..##....",
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "..###...",
        "........",
    ),
    "m": (
        "........",
        "........",
        ".##.#...",
        ".#.#.#..",
        ".#.#.#..",
        ".#.#.#..",
        ".#.#.#..",
        "........",
    ),
    "n": (
        "........",
        "........",
        ".####...",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "........",
    ),
    "o": (
        "........",
        "........",
        "..###...",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "..###...",
        "........",
    ),
    "p": (
        "........",
        "........",
        ".####...",
        ".#...#..",
        ".#...#..",
        ".####...",
        ".#......",
        ".#......",
    ),
    "q": (
        "........",
        "........",
        "..####..",
        ".#...#..",
        ".#...#..",
        "..####..",
        ".....#..",
        ".....#..",
    ),
    "r": (
        "........",
        "........",
        ".#.##...",
        ".##.....",
        ".#......",
        ".#......",
        ".#......",
        "........",
    ),
    "s": (
        "........",
        "........",
        "..####..",
        ".#......",
        "..###...",
        ".....#..",
        ".####...",
        "........",
    ),
    "t": (
        "..#.....",
        "..#.....",
        ".####...",
        "..#.....",
        "..#.....",
        "..#.....",
        "...##...",
        "........",
    ),
    "u": (
        "........",
        "........",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "..####..",
        "........",
    ),
    "v": (
        "........",
        "........",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "..#.#...",
        "...#....",
        "........",
    ),
    "w": (
        "........",
        "........",
        ".#...#..",
        ".#.#.#..",
        ".#.#.#..",
        ".#.#.#..",
        "..#.#...",
        "........",
    ),
    "x": (
        "........",
        "........",
        ".#...#..",
        "..#.#...",
        "...#....",
        "..#.#...",
        ".#...#..",
        "........",
    ),
    "y": (
        "........",
        "........",
        ".#...#..",
        ".#...#..",
        ".#...#..",
        "..####..",
        ".....#..",
        "..###...",
    ),
    "z": (
        "........",
        "........",
        ".#####..",
        "....#...",
        "...#....",
        "..#.....",
        ".#####..",
        "........",
    ),
    "{": (
        "....##..",
        "...#....",
        "...#....",
        "..#.....",
        "...#....",
        "...#....",
        "....##..",
        "........",
    ),
    "|": (
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "...#....",
        "........",
    ),
    "}": (
        "..##....",
        "....#...",
        "....#...",
        ".....#..",
        "....#...",
        "....#...",
        "..##....",
        "........",
    ),
    "~": (
        "........",
        "........",
        "..##..#.",
        ".#..##..",
        "........",
        "........",
        "........",
        "........",
    ),
}


def glyph_bitmap(ch: str) -> np.ndarray:
    """(8, 8) bool array for one character; KeyError for unsupported glyphs."""
    rows = _GLYPHS[ch]
    return np.array([[c == "#" for c in row] for row in rows], dtype=bool)


def supported(ch: str) -> bool:
    return ch in _GLYPHS


REPERTOIRE = frozenset(_GLYPHS)
