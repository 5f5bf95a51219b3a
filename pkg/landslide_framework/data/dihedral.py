"""The eight symmetries of a square tile.

Transform ``id = k + 4 * f`` rotates by ``k`` quarter turns and then flips
horizontally when ``f`` is 1. One quarter turn maps out[i, j] to
in[T-1-j, i], so [[1, 2], [3, 4]] becomes [[3, 1], [4, 2]].
"""
from dataclasses import dataclass
from typing import List

import numpy as np

from ..exceptions import GeometryError
from ..models import PixelRect

GROUP_ORDER = 8


@dataclass(frozen=True)
class DihedralTransform:
    id: int = 0

    def __post_init__(self):
        if not 0 <= self.id < GROUP_ORDER:
            raise ValueError(f"dihedral transform id must be in 0..7, got {self.id}")

    @classmethod
    def from_parts(cls, quarter_turns: int, flip: bool) -> "DihedralTransform":
        return cls(quarter_turns % 4 + 4 * int(flip))

    @classmethod
    def all(cls) -> List["DihedralTransform"]:
        return [cls(i) for i in range(GROUP_ORDER)]

    @property
    def quarter_turns(self) -> int:
        return self.id % 4

    @property
    def flip(self) -> bool:
        return self.id >= 4

    @property
    def is_identity(self) -> bool:
        return self.id == 0

    def apply(self, array: np.ndarray) -> np.ndarray:
        """Transform the last two (square) axes"""
        if array.ndim < 2 or array.shape[-1] != array.shape[-2]:
            raise GeometryError(f"dihedral transforms need square tiles, got {array.shape[-2:]}")
        out = np.rot90(array, k=-self.quarter_turns, axes=(-2, -1))
        if self.flip:
            out = np.flip(out, axis=-1)
        return np.ascontiguousarray(out)

    def apply_rect(self, rect: PixelRect, size: int) -> PixelRect:
        x, y, w, h = rect.x, rect.y, rect.w, rect.h
        for _ in range(self.quarter_turns):
            x, y, w, h = size - y - h, x, h, w
        if self.flip:
            x = size - x - w
        return PixelRect(x=x, y=y, w=w, h=h)

    def compose(self, first: "DihedralTransform") -> "DihedralTransform":
        """The transform equal to applying ``first`` and then ``self``"""
        if first.flip:
            turns = first.quarter_turns - self.quarter_turns
        else:
            turns = first.quarter_turns + self.quarter_turns
        return DihedralTransform.from_parts(turns, self.flip != first.flip)

    def inverse(self) -> "DihedralTransform":
        if self.flip:
            return self
        return DihedralTransform.from_parts(-self.quarter_turns, False)


IDENTITY = DihedralTransform(0)
ROT90 = DihedralTransform(1)
ROT180 = DihedralTransform(2)
ROT270 = DihedralTransform(3)
FLIP = DihedralTransform(4)
