from __future__ import annotations

from enum import Enum

from . import kernels


class Model(str, Enum):
    MODIFIED_AC = "modified_ac"
    MODIFIED_CH = "modified_ch"
    CLASSIC_AC = "classic_ac"
    CLASSIC_CH = "classic_ch"

    @property
    def conserved(self) -> bool:
        return self in (Model.MODIFIED_CH, Model.CLASSIC_CH)

    @property
    def classic(self) -> bool:
        return self in (Model.CLASSIC_AC, Model.CLASSIC_CH)

    @property
    def code(self) -> int:
        return {
            Model.MODIFIED_AC: kernels.MODIFIED_AC,
            Model.MODIFIED_CH: kernels.MODIFIED_CH,
            Model.CLASSIC_AC: kernels.CLASSIC_AC,
            Model.CLASSIC_CH: kernels.CLASSIC_CH,
        }[self]

    @classmethod
    def parse(cls, value) -> "Model":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"modifiedac": "modified_ac", "modifiedch": "modified_ch",
                   "classicac": "classic_ac", "classicch": "classic_ch"}
        return cls(aliases.get(key, key))
