"""Measurement data sets and their JSON file format.

Two modes exist. Coherent mode stores one probability per grid direction
(the maximal Stern-Gerlach outcome, which is all the reconstruction needs);
multipole mode stores full outcome distributions on a cone design. Shot-based
records keep the raw counts alongside the estimated frequencies; shots = 0
marks exact Born probabilities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .grid import GridSpec, MeasurementGrid
from .multipole import ConeDesign
from .spin import TwiceSpin

MODE_COHERENT = "coherent"
MODE_MULTIPOLE = "multipole"


@dataclass(frozen=True)
class CoherentRecord:
    """One grid direction with its measured maximal-outcome probability."""

    q: int
    r_index: int
    theta: float
    phi: float
    p_s: float
    shots: int = 0
    count_s: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "q": self.q,
            "r_index": self.r_index,
            "theta": self.theta,
            "phi": self.phi,
            "p_s": self.p_s,
            "shots": self.shots,
            "count_s": self.count_s,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "CoherentRecord":
        count = data.get("count_s")
        return cls(
            q=int(data["q"]),
            r_index=int(data["r_index"]),
            theta=float(data["theta"]),
            phi=float(data["phi"]),
            p_s=float(data["p_s"]),
            shots=int(data.get("shots", 0)),
            count_s=None if count is None else int(count),
        )


@dataclass(frozen=True)
class OutcomeRecord:
    """Full outcome distribution at one cone/azimuth direction."""

    cone: int
    azimuth: int
    theta: float
    phi: float
    probs: tuple[float, ...]
    shots: int = 0
    counts: tuple[int, ...] | None = None

    def to_json_dict(self) -> dict:
        return {
            "cone": self.cone,
            "azimuth": self.azimuth,
            "theta": self.theta,
            "phi": self.phi,
            "probs": list(self.probs),
            "shots": self.shots,
            "counts": None if self.counts is None else list(self.counts),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "OutcomeRecord":
        counts = data.get("counts")
        return cls(
            cone=int(data["cone"]),
            azimuth=int(data["azimuth"]),
            theta=float(data["theta"]),
            phi=float(data["phi"]),
            probs=tuple(float(p) for p in data["probs"]),
            shots=int(data.get("shots", 0)),
            counts=None if counts is None else tuple(int(c) for c in counts),
        )


@dataclass
class MeasurementSet:
    """A complete measurement run, ready for reconstruction."""

    twice_s: TwiceSpin
    mode: str
    records: list = field(default_factory=list)
    grid: GridSpec | None = None
    design: ConeDesign | None = None

    def __post_init__(self) -> None:
        self.twice_s = TwiceSpin.of(self.twice_s)
        if self.mode not in (MODE_COHERENT, MODE_MULTIPOLE):
            raise ValueError(f"unknown measurement mode {self.mode!r}")
        if self.mode == MODE_COHERENT and self.grid is None:
            raise ValueError("coherent measurement sets need a grid spec")
        if self.mode == MODE_MULTIPOLE and self.design is None:
            raise ValueError("multipole measurement sets need a cone design")

    def to_json_dict(self) -> dict:
        data = {"twice_s": self.twice_s.twice_s, "mode": self.mode}
        if self.grid is not None:
            data["grid"] = self.grid.to_json_dict()
        if self.design is not None:
            data["design"] = self.design.to_json_dict()
        data["records"] = [r.to_json_dict() for r in self.records]
        return data

    @classmethod
    def from_json_dict(cls, data: dict) -> "MeasurementSet":
        mode = data["mode"]
        record_cls = CoherentRecord if mode == MODE_COHERENT else OutcomeRecord
        return cls(
            twice_s=TwiceSpin(int(data["twice_s"])),
            mode=mode,
            records=[record_cls.from_json_dict(r) for r in data["records"]],
            grid=GridSpec.from_json_dict(data["grid"]) if "grid" in data else None,
            design=ConeDesign.from_json_dict(data["design"]) if "design" in data else None,
        )


def write_measurement_set(meas: MeasurementSet, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meas.to_json_dict(), fh, indent=2)
        fh.write("\n")


def read_measurement_set(path: str) -> MeasurementSet:
    with open(path, "r", encoding="utf-8") as fh:
        return MeasurementSet.from_json_dict(json.load(fh))
