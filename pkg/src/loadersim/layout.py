"""Machine layout (the candidate design) and scenario containers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .driveline import (ConverterSpec, TransmissionSpec, VehicleSpec, nominal_converter,
                        nominal_transmission, nominal_vehicle)
from .engine import EngineSpec, nominal_engine
from .hydraulics import (CylinderSpec, PumpSpec, nominal_lift_cylinder, nominal_pump,
                         nominal_tilt_cylinder)
from .loading_unit import LinkageSpec, PileSpec, nominal_linkage, nominal_pile
from .operator import OperatorParams
from .units import RPM


class LayoutError(ValueError):
    """A layout or scenario violates a component invariant.  The message names the field."""


@dataclass(frozen=True)
class MachineLayout:
    engine: EngineSpec
    converter: ConverterSpec
    transmission: TransmissionSpec
    vehicle: VehicleSpec
    pump: PumpSpec
    lift_cylinder: CylinderSpec
    tilt_cylinder: CylinderSpec
    linkage: LinkageSpec

    def validate(self) -> "MachineLayout":
        checks = [
            self.engine.validate, self.converter.validate, self.transmission.validate,
            self.vehicle.validate, self.pump.validate, self.linkage.validate,
            lambda: self.lift_cylinder.validate("lift_cylinder"),
            lambda: self.tilt_cylinder.validate("tilt_cylinder"),
        ]
        for check in checks:
            try:
                check()
            except ValueError as exc:
                raise LayoutError(str(exc)) from None
        return self

    def with_relief(self, p_relief: float) -> "MachineLayout":
        return replace(self, pump=replace(self.pump, p_relief=p_relief))

    def with_converter_scale(self, factor: float) -> "MachineLayout":
        return replace(self, converter=self.converter.scaled(factor))


@dataclass(frozen=True)
class ReversalScenario:
    v_back: float = -1.5
    omega_engine: float = 800 * RPM
    assume_max_hydraulics: bool = True
    reversal_time: float = 2.0

    def validate(self, engine: EngineSpec | None = None) -> "ReversalScenario":
        if not self.v_back < 0:
            raise LayoutError("reversal.v_back: must be < 0 (rolling backwards)")
        if not self.reversal_time > 0:
            raise LayoutError("reversal.reversal_time: must be > 0")
        if engine is not None and not engine.low_idle <= self.omega_engine <= engine.high_idle:
            raise LayoutError("reversal.omega_engine: must lie between low and high idle")
        return self


@dataclass(frozen=True)
class Scenario:
    """Everything about a run that is not the machine itself."""

    pile: PileSpec = field(default_factory=nominal_pile)
    operator: OperatorParams = field(default_factory=OperatorParams)
    reversal: ReversalScenario = field(default_factory=ReversalScenario)
    dt: float = 1e-3
    t_end: float = 60.0
    record_stride: int = 10
    marginal_band: float = 0.15

    def validate(self, layout: MachineLayout | None = None) -> "Scenario":
        try:
            self.pile.validate()
            self.operator.validate()
        except ValueError as exc:
            raise LayoutError(str(exc)) from None
        self.reversal.validate(layout.engine if layout is not None else None)
        if not 0 < self.marginal_band < 1:
            raise LayoutError("screen.marginal_band: must lie in (0, 1)")
        if not self.dt > 0:
            raise LayoutError("sim.dt: must be > 0")
        if not self.t_end >= self.dt:
            raise LayoutError("sim.t_end: must be >= dt")
        if self.record_stride < 1:
            raise LayoutError("sim.record_stride: must be >= 1")
        return self


def nominal_layout() -> MachineLayout:
    return MachineLayout(
        engine=nominal_engine(),
        converter=nominal_converter(),
        transmission=nominal_transmission(),
        vehicle=nominal_vehicle(),
        pump=nominal_pump(),
        lift_cylinder=nominal_lift_cylinder(),
        tilt_cylinder=nominal_tilt_cylinder(),
        linkage=nominal_linkage(),
    )


def nominal_scenario() -> Scenario:
    return Scenario()
