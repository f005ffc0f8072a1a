"""Table-driven lift/tilt linkage, gravel pile resistance and bucket fill."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .driveline import G
from .tables import Table


@dataclass(frozen=True)
class LinkageSpec:
    lift_ratio: Table      # lift extension m -> N at cylinder per N at bucket
    tilt_ratio: Table      # tilt extension m -> same for tilt
    lift_height: Table     # lift extension m -> bucket pivot height m
    arm_equiv_mass: float  # kg at the bucket reference point
    max_payload: float     # kg

    def validate(self) -> None:
        if min(self.lift_ratio.y) <= 0 or min(self.tilt_ratio.y) <= 0:
            raise ValueError("linkage: ratios must be > 0")
        if not self.arm_equiv_mass > 0:
            raise ValueError("linkage.arm_equiv_mass: must be > 0")
        if not self.max_payload > 0:
            raise ValueError("linkage.max_payload: must be > 0")

    @property
    def r_min(self) -> float:
        return min(self.lift_ratio.y)

    @property
    def r_max(self) -> float:
        return max(self.lift_ratio.y)


@dataclass(frozen=True)
class PileSpec:
    k0: float
    k1: float
    k2: float
    vert_frac: float
    fill_rate: float     # kg per m of engaged advance
    pile_face_x: float   # m

    def validate(self) -> None:
        if min(self.k0, self.k1, self.k2) < 0 or not self.k1 + self.k2 > 0:
            raise ValueError("pile: need k0, k1, k2 >= 0 and k1 + k2 > 0")
        if not 0 <= self.vert_frac < 1:
            raise ValueError("pile.vert_frac: must lie in [0, 1)")
        if not self.fill_rate > 0:
            raise ValueError("pile.fill_rate: must be > 0")


@dataclass(frozen=True)
class BucketState:
    payload: float = 0.0
    depth: float = 0.0


def nominal_linkage() -> LinkageSpec:
    # mechanical advantage falls as the boom rises
    return LinkageSpec(
        lift_ratio=Table([0.0, 0.45, 0.9], [5.0, 4.4, 4.0]),
        tilt_ratio=Table([0.0, 0.6], [1.6, 1.4]),
        lift_height=Table([0.0, 0.9], [0.3, 3.8]),
        arm_equiv_mass=2500.0,
        max_payload=5000.0,
    )


def nominal_pile() -> PileSpec:
    return PileSpec(k0=2000.0, k1=20000.0, k2=20000.0, vert_frac=0.3,
                    fill_rate=3000.0, pile_face_x=6.0)


def lift_load_force(linkage: LinkageSpec, x_lift: float, payload: float,
                    extra_vertical: float = 0.0) -> float:
    """Lift cylinder force holding payload and boom, plus any downward force at the bucket."""
    return ((payload + linkage.arm_equiv_mass) * G + extra_vertical) * linkage.lift_ratio(x_lift)


def tilt_load_force(linkage: LinkageSpec, x_tilt: float, payload: float) -> float:
    return payload * G * linkage.tilt_ratio(x_tilt)


def pile_resistance(pile: PileSpec, depth: float) -> tuple[float, float]:
    if depth <= 0.0:
        return 0.0, 0.0
    fh = pile.k0 + pile.k1 * depth + pile.k2 * depth * depth
    return fh, pile.vert_frac * fh


def penetration_depth(pile: PileSpec, x: float, payload: float = 0.0) -> float:
    """Bucket edge depth behind the pile face.

    Material scooped into the bucket is taken off the face, so the face
    recedes by payload / fill_rate.
    """
    return max(x - pile.pile_face_x - payload / pile.fill_rate, 0.0)


def bucket_fill_step(pile: PileSpec, linkage: LinkageSpec, bucket: BucketState, advance: float,
                     tilt_engaged: bool, x: float) -> BucketState:
    """Add material for this step's forward advance inside the pile."""
    payload = bucket.payload
    if tilt_engaged and advance > 0.0 and bucket.depth > 0.0:
        payload = min(payload + pile.fill_rate * advance, linkage.max_payload)
    return replace(bucket, payload=payload, depth=penetration_depth(pile, x, payload))
