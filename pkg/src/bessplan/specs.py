"""Parameter records shared between the network model and the sizing problem."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class GeneratorSpec:
    """Dispatchable plant at ``bus``.

    Powers are in MW/MVA, the reserve activation cost in EUR/MWh.  ``q_ratio``
    bounds the reactive output to ``q_ratio * P`` in both directions.
    """

    bus: int
    s_max_mva: float
    p_min_mw: float = 0.0
    p_max_mw: float | None = None
    reserve_cost: float = 50.0
    q_ratio: float = 0.8

    def __post_init__(self):
        p_max = self.s_max_mva if self.p_max_mw is None else float(self.p_max_mw)
        object.__setattr__(self, "p_max_mw", p_max)
        if self.s_max_mva <= 0:
            raise ValueError(f"generator at bus {self.bus}: s_max_mva must be > 0")
        if not 0.0 <= self.p_min_mw <= p_max <= self.s_max_mva + 1e-9:
            raise ValueError(
                f"generator at bus {self.bus}: need 0 <= p_min <= p_max <= s_max, "
                f"got ({self.p_min_mw}, {p_max}, {self.s_max_mva})"
            )
        if self.reserve_cost < 0:
            raise ValueError(f"generator at bus {self.bus}: reserve_cost must be >= 0")
        if self.q_ratio < 0:
            raise ValueError(f"generator at bus {self.bus}: q_ratio must be >= 0")


@dataclass(frozen=True)
class EssCostModel:
    """Capital costs and loss model of candidate battery installations.

    ``c_power`` is EUR per MVA of converter rating, ``c_energy`` EUR per MWh of
    storage capacity.  ``loss_mode`` selects between the series-resistance
    circuit model ("thevenin") and a charge/discharge efficiency split
    ("constant-efficiency").

    ``loss_energy_cost`` (EUR/MWh) prices the net energy destroyed in
    conversion.  Moving energy through time is free (day-ahead spot
    assumption), but the lost fraction has to be re-purchased, so it carries
    roughly the spot price.  Without it the convex loss relaxations admit
    free dissipation of surplus energy.
    """

    c_power: float = 80_000.0
    c_energy: float = 280_000.0
    loss_mode: str = "thevenin"
    thevenin_resistance: float = 0.01
    efficiency: float = 0.95
    loss_energy_cost: float = 50.0

    def __post_init__(self):
        if self.c_power < 0 or self.c_energy < 0:
            raise ValueError("ESS unit costs must be >= 0")
        if self.loss_mode not in ("thevenin", "constant-efficiency"):
            raise ValueError(f"unknown loss_mode {self.loss_mode!r}")
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError("efficiency must be in (0, 1]")
        if self.thevenin_resistance < 0:
            raise ValueError("thevenin_resistance must be >= 0")
        if self.loss_energy_cost < 0:
            raise ValueError("loss_energy_cost must be >= 0")


@dataclass(frozen=True)
class CouplingSpec:
    """Ties one MV network's slack to an HV bus through an OLTC voltage band."""

    hv_bus: int
    mv_network: str
    oltc_band_c: float = 1.1

    def __post_init__(self):
        if self.oltc_band_c <= 1.0:
            raise ValueError("oltc_band_c must be > 1")


@dataclass(frozen=True)
class OperatingLimits:
    """Run-wide operating limits layered on top of per-bus file data.

    ``voltage_band`` overrides every bus voltage band except MV slack buses
    (which follow the OLTC coupling instead).  ``substation_pf_min`` applies a
    minimum power factor at each HV/MV interface whenever storage injections
    are free variables; set to None to disable.
    """

    voltage_band: tuple[float, float] | None = None
    substation_pf_min: float | None = 0.8
    ampacity_scale: float = 1.0
    slack_exchange_cost: float = 500.0
    # tie-breaking regularizers, orders of magnitude below the reserve price:
    # a token price on |Q| dispatch and on the worst unit-loading fraction.
    # They pick one point of a degenerate optimal face (equal-cost plants)
    # without touching the merit order, and keep scheduled operating points
    # mild enough for the AC anchoring solves.
    reactive_dispatch_cost: float = 0.5
    dispatch_spread_cost: float = 10.0
    # per-pass trust region (pu) on day-ahead redispatch around the
    # linearization dispatch; affine loss estimates are only valid locally
    dispatch_trust_region: float = 0.3
    # security margin (pu) subtracted from both voltage bounds inside the
    # optimizer so that affine-model error cannot push the AC operating point
    # past the statutory band; replay always checks the raw band
    voltage_margin: float = 0.0

    def __post_init__(self):
        if self.voltage_band is not None:
            lo, hi = self.voltage_band
            if not (0.0 < lo < 1.0 < hi < 2.0):
                raise ValueError(f"voltage band {self.voltage_band} outside (0,1)x(1,2)")
        if self.substation_pf_min is not None and not 0.0 < self.substation_pf_min <= 1.0:
            raise ValueError("substation_pf_min must be in (0, 1]")
        if self.ampacity_scale <= 0:
            raise ValueError("ampacity_scale must be > 0")
